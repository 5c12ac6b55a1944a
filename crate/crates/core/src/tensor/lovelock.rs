use super::{AntisymContraction, DenseTensor, Slot, Symmetry};
use crate::error::{Error, Result};

fn check_mixed_riemann(r: &DenseTensor) -> Result<()> {
    if r.slots() != [Slot::Lower, Slot::Lower, Slot::Upper, Slot::Upper] {
        return Err(Error::Contract(format!(
            "expected a mixed Riemann tensor R_ab^cd, got slots {:?}",
            r.slots()
        )));
    }
    Ok(())
}

fn check_order(n: usize, q: usize) -> Result<()> {
    if 2 * q >= n {
        return Err(Error::Domain(format!("order q = {q} requires 2q < n = {n}")));
    }
    Ok(())
}

/// `L_(q) = 2^{-q} δ^{a_1…a_2q}_{b_1…b_2q} Π R_{a a}^{b b}`; `L_(0) = 1`.
pub fn gauss_bonnet_curvature(riemann_mixed: &DenseTensor, q: usize) -> Result<f64> {
    check_mixed_riemann(riemann_mixed)?;
    let n = riemann_mixed.dim();
    check_order(n, q)?;
    if q == 0 {
        return Ok(1.0);
    }
    let eng = AntisymContraction::new(n, riemann_mixed.components(), q, None)?;
    Ok(eng.eval(&[], &[]) / f64::powi(2.0, q as i32))
}

/// The fully contravariant `P_(q)^{ijkl}` whose contraction with `R_ijkl` is `L_(q)`.
pub fn p_tensor(riemann_mixed: &DenseTensor, metric_inverse: &DenseTensor, q: usize) -> Result<DenseTensor> {
    check_mixed_riemann(riemann_mixed)?;
    let n = riemann_mixed.dim();
    if q == 0 {
        return Err(Error::Domain("P_(q) is defined for q >= 1".into()));
    }
    check_order(n, q)?;
    let eng = AntisymContraction::new(n, riemann_mixed.components(), q - 1, None)?;
    let norm = 1.0 / f64::powi(2.0, q as i32);
    // Q^{ij}_{cd} = 2^{-q} δ^{ij a…}_{cd b…} Π R; moving the free pair to the front is an even permutation.
    let mut qt = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for c in 0..n {
                for d in 0..n {
                    if c == d {
                        continue;
                    }
                    qt[((i * n + j) * n + c) * n + d] = norm * eng.eval(&[i, j], &[c, d]);
                }
            }
        }
    }
    let gi = metric_inverse;
    // Raise c then d.
    let mut half = vec![0.0; n.pow(4)];
    for ij in 0..n * n {
        for k in 0..n {
            for d in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += qt[(ij * n + c) * n + d] * gi.at2(c, k);
                }
                half[(ij * n + k) * n + d] = acc;
            }
        }
    }
    let mut p = vec![0.0; n.pow(4)];
    for ijk in 0..n * n * n {
        for l in 0..n {
            let mut acc = 0.0;
            for d in 0..n {
                acc += half[ijk * n + d] * gi.at2(d, l);
            }
            p[ijk * n + l] = acc;
        }
    }
    DenseTensor::new(n, vec![Slot::Upper; 4], p, Symmetry::Riemann4)
}

/// `G_(q)ij = −2^{-(q+1)} g_ik δ^{k b…}_{j a…} Π R_{b b}^{a a}`; `G_(0) = −½ g`.
pub fn lovelock_tensor(riemann_mixed: &DenseTensor, metric: &DenseTensor, q: usize) -> Result<DenseTensor> {
    check_mixed_riemann(riemann_mixed)?;
    let n = riemann_mixed.dim();
    check_order(n, q)?;
    let eng = AntisymContraction::new(n, riemann_mixed.components(), q, None)?;
    let mut mixed = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            mixed[k * n + j] = eng.eval(&[k], &[j]);
        }
    }
    let norm = -1.0 / f64::powi(2.0, q as i32 + 1);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += metric.at2(i, k) * mixed[k * n + j];
            }
            g[i * n + j] = norm * acc;
        }
    }
    DenseTensor::new(n, vec![Slot::Lower; 2], g, Symmetry::Symmetric2)
}
