//! Dense tensors with declared index placement and symmetry, generalized
//! Kronecker deltas, and the antisymmetrized curvature contractions
//! (Gauss–Bonnet curvature, the `P` tensor and Lovelock tensors).

mod delta;
mod lovelock;

pub use delta::{generalized_delta, AntisymContraction, MultiIndex};
pub use lovelock::{gauss_bonnet_curvature, lovelock_tensor, p_tensor};

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance (against the largest component) for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Slot {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    None,
    /// `T[i,j] = T[j,i]`.
    Symmetric2,
    /// Antisymmetric in each index pair; pair exchange when both pairs share a placement.
    Riemann4,
}

/// Row-major dense array of `dim^rank` components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseTensor {
    dim: usize,
    slots: Vec<Slot>,
    components: Vec<f64>,
    symmetry: Symmetry,
}

impl DenseTensor {
    /// Builds a tensor and asserts the declared symmetry at [`SYMMETRY_TOL`].
    pub fn new(dim: usize, slots: Vec<Slot>, components: Vec<f64>, symmetry: Symmetry) -> Result<Self> {
        let t = Self::unchecked(dim, slots, components, symmetry)?;
        let r = t.symmetry_residual();
        if r > SYMMETRY_TOL {
            return Err(Error::Contract(format!(
                "components violate declared {:?} symmetry (relative residual {r:.3e})",
                symmetry
            )));
        }
        Ok(t)
    }

    /// Like [`DenseTensor::new`] but only checks shape; for deliberately broken debug data.
    pub fn unchecked(dim: usize, slots: Vec<Slot>, components: Vec<f64>, symmetry: Symmetry) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("tensor dimension must be positive".into()));
        }
        let expected = dim.pow(slots.len() as u32);
        if components.len() != expected {
            return Err(Error::Contract(format!(
                "expected {expected} components for rank {} in dimension {dim}, got {}",
                slots.len(),
                components.len()
            )));
        }
        let rank_ok = match symmetry {
            Symmetry::None => true,
            Symmetry::Symmetric2 => slots.len() == 2,
            Symmetry::Riemann4 => slots.len() == 4,
        };
        if !rank_ok {
            return Err(Error::Contract(format!("{symmetry:?} requires a different rank than {}", slots.len())));
        }
        Ok(DenseTensor {
            dim,
            slots,
            components,
            symmetry,
        })
    }

    pub fn zeros(dim: usize, slots: Vec<Slot>, symmetry: Symmetry) -> Self {
        let len = dim.pow(slots.len() as u32);
        DenseTensor {
            dim,
            slots,
            components: vec![0.0; len],
            symmetry,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.components[i * self.dim + j]
    }

    #[inline]
    pub fn at4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.components[((i * n + j) * n + k) * n + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> DenseTensor {
        let mut t = self.clone();
        t.components.iter_mut().for_each(|v| *v *= c);
        t
    }

    /// Largest violation of the declared symmetry, relative to the largest component.
    pub fn symmetry_residual(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.dim;
        let mut worst = 0.0f64;
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::Symmetric2 => {
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((self.at2(i, j) - self.at2(j, i)).abs());
                    }
                }
            }
            Symmetry::Riemann4 => {
                let exchange = self.slots[0] == self.slots[2] && self.slots[1] == self.slots[3];
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let v = self.at4(i, j, k, l);
                                worst = worst.max((v + self.at4(j, i, k, l)).abs());
                                worst = worst.max((v + self.at4(i, j, l, k)).abs());
                                if exchange {
                                    worst = worst.max((v - self.at4(k, l, i, j)).abs());
                                }
                            }
                        }
                    }
                }
            }
        }
        worst / scale
    }

    /// Contracts `slot` with `metric` (a rank-2 tensor) and flips its placement.
    ///
    /// Pass the inverse metric to raise a lower slot and the metric to lower an
    /// upper one; the caller is responsible for matching them.
    pub fn move_slot(&self, slot: usize, metric: &DenseTensor, to: Slot) -> Result<DenseTensor> {
        if metric.rank() != 2 || metric.dim() != self.dim || slot >= self.rank() {
            return Err(Error::Contract("move_slot: incompatible metric or slot".into()));
        }
        if self.slots[slot] == to {
            return Err(Error::Contract(format!("slot {slot} is already {to:?}")));
        }
        let n = self.dim;
        let r = self.rank();
        let stride = n.pow((r - slot - 1) as u32);
        let mut out = vec![0.0; self.components.len()];
        for (off, o) in out.iter_mut().enumerate() {
            let i = (off / stride) % n;
            let base = off - i * stride;
            let mut acc = 0.0;
            for k in 0..n {
                acc += metric.at2(i, k) * self.components[base + k * stride];
            }
            *o = acc;
        }
        let mut slots = self.slots.clone();
        slots[slot] = to;
        Ok(DenseTensor {
            dim: n,
            slots,
            components: out,
            symmetry: Symmetry::None,
        })
    }

    /// `g^{ij} T_ij` for a covariant rank-2 tensor.
    pub fn trace_with(&self, metric_inverse: &DenseTensor) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += metric_inverse.at2(i, j) * self.at2(i, j);
            }
        }
        acc
    }

    /// Largest componentwise difference relative to the larger operand.
    pub fn relative_distance(&self, other: &DenseTensor) -> f64 {
        let scale = self.max_abs().max(other.max_abs());
        if scale == 0.0 {
            return 0.0;
        }
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_asymmetry() {
        assert!(DenseTensor::new(3, vec![Slot::Lower; 2], vec![0.0; 8], Symmetry::None).is_err());
        let bad = vec![1.0, 2.0, 0.0, 1.0];
        assert!(DenseTensor::new(2, vec![Slot::Lower; 2], bad, Symmetry::Symmetric2).is_err());
        let good = vec![1.0, 2.0, 2.0, 1.0];
        assert!(DenseTensor::new(2, vec![Slot::Lower; 2], good, Symmetry::Symmetric2).is_ok());
    }

    #[test]
    fn raising_then_lowering_round_trips() {
        let g = DenseTensor::new(2, vec![Slot::Lower; 2], vec![2.0, 0.5, 0.5, 1.0], Symmetry::Symmetric2).unwrap();
        let det = 2.0 - 0.25;
        let ginv = DenseTensor::new(
            2,
            vec![Slot::Upper; 2],
            vec![1.0 / det, -0.5 / det, -0.5 / det, 2.0 / det],
            Symmetry::Symmetric2,
        )
        .unwrap();
        let t = DenseTensor::new(2, vec![Slot::Lower; 2], vec![1.0, -3.0, 4.0, 0.25], Symmetry::None).unwrap();
        let up = t.move_slot(1, &ginv, Slot::Upper).unwrap();
        let back = up.move_slot(1, &g, Slot::Lower).unwrap();
        assert!(back.relative_distance(&t) < 1e-15);
        assert!(up.move_slot(1, &g, Slot::Upper).is_err());
    }
}
