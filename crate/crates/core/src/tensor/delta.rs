use crate::error::{Error, Result};

/// Longest index string the contraction engine handles (free + contracted).
const MAX_STRING: usize = 20;

/// An ordered index string with entries in `[0, dim)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex {
    dim: usize,
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>, dim: usize) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&e| e >= dim) {
            return Err(Error::Contract(format!("index {bad} out of range for dimension {dim}")));
        }
        Ok(MultiIndex { dim, entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Sign of the permutation taking `upper` to `lower`, or 0 if `upper` repeats
/// an entry or `lower` is not a rearrangement of it.
pub(crate) fn permutation_sign(upper: &[usize], lower: &[usize]) -> f64 {
    let p = upper.len();
    debug_assert_eq!(p, lower.len());
    let mut pos = [0usize; MAX_STRING];
    let mut seen: u64 = 0;
    for (k, &l) in lower.iter().enumerate() {
        let bit = 1u64 << l;
        if seen & bit != 0 {
            return 0.0;
        }
        seen |= bit;
        match upper.iter().position(|&u| u == l) {
            Some(at) => pos[k] = at,
            None => return 0.0,
        }
    }
    let mut inversions = 0usize;
    for i in 0..p {
        for j in (i + 1)..p {
            if pos[i] > pos[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `δ^{upper}_{lower}`: the determinant of the matrix `δ^{upper_i}_{lower_j}`.
pub fn generalized_delta(upper: &MultiIndex, lower: &MultiIndex) -> Result<f64> {
    if upper.len() != lower.len() {
        return Err(Error::Contract(format!(
            "generalized delta arity mismatch: {} upper vs {} lower",
            upper.len(),
            lower.len()
        )));
    }
    if upper.dim() != lower.dim() {
        return Err(Error::Contract("generalized delta dimension mismatch".into()));
    }
    if upper.len() > upper.dim() {
        return Ok(0.0);
    }
    Ok(permutation_sign(upper.entries(), lower.entries()))
}

/// Fully antisymmetrized contraction of `npairs` copies of a pair factor and
/// optionally one single factor against a generalized delta:
///
/// `Σ δ^{u a_1 … a_m}_{l b_1 … b_m} F(a_1 a_2; b_1 b_2) ⋯ F(a_{m-1} a_m; b_{m-1} b_m) [M(a_m; b_m)]`
///
/// with free strings `u`, `l`. The pair factor is stored as `F[lo1][lo2][up1][up2]`
/// (its lower slots are fed by the delta's upper string) and must be
/// antisymmetric in both pairs; the single factor is `M[lo][up]`.
///
/// Only strictly increasing pairs are visited and the `A`-side pairs are kept in
/// increasing order of their first entries; the skipped terms are recovered
/// by the factor `4^npairs · npairs!`.
pub struct AntisymContraction<'a> {
    n: usize,
    pair: &'a [f64],
    npairs: usize,
    single: Option<&'a [f64]>,
}

struct Walk<'s> {
    up: [usize; MAX_STRING],
    lo: [usize; MAX_STRING],
    free: usize,
    lo_mask: u64,
    acc: &'s mut f64,
}

impl<'a> AntisymContraction<'a> {
    pub fn new(n: usize, pair: &'a [f64], npairs: usize, single: Option<&'a [f64]>) -> Result<Self> {
        if npairs > 0 && pair.len() != n.pow(4) {
            return Err(Error::Contract("pair factor must have n^4 components".into()));
        }
        if let Some(s) = single {
            if s.len() != n * n {
                return Err(Error::Contract("single factor must have n^2 components".into()));
            }
        }
        if n > 60 {
            return Err(Error::Contract("dimension too large for the contraction engine".into()));
        }
        Ok(AntisymContraction { n, pair, npairs, single })
    }

    fn len_contracted(&self) -> usize {
        2 * self.npairs + usize::from(self.single.is_some())
    }

    pub fn eval(&self, free_up: &[usize], free_lo: &[usize]) -> f64 {
        let f = free_up.len();
        assert_eq!(f, free_lo.len(), "free index strings must have equal length");
        assert!(f + self.len_contracted() <= MAX_STRING, "index string too long");
        if f + self.len_contracted() > self.n {
            return 0.0;
        }
        let mut up_mask = 0u64;
        let mut lo_mask = 0u64;
        for (&u, &l) in free_up.iter().zip(free_lo) {
            if up_mask & (1 << u) != 0 || lo_mask & (1 << l) != 0 {
                return 0.0;
            }
            up_mask |= 1 << u;
            lo_mask |= 1 << l;
        }
        let mut acc = 0.0;
        let mut w = Walk {
            up: [0; MAX_STRING],
            lo: [0; MAX_STRING],
            free: f,
            lo_mask,
            acc: &mut acc,
        };
        w.up[..f].copy_from_slice(free_up);
        w.lo[..f].copy_from_slice(free_lo);
        self.pick_a(&mut w, 0, up_mask, 0);
        let mut mult = 1.0;
        for k in 1..=self.npairs {
            mult *= 4.0 * k as f64;
        }
        acc * mult
    }

    fn pick_a(&self, w: &mut Walk<'_>, s: usize, used: u64, min_first: usize) {
        let n = self.n;
        if s == self.npairs {
            if self.single.is_some() {
                let slot = w.free + 2 * self.npairs;
                for a in 0..n {
                    if used & (1 << a) == 0 {
                        w.up[slot] = a;
                        self.start_b(w, used | (1 << a));
                    }
                }
            } else {
                self.start_b(w, used);
            }
            return;
        }
        let slot = w.free + 2 * s;
        for a in min_first..n {
            if used & (1 << a) != 0 {
                continue;
            }
            for a2 in (a + 1)..n {
                if used & (1 << a2) != 0 {
                    continue;
                }
                w.up[slot] = a;
                w.up[slot + 1] = a2;
                self.pick_a(w, s + 1, used | (1 << a) | (1 << a2), a + 1);
            }
        }
    }

    fn start_b(&self, w: &mut Walk<'_>, set: u64) {
        if w.lo_mask & !set != 0 {
            return;
        }
        self.pick_b(w, 0, set & !w.lo_mask);
    }

    fn pick_b(&self, w: &mut Walk<'_>, s: usize, remaining: u64) {
        let n = self.n;
        if s == self.npairs {
            if self.single.is_some() {
                w.lo[w.free + 2 * self.npairs] = remaining.trailing_zeros() as usize;
            }
            self.term(w);
            return;
        }
        let slot = w.free + 2 * s;
        for b in 0..n {
            if remaining & (1 << b) == 0 {
                continue;
            }
            for b2 in (b + 1)..n {
                if remaining & (1 << b2) == 0 {
                    continue;
                }
                w.lo[slot] = b;
                w.lo[slot + 1] = b2;
                self.pick_b(w, s + 1, remaining & !(1 << b) & !(1 << b2));
            }
        }
    }

    #[inline]
    fn term(&self, w: &mut Walk<'_>) {
        let n = self.n;
        let len = w.free + self.len_contracted();
        let sign = permutation_sign(&w.up[..len], &w.lo[..len]);
        let mut prod = sign;
        for s in 0..self.npairs {
            let k = w.free + 2 * s;
            let (a, a2, b, b2) = (w.up[k], w.up[k + 1], w.lo[k], w.lo[k + 1]);
            prod *= self.pair[((a * n + a2) * n + b) * n + b2];
            if prod == 0.0 {
                return;
            }
        }
        if let Some(m) = self.single {
            let k = w.free + 2 * self.npairs;
            prod *= m[w.up[k] * n + w.lo[k]];
        }
        *w.acc += prod;
    }
}
