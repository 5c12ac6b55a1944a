//! Compensated summation and an order-stable parallel map-reduce.
//!
//! Node evaluations run on the rayon pool, but the reduction is always a
//! sequential Neumaier sum over the results in input order, so totals are
//! bit-identical for any thread count.

use rayon::prelude::*;

/// Running Neumaier (improved Kahan) sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().total()
}

/// Evaluates `f` on every item in parallel and returns the values in input order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Parallel evaluation of `K` weighted channels, reduced deterministically.
pub fn par_weighted_sums<T, F, const K: usize>(items: &[T], weight: impl Fn(&T) -> f64 + Sync, f: F) -> [f64; K]
where
    T: Sync,
    F: Fn(&T) -> [f64; K] + Sync + Send,
{
    let values = par_map(items, |it| {
        let w = weight(it);
        let mut v = f(it);
        for x in v.iter_mut() {
            *x *= w;
        }
        v
    });
    let mut acc = [NeumaierSum::new(); K];
    for v in &values {
        for (a, x) in acc.iter_mut().zip(v) {
            a.add(*x);
        }
    }
    acc.map(|a| a.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
        let naive: f64 = v.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn parallel_reduction_is_thread_count_independent() {
        let items: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.37).sin() * 1e3).collect();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| par_weighted_sums(&items, |_| 1.0, |x| [*x, x * x]))
        };
        let a = run(1);
        let b = run(4);
        let c = run(7);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
