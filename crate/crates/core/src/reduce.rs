//! Deterministic parallel reductions.
//!
//! Floating-point addition is not associative, so a naive parallel sum gives
//! results that depend on the worker count. Here the index space is split
//! into chunks of a fixed size, partial sums are computed in parallel, and
//! the partials are combined sequentially in chunk order. The result is
//! bit-identical for any thread count, including one. Accumulation uses
//! Neumaier compensation.

use rayon::prelude::*;

const CHUNK: usize = 1024;

/// Compensated (Neumaier) accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Compensated { sum: 0.0, comp: 0.0 }
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

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum `term(i)` for `i in 0..len` with a fixed, thread-count-independent
/// reduction order.
pub fn det_sum<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if len == 0 {
        return 0.0;
    }
    let chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = ((c + 1) * CHUNK).min(len);
            let mut acc = Compensated::new();
            for i in start..end {
                acc.add(term(i));
            }
            acc.total()
        })
        .collect();
    let mut acc = Compensated::new();
    for p in partials {
        acc.add(p);
    }
    acc.total()
}

/// Maximum of `term(i)` for `i in 0..len`; `f64::NEG_INFINITY` when empty.
pub fn det_max<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if len == 0 {
        return f64::NEG_INFINITY;
    }
    let chunks = len.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = ((c + 1) * CHUNK).min(len);
            let mut m = f64::NEG_INFINITY;
            for i in start..end {
                m = m.max(term(i));
            }
            m
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_sequential_reference() {
        let data: Vec<f64> =
            (0..10_000u64).map(|i| ((i * 2654435761) % 1000) as f64 * 1e-3).collect();
        let got = det_sum(data.len(), |i| data[i]);
        let mut acc = Compensated::new();
        for &v in &data {
            acc.add(v);
        }
        // chunked compensated vs flat compensated agree to one ulp-ish
        assert!((got - acc.total()).abs() <= 1e-9 * acc.total().abs());
    }

    #[test]
    fn identical_across_thread_counts() {
        let data: Vec<f64> = (0..50_000).map(|i| (i as f64).sin() * 1e3).collect();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| det_sum(data.len(), |i| data[i]))
        };
        let s1 = run(1);
        let s4 = run(4);
        assert_eq!(s1.to_bits(), s4.to_bits());
        let m1 = {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            pool.install(|| det_max(data.len(), |i| data[i]))
        };
        let m3 = {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
            pool.install(|| det_max(data.len(), |i| data[i]))
        };
        assert_eq!(m1.to_bits(), m3.to_bits());
    }

    #[test]
    fn compensation_beats_naive_summation() {
        // [1e16, 1.0, -1e16] repeated within one chunk: naive summation
        // loses every 1.0, the compensated accumulator keeps them all
        let n = 999;
        let term = |i: usize| match i % 3 {
            0 => 1e16,
            1 => 1.0,
            _ => -1e16,
        };
        let naive: f64 = (0..n).map(term).sum();
        assert_ne!(naive, n as f64 / 3.0);
        assert_eq!(det_sum(n, term), n as f64 / 3.0);
    }

    #[test]
    fn empty_ranges() {
        assert_eq!(det_sum(0, |_| 1.0), 0.0);
        assert_eq!(det_max(0, |_| 1.0), f64::NEG_INFINITY);
    }
}
