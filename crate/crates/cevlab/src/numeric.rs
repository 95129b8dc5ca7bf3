//! Parallel reductions with a worker-independent float reduction tree.
//!
//! Rayon's own `sum` would fold partial results in whatever order threads
//! finish, which changes the last bits of a float sum from run to run. Here
//! every sum is taken over fixed index chunks whose partials are combined in
//! chunk order, so results are identical at any `--threads` setting.

use rayon::prelude::*;

/// Index chunk used by deterministic reductions.
pub(crate) const SUM_CHUNK: u64 = 1 << 16;

/// Sums `K` accumulators over `0..n` split into fixed chunks. `f(lo, hi)`
/// must compute its partials by iterating `lo..hi` in order.
pub(crate) fn chunked_sums<const K: usize>(
    n: u64,
    f: impl Fn(u64, u64) -> [f64; K] + Sync,
) -> [f64; K] {
    let n_chunks = n.div_ceil(SUM_CHUNK);
    let partials: Vec<[f64; K]> = (0..n_chunks)
        .into_par_iter()
        .map(|c| f(c * SUM_CHUNK, ((c + 1) * SUM_CHUNK).min(n)))
        .collect();
    let mut acc = [0.0; K];
    for p in partials {
        for k in 0..K {
            acc[k] += p[k];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slow_mean(n: u64) -> f64 {
        let [s] = chunked_sums(n, |lo, hi| {
            [(lo..hi).map(|i| ((i as f64) * 0.1).sin()).sum()]
        });
        s / n as f64
    }

    #[test]
    fn chunked_sum_is_thread_count_invariant() {
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| slow_mean(1_000_000));
        let b = pool4.install(|| slow_mean(1_000_000));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
