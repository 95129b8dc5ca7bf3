//! Kolmogorov-Smirnov distances between empirical and theoretical laws.

/// One-sample KS distance: the sup over the empirical jump points of
/// `|F_emp - F|`, checking both sides of each jump.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Two-sample KS distance; sample sizes may differ.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{ParetoLaw, RandomStream};

    #[test]
    fn identical_samples_have_zero_distance() {
        let xs = [0.3, 1.0, 2.5, 4.0];
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    }

    #[test]
    fn disjoint_point_masses_have_distance_one() {
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn one_sample_against_own_cdf_is_small() {
        let law = ParetoLaw::standard(2.0);
        let s = RandomStream::new(42, 0);
        let xs: Vec<f64> = (0..10_000u64).map(|i| law.quantile_unchecked(s.at(i))).collect();
        let d = ks_one_sample(&xs, |x| 1.0 - law.survival(x));
        // 99% quantile of the one-sample statistic is about 1.63/sqrt(n)
        assert!(d < 0.0163, "d = {d}");
    }

    #[test]
    fn two_independent_samples_from_one_law_are_close() {
        let law = ParetoLaw::standard(1.5);
        let s = RandomStream::new(42, 0);
        let xs: Vec<f64> = (0..10_000u64).map(|i| law.quantile_unchecked(s.at(i))).collect();
        let ys: Vec<f64> =
            (0..10_000u64).map(|i| law.quantile_unchecked(s.substream(1).at(i))).collect();
        let d = ks_two_sample(&xs, &ys);
        assert!(d <= 0.04, "d = {d}");
    }

    #[test]
    fn one_sample_detects_wrong_law() {
        let law = ParetoLaw::standard(2.0);
        let s = RandomStream::new(1, 0);
        let xs: Vec<f64> = (0..5_000u64).map(|i| law.quantile_unchecked(s.at(i))).collect();
        let wrong = ParetoLaw::standard(1.0);
        let d = ks_one_sample(&xs, |x| 1.0 - wrong.survival(x));
        assert!(d > 0.1, "d = {d}");
    }
}
