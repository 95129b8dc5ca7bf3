//! Statistical estimators applied to simulated or external paths: Hill tail
//! index, empirical conditional distributions, the conditional scaling
//! exponent regression, and conditional tail expectations.
//!
//! Estimators that only look above a high threshold run on a [`TailView`]:
//! the top rows of a block ordered by `X_0` (or by the product `X_0 X_h`).
//! A tail view can be built from a materialized block or streamed out of
//! chunked simulation, in which case results are identical to the full-block
//! computation while memory stays bounded by the kept tail.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{simulate_rows_range, ModelSpec, PathBlock};
use crate::randomness::RandomStream;

/// Conventional bias/variance compromise for the Hill order-statistic
/// count: `floor(2 n^0.6)` capped at `n/10`.
pub fn default_hill_k(n: usize) -> usize {
    let k = (2.0 * (n as f64).powf(0.6)).floor() as usize;
    k.clamp(1, (n / 10).max(1))
}

/// Hill estimator over the values sorted in descending order:
/// `k / sum_{i<=k} ln(X_(i) / X_(k+1))`.
pub fn hill_sorted_desc(sorted_desc: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k + 1 > sorted_desc.len() {
        return Err(Error::Estimation(format!(
            "hill needs 1 <= k < sample size, got k = {k} with {} values",
            sorted_desc.len()
        )));
    }
    let x_k1 = sorted_desc[k];
    if x_k1 <= 0.0 {
        return Err(Error::Estimation("hill needs positive order statistics".into()));
    }
    let sum_log: f64 = sorted_desc[..k].iter().map(|&x| (x / x_k1).ln()).sum();
    if sum_log <= 0.0 {
        return Err(Error::Estimation("ties at the threshold order statistic".into()));
    }
    Ok(k as f64 / sum_log)
}

/// Hill estimator on an unsorted sample of positive values.
pub fn hill(sample: &[f64], k: usize) -> Result<f64> {
    let mut v: Vec<f64> = sample.to_vec();
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Estimation("hill needs positive values".into()));
    }
    v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    hill_sorted_desc(&v, k)
}

/// Asymptotic standard error of the Hill estimate.
pub fn hill_se(alpha_hat: f64, k: usize) -> f64 {
    alpha_hat / (k as f64).sqrt()
}

/// Scaling functions applied to the lagged coordinates of a conditional
/// sample. Pure powers by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scaling {
    /// `b_j(x) = 1` for all lags.
    Unit,
    /// `b_j(x) = x^{kappa_j}` with one exponent per lag.
    Power { kappas: Vec<f64> },
}

impl Scaling {
    /// Scaling for a model's theoretical exponents.
    pub fn for_model(spec: &ModelSpec, h: usize) -> Result<Scaling> {
        let kappas = spec
            .kappa_vector(h)
            .ok_or_else(|| Error::Unsupported("no scaling exponents for this family".into()))?;
        Ok(Scaling::Power { kappas })
    }

    /// `b_lag(x)` for a 1-based lag.
    pub fn b(&self, lag: usize, x: f64) -> f64 {
        match self {
            Scaling::Unit => 1.0,
            Scaling::Power { kappas } => x.powf(kappas[lag - 1]),
        }
    }
}

/// Rows conditioned on `X_0` exceeding a threshold, rescaled to
/// `(X_0/x, X_1/b_1(x), ..., X_h/b_h(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSample {
    pub threshold: f64,
    pub quantile_level: Option<f64>,
    pub h: usize,
    pub count: usize,
    rows: Vec<f64>,
}

impl ConditionalSample {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.h + 1)
    }

    /// All values of one rescaled coordinate.
    pub fn coordinate(&self, coord: usize) -> Vec<f64> {
        assert!(coord <= self.h);
        self.rows().map(|r| r[coord]).collect()
    }
}

/// 1-based ascending order-statistic position of the level-`q` empirical
/// quantile, with a guard against float noise at exact multiples.
pub(crate) fn quantile_position(n: u64, q: f64) -> u64 {
    assert!(n > 0 && q > 0.0 && q < 1.0);
    let t = q * n as f64;
    let p = if (t - t.round()).abs() < 1e-9 { t.round() } else { t.ceil() } as u64;
    p.clamp(1, n)
}

/// The kept top of a sample: rows ordered by a key, descending, with total
/// counts remembered so empirical quantiles at high levels stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct TailView {
    pub n_total: u64,
    pub h: usize,
    pub saturation: u64,
    /// Sort keys, descending.
    keys: Vec<f64>,
    /// Row data aligned with `keys`, `h+1` wide.
    rows: Vec<f64>,
}

/// Sort key of the streaming tail collector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailKey {
    /// Order by the conditioning coordinate.
    X0,
    /// Order by the product `X_0 * X_h`; feeds the product-tail Hill plot.
    ProductX0Xh,
}

impl TailKey {
    #[inline]
    fn of(&self, row: &[f64]) -> f64 {
        match self {
            TailKey::X0 => row[0],
            TailKey::ProductX0Xh => row[0] * row[row.len() - 1],
        }
    }
}

impl TailView {
    /// Full-block tail view (keeps every row).
    pub fn from_block(block: &PathBlock, key: TailKey) -> TailView {
        let w = block.width();
        let n = block.meta.n;
        let mut order: Vec<u32> = (0..n as u32).collect();
        let keyv: Vec<f64> = block.rows().map(|r| key.of(r)).collect();
        order.sort_unstable_by(|&a, &b| {
            keyv[b as usize].partial_cmp(&keyv[a as usize]).unwrap().then(a.cmp(&b))
        });
        let mut keys = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n * w);
        for &i in &order {
            keys.push(keyv[i as usize]);
            rows.extend_from_slice(block.row(i as usize));
        }
        TailView {
            n_total: n as u64,
            h: block.meta.h,
            saturation: block.meta.saturation,
            keys,
            rows,
        }
    }

    pub fn kept(&self) -> usize {
        self.keys.len()
    }

    pub fn key(&self, i: usize) -> f64 {
        self.keys[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.h + 1;
        &self.rows[i * w..(i + 1) * w]
    }

    /// Empirical level-`q` quantile of the key together with the exceedance
    /// count (values strictly above). Errors when the kept tail is too
    /// short to see the quantile.
    pub fn threshold_at(&self, q: f64) -> Result<(f64, usize)> {
        let p = quantile_position(self.n_total, q);
        let rank = (self.n_total - p + 1) as usize; // 1-based from the top
        if rank > self.kept() {
            return Err(Error::InsufficientExceedances(format!(
                "level {q} needs the top {rank} rows but only {} were kept",
                self.kept()
            )));
        }
        let x = self.keys[rank - 1];
        let count = self.keys[..rank - 1].iter().filter(|&&k| k > x).count();
        Ok((x, count))
    }

    /// Rescaled rows above the level-`q` quantile of the key.
    pub fn conditional_at(&self, q: f64, b: &Scaling) -> Result<ConditionalSample> {
        let (x, count) = self.threshold_at(q)?;
        let mut sample = self.conditional_at_threshold(x, b)?;
        debug_assert_eq!(sample.count, count);
        sample.quantile_level = Some(q);
        Ok(sample)
    }

    /// Rescaled rows above a fixed threshold (which must lie within the
    /// kept tail when the view is truncated).
    pub fn conditional_at_threshold(&self, x: f64, b: &Scaling) -> Result<ConditionalSample> {
        if (self.kept() as u64) < self.n_total && self.keys.last().map_or(true, |&k| k > x) {
            return Err(Error::InsufficientExceedances(format!(
                "threshold {x} below the kept tail"
            )));
        }
        let count = self.keys.iter().take_while(|&&k| k > x).count();
        if count == 0 {
            return Err(Error::InsufficientExceedances(format!("no rows above {x}")));
        }
        let w = self.h + 1;
        let mut rows = Vec::with_capacity(count * w);
        for i in 0..count {
            let r = self.row(i);
            rows.push(r[0] / x);
            for lag in 1..=self.h {
                rows.push(r[lag] / b.b(lag, x));
            }
        }
        Ok(ConditionalSample { threshold: x, quantile_level: None, h: self.h, count, rows })
    }
}

/// Fixed subchunk of the streaming collector.
const SUBCHUNK: u64 = 1 << 15;
/// Subchunks per sequential merge round.
const SUBCHUNKS_PER_ROUND: u64 = 64;

/// Simulates `n` replicates of a model and keeps the top `keep` rows by the
/// key, plus the saturation count. Identical to sorting a full block and
/// truncating, for any thread count, but bounded in memory.
pub fn collect_tail_view(
    spec: &ModelSpec,
    h: usize,
    n: u64,
    keep: usize,
    key: TailKey,
    stream: &RandomStream,
) -> Result<TailView> {
    spec.validate()?;
    assert!(h >= 1 && n >= 1);
    let w = h + 1;
    let keep = keep.min(n as usize);
    let round = SUBCHUNK * SUBCHUNKS_PER_ROUND;
    // (key, replicate) pairs kept sorted descending by key, replicate
    // ascending as a total tie-break
    let mut top: Vec<(f64, u64)> = Vec::new();
    let mut top_rows: Vec<f64> = Vec::new();
    let mut saturation = 0u64;
    let mut round_lo = 0u64;
    while round_lo < n {
        let round_hi = (round_lo + round).min(n);
        let parts: Vec<(Vec<(f64, u64)>, Vec<f64>, u64)> = (0..(round_hi - round_lo)
            .div_ceil(SUBCHUNK))
            .into_par_iter()
            .map(|ci| {
                let lo = round_lo + ci * SUBCHUNK;
                let hi = (lo + SUBCHUNK).min(round_hi);
                let (data, sat) = simulate_rows_range(spec, h, lo, hi, stream);
                let keys: Vec<f64> = data.chunks(w).map(|r| key.of(r)).collect();
                let mut idx: Vec<u32> = (0..(hi - lo) as u32).collect();
                idx.sort_unstable_by(|&a, &b| {
                    keys[b as usize].partial_cmp(&keys[a as usize]).unwrap().then(a.cmp(&b))
                });
                idx.truncate(keep);
                let mut part_keys = Vec::with_capacity(idx.len());
                let mut part_rows = Vec::with_capacity(idx.len() * w);
                for &i in &idx {
                    part_keys.push((keys[i as usize], lo + i as u64));
                    part_rows.extend_from_slice(&data[i as usize * w..(i as usize + 1) * w]);
                }
                (part_keys, part_rows, sat)
            })
            .collect();
        for (part_keys, part_rows, sat) in parts {
            saturation += sat;
            top.extend(part_keys);
            top_rows.extend(part_rows);
        }
        let mut order: Vec<u32> = (0..top.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let (ka, ra) = top[a as usize];
            let (kb, rb) = top[b as usize];
            kb.partial_cmp(&ka).unwrap().then(ra.cmp(&rb))
        });
        order.truncate(keep);
        let mut new_top = Vec::with_capacity(order.len());
        let mut new_rows = Vec::with_capacity(order.len() * w);
        for &i in &order {
            new_top.push(top[i as usize]);
            new_rows.extend_from_slice(&top_rows[i as usize * w..(i as usize + 1) * w]);
        }
        top = new_top;
        top_rows = new_rows;
        round_lo = round_hi;
    }
    Ok(TailView {
        n_total: n,
        h,
        saturation,
        keys: top.iter().map(|t| t.0).collect(),
        rows: top_rows,
    })
}

/// Rows needed to resolve quantile level `q` and everything above it.
pub fn keep_for_level(n: u64, q: f64) -> usize {
    (n - quantile_position(n, q) + 1) as usize
}

/// Conditional sample of a block at quantile level `q` of `X_0`.
pub fn conditional_sample(block: &PathBlock, q: f64, b: &Scaling) -> Result<ConditionalSample> {
    TailView::from_block(block, TailKey::X0).conditional_at(q, b)
}

/// Conditional sample of a block above a fixed threshold.
pub fn conditional_sample_at_threshold(
    block: &PathBlock,
    x: f64,
    b: &Scaling,
) -> Result<ConditionalSample> {
    TailView::from_block(block, TailKey::X0).conditional_at_threshold(x, b)
}

/// Right-continuous empirical CDF of one conditional coordinate.
pub fn empirical_cdf(cond: &ConditionalSample, coord: usize, y: f64) -> f64 {
    assert!(coord <= cond.h);
    let hits = cond.rows().filter(|r| r[coord] <= y).count();
    hits as f64 / cond.count as f64
}

/// One grid level of the scaling-exponent regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaLevel {
    pub q: f64,
    pub threshold: f64,
    pub median: f64,
    pub exceedances: usize,
}

/// Least-squares fit of the conditional scaling exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    pub kappa: f64,
    pub std_error: f64,
    pub levels: Vec<KappaLevel>,
}

/// Minimum exceedances demanded of every regression level.
pub const KAPPA_MIN_EXCEEDANCES: usize = 200;

/// Estimates the lag-`h` conditional scaling exponent: for each level the
/// conditional median of `X_h` (or `|X_h|` when `use_abs`) above the
/// threshold, then the slope of log-median against log-threshold.
///
/// Medians rather than means: they exist without moment conditions and are
/// robust to the heavy conditional tails of these families.
pub fn kappa_hat_from_tail(
    tail: &TailView,
    h: usize,
    grid: &[f64],
    use_abs: bool,
) -> Result<KappaFit> {
    assert!(h >= 1 && h <= tail.h);
    if grid.len() < 3 {
        return Err(Error::Estimation("kappa regression needs at least 3 levels".into()));
    }
    let mut levels = Vec::with_capacity(grid.len());
    for &q in grid {
        let (x, count) = tail.threshold_at(q)?;
        if count < KAPPA_MIN_EXCEEDANCES {
            return Err(Error::InsufficientExceedances(format!(
                "level {q} has {count} exceedances, need {KAPPA_MIN_EXCEEDANCES}"
            )));
        }
        let mut vals: Vec<f64> = (0..count)
            .map(|i| {
                let v = tail.row(i)[h];
                if use_abs {
                    v.abs()
                } else {
                    v
                }
            })
            .collect();
        vals.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let median = vals[(count - 1) / 2]; // lower median, no averaging
        if !(median > 0.0) {
            return Err(Error::Estimation(format!(
                "nonpositive conditional median {median} at level {q}; the exponent \
                 regression is undefined"
            )));
        }
        levels.push(KappaLevel { q, threshold: x, median, exceedances: count });
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.threshold.ln(), l.median.ln())).collect();
    let (slope, se) = least_squares(&pts);
    Ok(KappaFit { kappa: slope, std_error: se, levels })
}

/// Block-input form of the exponent regression.
pub fn kappa_hat(block: &PathBlock, h: usize, grid: &[f64], use_abs: bool) -> Result<KappaFit> {
    kappa_hat_from_tail(&TailView::from_block(block, TailKey::X0), h, grid, use_abs)
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let dof = (pts.len().max(3) - 2) as f64;
    (slope, (rss / dof / sxx).sqrt())
}

/// `m_hat`: mean positive part of the lag-`h` rescaled coordinate of a
/// conditional sample; the empirical counterpart of the limiting moment.
pub fn m_hat(cond: &ConditionalSample, h: usize) -> Result<f64> {
    assert!(h <= cond.h);
    if cond.count == 0 {
        return Err(Error::InsufficientExceedances("empty conditional sample".into()));
    }
    Ok(cond.rows().map(|r| r[h].max(0.0)).sum::<f64>() / cond.count as f64)
}

/// Minimum exceedances demanded of the empirical conditional tail
/// expectation.
pub const CTE_MIN_EXCEEDANCES: usize = 200;

/// Empirical `E[(X_h)_+ | X_0 > x]` on the raw (unrescaled) rows.
pub fn cte_plus_hat(tail: &TailView, h: usize, x: f64) -> Result<f64> {
    assert!(h >= 1 && h <= tail.h);
    let cond = tail.conditional_at_threshold(x, &Scaling::Unit)?;
    if cond.count < CTE_MIN_EXCEEDANCES {
        return Err(Error::InsufficientExceedances(format!(
            "{} exceedances above {x}, need {CTE_MIN_EXCEEDANCES}",
            cond.count
        )));
    }
    // Unit scaling leaves coordinate h raw
    Ok(cond.rows().map(|r| r[h].max(0.0)).sum::<f64>() / cond.count as f64)
}

/// Semiparametric conditional tail expectation `x^{kappa_hat} m_hat`,
/// extrapolating the fit beyond the range of the data.
pub fn cte_semiparametric(x: f64, kappa_hat: f64, m_hat: f64) -> f64 {
    x.powf(kappa_hat) * m_hat
}

/// Point estimate with provenance, the JSON-facing estimator output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub provenance: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hill_small_example_is_exact() {
        // mean log-excess over the third largest of {16,8,4} is 1.5 ln 2
        let a = hill(&[1.0, 2.0, 4.0, 8.0, 16.0], 2).unwrap();
        assert_relative_eq!(a, 1.0 / (1.5 * 2.0f64.ln()), max_relative = 1e-12);
        assert_relative_eq!(a, 0.961_796_693_925_976, max_relative = 1e-10);
    }

    #[test]
    fn hill_rejects_bad_inputs() {
        assert!(hill(&[1.0, 2.0], 2).is_err());
        assert!(hill(&[0.0, 2.0, 3.0], 1).is_err());
        assert!(hill(&[-1.0, 2.0, 3.0], 1).is_err());
    }

    #[test]
    fn hill_recovers_pareto_index() {
        let law = crate::randomness::ParetoLaw::standard(2.0);
        let s = RandomStream::new(42, 0);
        let sample: Vec<f64> =
            (0..1_000_000u64).map(|i| law.quantile_unchecked(s.at(i))).collect();
        let a = hill(&sample, 2000).unwrap();
        assert!((1.9..=2.1).contains(&a), "hill gave {a}");
    }

    proptest! {
        #[test]
        fn hill_is_scale_equivariant(
            xs in proptest::collection::vec(0.01f64..1e6, 12..60),
            c in 0.001f64..1e3,
        ) {
            let k = xs.len() / 3;
            let base = hill(&xs, k);
            let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
            let shifted = hill(&scaled, k);
            match (base, shifted) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0)),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "{other:?}"),
            }
        }

        #[test]
        fn conditional_exceedances_shrink_with_level(
            n in 500usize..4000,
            seed in 0u64..1000,
        ) {
            let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
            let s = RandomStream::new(seed, 0);
            let block = crate::models::simulate_block(&spec, 1, n, &s).unwrap();
            let tail = TailView::from_block(&block, TailKey::X0);
            let mut last = usize::MAX;
            for q in [0.5, 0.7, 0.9, 0.97] {
                let (_, count) = tail.threshold_at(q).unwrap();
                prop_assert!(count <= last);
                last = count;
            }
        }
    }

    fn toy_block(rows: &[[f64; 2]]) -> PathBlock {
        PathBlock::from_rows(1, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn conditional_sample_fixed_threshold_example() {
        let block = toy_block(&[[10.0, 2.0], [20.0, 3.0], [5.0, 1.0]]);
        let b = Scaling::Power { kappas: vec![0.5] };
        let cond = conditional_sample_at_threshold(&block, 8.0, &b).unwrap();
        assert_eq!(cond.count, 2);
        let mut second: Vec<f64> = cond.coordinate(1);
        second.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(second[0], 2.0 / 8.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(second[1], 3.0 / 8.0f64.sqrt(), max_relative = 1e-12);
        for r in cond.rows() {
            assert!(r[0] > 1.0);
        }
    }

    #[test]
    fn unit_scaling_leaves_coordinates_raw() {
        let block = toy_block(&[[10.0, 2.0], [20.0, 3.0], [5.0, 1.0]]);
        let cond = conditional_sample_at_threshold(&block, 8.0, &Scaling::Unit).unwrap();
        let mut second = cond.coordinate(1);
        second.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(second, vec![2.0, 3.0]);
    }

    #[test]
    fn quantile_level_exceedance_count() {
        // a continuous synthetic column: q = 0.999 on 10^6 rows leaves 1000
        let n = 1_000_000usize;
        let law = crate::randomness::ParetoLaw::standard(1.0);
        let s = RandomStream::new(3, 0);
        let data: Vec<f64> =
            (0..n as u64).flat_map(|i| [law.quantile_unchecked(s.at(i)), 1.0]).collect();
        let block = PathBlock::from_rows(1, data).unwrap();
        let cond = conditional_sample(&block, 0.999, &Scaling::Unit).unwrap();
        assert_eq!(cond.count, 1000);
    }

    #[test]
    fn empirical_cdf_edges_and_midpoint() {
        let block = toy_block(&[[10.0, 2.0], [20.0, 3.0], [5.0, 1.0]]);
        let b = Scaling::Power { kappas: vec![0.5] };
        let cond = conditional_sample_at_threshold(&block, 8.0, &b).unwrap();
        assert_eq!(empirical_cdf(&cond, 1, 0.0), 0.0);
        assert_eq!(empirical_cdf(&cond, 1, 100.0), 1.0);
        // 2/sqrt(8) = 0.707 <= 1 < 3/sqrt(8) = 1.06
        assert_eq!(empirical_cdf(&cond, 1, 1.0), 0.5);
    }

    #[test]
    fn empirical_cdf_is_monotone_with_limits() {
        let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
        let s = RandomStream::new(5, 0);
        let block = crate::models::simulate_block(&spec, 1, 20_000, &s).unwrap();
        let cond =
            conditional_sample(&block, 0.95, &Scaling::Power { kappas: vec![0.5] }).unwrap();
        let mut last = 0.0;
        for y in [-1.0, 0.0, 0.3, 0.7, 1.0, 2.0, 5.0, 100.0] {
            let v = empirical_cdf(&cond, 1, y);
            assert!(v >= last);
            last = v;
        }
    }

    /// Exact Pareto(1) order-statistic column: the j-th largest value is
    /// n/j, so thresholds and lower medians at odd exceedance counts are
    /// exact powers and the regression input is exactly collinear.
    #[test]
    fn kappa_hat_is_exact_on_pure_power_rows() {
        let n = 100_000usize;
        let mut data = Vec::with_capacity(n * 2);
        for r in 0..n {
            let x0 = n as f64 / (n - r) as f64;
            data.push(x0);
            data.push(x0.sqrt());
        }
        let block = PathBlock::from_rows(1, data).unwrap();
        // levels with odd exceedance counts (9999, 4999, 1999)
        let grid: Vec<f64> =
            [9999u64, 4999, 1999].iter().map(|&k| 1.0 - k as f64 / n as f64).collect();
        let fit = kappa_hat(&block, 1, &grid, false).unwrap();
        assert!((fit.kappa - 0.5).abs() < 1e-10, "kappa {}", fit.kappa);
        for l in &fit.levels {
            assert_relative_eq!(
                l.median,
                2.0f64.sqrt() * l.threshold.sqrt(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn kappa_hat_on_independent_coordinates_is_near_zero() {
        let n = 1_000_000usize;
        let law = crate::randomness::ParetoLaw::standard(2.0);
        let s = RandomStream::new(42, 0);
        let data: Vec<f64> = (0..n as u64)
            .flat_map(|i| {
                [law.quantile_unchecked(s.at(2 * i)), law.quantile_unchecked(s.at(2 * i + 1))]
            })
            .collect();
        let block = PathBlock::from_rows(1, data).unwrap();
        let fit = kappa_hat(&block, 1, &[0.99, 0.995, 0.999], false).unwrap();
        assert!(fit.kappa.abs() < 0.05, "kappa {}", fit.kappa);
    }

    #[test]
    fn kappa_hat_errors_are_reported() {
        let block = toy_block(&[[10.0, 2.0], [20.0, 3.0], [5.0, 1.0]]);
        assert!(kappa_hat(&block, 1, &[0.5, 0.9], false).is_err()); // < 3 levels
        assert!(kappa_hat(&block, 1, &[0.2, 0.5, 0.8], false).is_err()); // starved
        // nonpositive medians: all lagged values negative
        let n = 2_000usize;
        let data: Vec<f64> = (0..n).flat_map(|i| [1.0 + i as f64, -1.0]).collect();
        let neg = PathBlock::from_rows(1, data).unwrap();
        let err = kappa_hat(&neg, 1, &[0.5, 0.6, 0.7], false);
        assert!(matches!(err, Err(Error::Estimation(_))), "{err:?}");
    }

    #[test]
    fn cte_arithmetic() {
        assert_relative_eq!(cte_semiparametric(100.0, 0.5, 2.0), 20.0, max_relative = 1e-12);
        // degenerate lagged coordinate: m_hat equals the constant
        let rows: Vec<[f64; 2]> = (0..500).map(|i| [10.0 + i as f64, 3.0]).collect();
        let block = toy_block(&rows);
        let cond = conditional_sample_at_threshold(&block, 20.0, &Scaling::Unit).unwrap();
        assert_relative_eq!(m_hat(&cond, 1).unwrap(), 3.0, max_relative = 1e-12);
        let tail = TailView::from_block(&block, TailKey::X0);
        assert_relative_eq!(cte_plus_hat(&tail, 1, 20.0).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn streamed_tail_equals_block_tail() {
        let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
        let s = RandomStream::new(42, 0);
        let n = 150_000u64;
        let block = crate::models::simulate_block(&spec, 2, n as usize, &s).unwrap();
        let full = TailView::from_block(&block, TailKey::X0);
        let streamed = collect_tail_view(&spec, 2, n, 500, TailKey::X0, &s).unwrap();
        assert_eq!(streamed.kept(), 500);
        for i in 0..500 {
            assert_eq!(streamed.key(i), full.key(i));
            assert_eq!(streamed.row(i), full.row(i));
        }
        let (xa, ca) = full.threshold_at(0.999).unwrap();
        let (xb, cb) = streamed.threshold_at(0.999).unwrap();
        assert_eq!(xa, xb);
        assert_eq!(ca, cb);
    }

    #[test]
    fn streamed_product_tail_matches_block() {
        let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
        let s = RandomStream::new(7, 0);
        let n = 80_000u64;
        let block = crate::models::simulate_block(&spec, 1, n as usize, &s).unwrap();
        let full = TailView::from_block(&block, TailKey::ProductX0Xh);
        let streamed = collect_tail_view(&spec, 1, n, 300, TailKey::ProductX0Xh, &s).unwrap();
        for i in 0..300 {
            assert_eq!(streamed.key(i), full.key(i));
        }
    }

    #[test]
    fn tail_view_is_thread_count_invariant() {
        let spec = ModelSpec::SvLeverage { z_alpha: 2.0, coeffs: vec![0.6, 0.2] };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                collect_tail_view(
                    &spec,
                    2,
                    200_000,
                    1000,
                    TailKey::X0,
                    &RandomStream::new(42, 0),
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn default_hill_k_respects_caps() {
        assert_eq!(default_hill_k(1_000_000), 7962); // floor(2e6^0.6)
        assert_eq!(default_hill_k(100), 10); // n/10 cap
        assert!(default_hill_k(5) >= 1);
    }
}
