//! Experiment runners: each kind simulates, estimates, evaluates the
//! theoretical side, and scores distances against tolerances.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimate::{
    collect_tail_view, cte_plus_hat, cte_semiparametric, hill_se, hill_sorted_desc,
    kappa_hat_from_tail, keep_for_level, m_hat, quantile_position, ConditionalSample, Scaling,
    TailKey, TailView,
};
use crate::limits::{
    cond_moment_limit, expar1_limit_cdf, homogeneity_residual, product_tail_constant,
    EvalOptions, LimitCdf,
};
use crate::models::{CoeffRule, ModelSpec};
use crate::randomness::RandomStream;
use crate::stream_ids;
use crate::tailchain::{simulate_tail_chain, TailChainSpec};
use crate::verify::config::{ExperimentConfig, ExperimentKind};
use crate::verify::ks::{ks_one_sample, ks_two_sample};
use crate::verify::report::{Diagnostics, Distance, Estimate, Report, Target, Verdict};

/// Experiments refuse to pass when more than this fraction of simulated
/// values saturated the float range.
const MAX_SATURATION_FRACTION: f64 = 1e-6;

/// Conditioning below this many exceedances yields an inconclusive verdict
/// rather than a pass/fail.
const MIN_EXCEEDANCES: usize = 200;

/// Positive-value quantile level of the separation threshold used by the
/// truncated tail-chain comparison for absorbing chains.
const SEPARATION_LEVEL: f64 = 0.05;

struct Parts {
    estimates: Vec<Estimate>,
    targets: Vec<Target>,
    distances: Vec<Distance>,
    diagnostics: Diagnostics,
}

impl Parts {
    fn new() -> Parts {
        Parts {
            estimates: Vec::new(),
            targets: Vec::new(),
            distances: Vec::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    fn saturation_gate(&mut self, saturation: u64, n: u64) {
        self.diagnostics.saturation = Some(saturation);
        self.distances.push(Distance {
            name: "saturation_fraction".into(),
            value: saturation as f64 / n as f64,
            tolerance: MAX_SATURATION_FRACTION,
        });
    }

    fn evaluator_info(&mut self, cdf: &LimitCdf) {
        self.diagnostics.evaluator_method = Some(cdf.method().into());
        self.diagnostics.evaluator_accuracy = Some(cdf.accuracy());
        self.diagnostics.inner_samples = Some(cdf.inner_samples() as u64);
    }
}

fn eval_opts(config: &ExperimentConfig) -> EvalOptions {
    let mut opts = EvalOptions { seed: config.seed, ..Default::default() };
    if let Some(n) = config.inner_samples {
        opts.inner_samples = n;
    }
    opts
}

fn model_of(config: &ExperimentConfig) -> &ModelSpec {
    config.model.as_ref().expect("validated config carries a model")
}

fn guard_exceedances(count: usize) -> Result<()> {
    if count < MIN_EXCEEDANCES {
        Err(Error::InsufficientExceedances(format!(
            "{count} exceedances, need {MIN_EXCEEDANCES}"
        )))
    } else {
        Ok(())
    }
}

fn marginal_anchor(spec: &ModelSpec) -> &'static str {
    match spec {
        ModelSpec::ExpAr1 { .. } => "eq:jointlimdist-expar1",
        ModelSpec::ExpLinear { .. } => "eq:formula_linear_multivariate",
        ModelSpec::SvHeavyInnov { .. } => "eq:sv-noL",
        ModelSpec::SvHeavyVol { .. } => "sec:heavytailedvol",
        ModelSpec::SwitchingExpAr1 { .. } => "sec:switchingAR",
        ModelSpec::SvLeverage { .. } => "sec:sv-heavy-innovation-leverage",
        ModelSpec::GaussianSquareExp { .. } => "sec:counter",
    }
}

/// Runs one experiment. Deterministic given the config (the runtime field
/// aside); starved conditioning comes back as an inconclusive report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let parts = match run_parts(config) {
        Ok(parts) => parts,
        Err(Error::InsufficientExceedances(msg)) => {
            let mut parts = Parts::new();
            parts.diagnostics.notes.push(format!("inconclusive: {msg}"));
            return Ok(Report {
                config: config.clone(),
                estimates: parts.estimates,
                targets: parts.targets,
                distances: parts.distances,
                verdict: Verdict::Inconclusive,
                diagnostics: parts.diagnostics,
                runtime_seconds: start.elapsed().as_secs_f64(),
            });
        }
        Err(e) => return Err(e),
    };
    Ok(Report {
        verdict: Report::verdict_from_distances(&parts.distances),
        config: config.clone(),
        estimates: parts.estimates,
        targets: parts.targets,
        distances: parts.distances,
        diagnostics: parts.diagnostics,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

fn run_parts(config: &ExperimentConfig) -> Result<Parts> {
    match config.kind {
        ExperimentKind::ConditionalCdf => conditional_cdf(config),
        ExperimentKind::TailChainMatch => tail_chain_match(config),
        ExperimentKind::ProductTail => product_tail(config),
        ExperimentKind::MomentLimit => moment_limit(config),
        ExperimentKind::Cte => cte(config),
        ExperimentKind::KappaRecovery => kappa_recovery(config),
        ExperimentKind::Absorption => absorption(config),
        ExperimentKind::Homogeneity => homogeneity(config),
        ExperimentKind::Section4Reduction => section4_reduction(config),
        ExperimentKind::NegativeControl => negative_control(config),
    }
}

fn conditioned_sample(
    config: &ExperimentConfig,
    scaling: &Scaling,
) -> Result<(TailView, ConditionalSample)> {
    let spec = model_of(config);
    let q = config.q.expect("validated");
    let keep = keep_for_level(config.n, q);
    let stream = RandomStream::new(config.seed, stream_ids::MODEL);
    let tail = collect_tail_view(spec, config.h, config.n, keep, TailKey::X0, &stream)?;
    let cond = tail.conditional_at(q, scaling)?;
    guard_exceedances(cond.count)?;
    Ok((tail, cond))
}

fn conditional_cdf(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let scaling = Scaling::for_model(spec, h)?;
    let (tail, cond) = conditioned_sample(config, &scaling)?;
    let cdf = LimitCdf::for_model(spec, h, eval_opts(config))?;
    let values = cond.coordinate(h);
    let ks = ks_one_sample(&values, |y| cdf.marginal_cdf(h, y));
    let mut sorted = values.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[(sorted.len() - 1) / 2];
    let mut parts = Parts::new();
    parts.diagnostics.exceedances = Some(cond.count as u64);
    parts.evaluator_info(&cdf);
    parts.estimates.push(Estimate {
        name: format!("empirical_cdf_at_median_lag{h}"),
        value: crate::estimate::empirical_cdf(&cond, h, median),
        se: None,
    });
    parts.targets.push(Target {
        name: format!("limit_cdf_at_median_lag{h}"),
        value: cdf.marginal_cdf(h, median),
        paper_ref: marginal_anchor(spec).into(),
    });
    parts.distances.push(Distance {
        name: format!("ks_marginal_lag{h}"),
        value: ks,
        tolerance: config.tolerance,
    });
    parts.saturation_gate(tail.saturation, config.n);
    Ok(parts)
}

fn tail_chain_match(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let chain = TailChainSpec::of_model(spec).ok_or_else(|| {
        Error::Unsupported("tail-chain match needs a Markov family".into())
    })?;
    let scaling = Scaling::for_model(spec, h)?;
    let (tail, cond) = conditioned_sample(config, &scaling)?;
    let chain_stream = RandomStream::new(config.seed, stream_ids::TAIL_CHAIN);
    let chain_block = simulate_tail_chain(&chain, h, cond.count, &chain_stream)?;

    let mut model_rows: Vec<Vec<f64>> = cond.rows().map(|r| r.to_vec()).collect();
    let mut chain_rows: Vec<Vec<f64>> =
        (0..chain_block.meta.n).map(|i| chain_block.row(i).to_vec()).collect();

    let mut parts = Parts::new();
    let absorbing = chain.absorb_prob > 0.0;
    if absorbing {
        // truncated comparison: both samples restricted to intermediate
        // coordinates separated from zero, at the chain's 5% positive level
        let mut eps = vec![0.0; h + 1];
        for t in 1..h {
            let mut pos: Vec<f64> =
                chain_rows.iter().map(|r| r[t]).filter(|&v| v > 0.0).collect();
            if pos.is_empty() {
                return Err(Error::InsufficientExceedances(
                    "all chain paths absorbed before the horizon".into(),
                ));
            }
            pos.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            eps[t] = pos[(quantile_position(pos.len() as u64, SEPARATION_LEVEL) - 1) as usize];
        }
        let survives = |r: &[f64]| (1..h).all(|t| r[t] >= eps[t]);
        model_rows.retain(|r| survives(r));
        chain_rows.retain(|r| survives(r));
        guard_exceedances(model_rows.len().min(chain_rows.len()))?;
        parts.diagnostics.notes.push(format!(
            "absorbing chain: separation thresholds {:?} applied to intermediate \
             coordinates on both sides",
            &eps[1..h]
        ));
    }

    let gated_top = if absorbing { h.saturating_sub(1) } else { h };
    for coord in 0..=h {
        let a: Vec<f64> = model_rows.iter().map(|r| r[coord]).collect();
        let b: Vec<f64> = chain_rows.iter().map(|r| r[coord]).collect();
        let d = ks_two_sample(&a, &b);
        if coord <= gated_top {
            parts.distances.push(Distance {
                name: format!("ks_coordinate_{coord}"),
                value: d,
                tolerance: config.tolerance,
            });
        } else {
            // the rescaled atom at zero converges only logarithmically, so
            // the final coordinate of an absorbing chain is reported, not
            // gated
            parts.diagnostics.notes.push(format!(
                "ungated ks_coordinate_{coord} = {d:.4} (absorbed atom under slow scaling)"
            ));
        }
    }
    let prod = |r: &[f64]| r[..=gated_top].iter().product::<f64>();
    let a: Vec<f64> = model_rows.iter().map(|r| prod(r)).collect();
    let b: Vec<f64> = chain_rows.iter().map(|r| prod(r)).collect();
    parts.distances.push(Distance {
        name: "ks_coordinate_product".into(),
        value: ks_two_sample(&a, &b),
        tolerance: config.tolerance,
    });

    parts.diagnostics.exceedances = Some(model_rows.len() as u64);
    parts.targets.push(Target {
        name: "tail_chain_law".into(),
        value: chain.kappa,
        paper_ref: if absorbing {
            "eq:markov-tail-expar-truncated".into()
        } else {
            "theo:markov-indep".into()
        },
    });
    parts.estimates.push(Estimate {
        name: "matched_rows".into(),
        value: model_rows.len() as f64,
        se: None,
    });
    parts.saturation_gate(tail.saturation, config.n);
    Ok(parts)
}

fn product_tail(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let k = config.hill_k.expect("validated");
    let kappa = spec
        .theoretical_kappa(h)
        .ok_or_else(|| Error::Unsupported("product tail needs a defined kappa_h".into()))?;
    let alpha = spec.theoretical_alpha();
    let target = alpha / (1.0 + kappa);
    let stream = RandomStream::new(config.seed, stream_ids::MODEL);
    let tail = collect_tail_view(spec, h, config.n, k + 1, TailKey::ProductX0Xh, &stream)?;
    let keys: Vec<f64> = (0..tail.kept()).map(|i| tail.key(i)).collect();
    let alpha_hat = hill_sorted_desc(&keys, k)?;
    let mut parts = Parts::new();
    parts.estimates.push(Estimate {
        name: "hill_product_tail_index".into(),
        value: alpha_hat,
        se: Some(hill_se(alpha_hat, k)),
    });
    parts.targets.push(Target {
        name: "product_tail_index".into(),
        value: target,
        paper_ref: "eq:tail-product-cev".into(),
    });
    if let Ok(c) = product_tail_constant(
        spec,
        h,
        1_000_000,
        &RandomStream::new(config.seed, stream_ids::PRODUCT_TAIL),
    ) {
        parts.targets.push(Target {
            name: "product_tail_constant".into(),
            value: c.value,
            paper_ref: "eq:condition-moment-product-cev-2".into(),
        });
    }
    parts.distances.push(Distance {
        name: "abs_error_product_index".into(),
        value: (alpha_hat - target).abs(),
        tolerance: config.tolerance,
    });
    parts.saturation_gate(tail.saturation, config.n);
    Ok(parts)
}

fn moment_limit(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let scaling = Scaling::for_model(spec, h)?;
    let (tail, cond) = conditioned_sample(config, &scaling)?;
    let emp = m_hat(&cond, h)?;
    let vals: Vec<f64> = cond.rows().map(|r| r[h].max(0.0)).collect();
    let var = vals.iter().map(|v| (v - emp) * (v - emp)).sum::<f64>() / (vals.len() - 1) as f64;
    let target = cond_moment_limit(spec, h)?;
    let mut parts = Parts::new();
    parts.diagnostics.exceedances = Some(cond.count as u64);
    parts.estimates.push(Estimate {
        name: format!("rescaled_conditional_mean_lag{h}"),
        value: emp,
        se: Some((var / vals.len() as f64).sqrt()),
    });
    parts.targets.push(Target {
        name: "cond_moment_limit".into(),
        value: target,
        paper_ref: "eq:convweak-unbounded".into(),
    });
    parts.distances.push(Distance {
        name: "relative_error_moment".into(),
        value: (emp / target - 1.0).abs(),
        tolerance: config.tolerance,
    });
    parts.saturation_gate(tail.saturation, config.n);
    Ok(parts)
}

fn cte(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let fit_grid = config.fit_grid.clone().expect("validated");
    let m_q = config.q.expect("validated");
    let test_q = config.test_q.expect("validated");
    let use_abs = config.use_abs.unwrap_or_else(|| spec.is_signed());
    let q_min = fit_grid.iter().copied().fold(m_q.min(test_q), f64::min);
    let keep = keep_for_level(config.n, q_min);
    let stream = RandomStream::new(config.seed, stream_ids::MODEL);
    let tail = collect_tail_view(spec, h, config.n, keep, TailKey::X0, &stream)?;

    let fit = kappa_hat_from_tail(&tail, h, &fit_grid, use_abs)?;
    let mut kappas = vec![0.0; h];
    kappas[h - 1] = fit.kappa;
    let cond = tail.conditional_at(m_q, &Scaling::Power { kappas })?;
    guard_exceedances(cond.count)?;
    let m = m_hat(&cond, h)?;
    let (x_test, count_test) = tail.threshold_at(test_q)?;
    guard_exceedances(count_test)?;
    let predicted = cte_semiparametric(x_test, fit.kappa, m);
    let empirical = cte_plus_hat(&tail, h, x_test)?;

    let mut parts = Parts::new();
    parts.diagnostics.exceedances = Some(count_test as u64);
    parts.estimates.push(Estimate {
        name: "kappa_hat".into(),
        value: fit.kappa,
        se: Some(fit.std_error),
    });
    parts.estimates.push(Estimate { name: "m_hat".into(), value: m, se: None });
    parts.estimates.push(Estimate {
        name: "cte_plus_empirical_at_test_level".into(),
        value: empirical,
        se: None,
    });
    parts.targets.push(Target {
        name: "cte_semiparametric_prediction".into(),
        value: predicted,
        paper_ref: "sec:concluding".into(),
    });
    parts.targets.push(Target {
        name: "m_limit_definition".into(),
        value: m,
        paper_ref: "eq:def-mh".into(),
    });
    parts.distances.push(Distance {
        name: "relative_error_cte".into(),
        value: (predicted / empirical - 1.0).abs(),
        tolerance: config.tolerance,
    });
    parts.saturation_gate(tail.saturation, config.n);
    Ok(parts)
}

fn kappa_recovery(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let fit_grid = config.fit_grid.clone().expect("validated");
    let use_abs = config.use_abs.unwrap_or_else(|| spec.is_signed());
    let q_min = fit_grid.iter().copied().fold(1.0, f64::min);
    let stream = RandomStream::new(config.seed, stream_ids::MODEL);
    let mut parts = Parts::new();
    if let Some([h1, h2]) = config.lag_pair {
        let h = h1.max(h2);
        let keep = keep_for_level(config.n, q_min);
        let tail = collect_tail_view(spec, h, config.n, keep, TailKey::X0, &stream)?;
        let f1 = kappa_hat_from_tail(&tail, h1, &fit_grid, use_abs)?;
        let f2 = kappa_hat_from_tail(&tail, h2, &fit_grid, use_abs)?;
        for (h, f) in [(h1, &f1), (h2, &f2)] {
            parts.estimates.push(Estimate {
                name: format!("kappa_hat_lag{h}"),
                value: f.kappa,
                se: Some(f.std_error),
            });
            if let Some(k) = spec.theoretical_kappa(h) {
                parts.targets.push(Target {
                    name: format!("kappa_lag{h}"),
                    value: k,
                    paper_ref: marginal_anchor(spec).into(),
                });
            }
        }
        // the ordering of the exponents across the two lags is the claim
        parts.distances.push(Distance {
            name: format!("kappa_order_violation_lag{h1}_vs_lag{h2}"),
            value: (f2.kappa - f1.kappa).max(0.0),
            tolerance: config.tolerance,
        });
        parts.saturation_gate(tail.saturation, config.n);
    } else {
        let band = config.band.expect("validated");
        let h = config.h;
        let keep = keep_for_level(config.n, q_min);
        let tail = collect_tail_view(spec, h, config.n, keep, TailKey::X0, &stream)?;
        let fit = kappa_hat_from_tail(&tail, h, &fit_grid, use_abs)?;
        let center = 0.5 * (band[0] + band[1]);
        let halfwidth = 0.5 * (band[1] - band[0]);
        parts.estimates.push(Estimate {
            name: format!("kappa_hat_lag{h}"),
            value: fit.kappa,
            se: Some(fit.std_error),
        });
        for l in &fit.levels {
            parts.estimates.push(Estimate {
                name: format!("conditional_median_q{}", l.q),
                value: l.median,
                se: None,
            });
        }
        if let Some(k) = spec.theoretical_kappa(h) {
            parts.targets.push(Target {
                name: format!("kappa_lag{h}"),
                value: k,
                paper_ref: marginal_anchor(spec).into(),
            });
        }
        parts.distances.push(Distance {
            name: format!("kappa_band_distance_lag{h}"),
            value: (fit.kappa - center).abs(),
            tolerance: halfwidth,
        });
        parts.saturation_gate(tail.saturation, config.n);
    }
    Ok(parts)
}

fn absorption(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let chain = TailChainSpec::of_model(spec)
        .ok_or_else(|| Error::Unsupported("absorption needs a Markov family".into()))?;
    if chain.absorb_prob <= 0.0 {
        return Err(Error::Config("absorption experiment needs absorb_prob > 0".into()));
    }
    let steps = config.steps.expect("validated");
    let stream = RandomStream::new(config.seed, stream_ids::TAIL_CHAIN);
    let block = simulate_tail_chain(&chain, steps, config.n as usize, &stream)?;
    let eta = chain.absorb_prob;
    let mut parts = Parts::new();
    for k in 1..=steps {
        let zeros = (0..block.meta.n).filter(|&i| block.row(i)[k] == 0.0).count();
        let emp = zeros as f64 / block.meta.n as f64;
        let theo = 1.0 - (1.0 - eta).powi(k as i32);
        let se = (theo * (1.0 - theo) / block.meta.n as f64).sqrt();
        parts.estimates.push(Estimate {
            name: format!("zero_fraction_by_step_{k}"),
            value: emp,
            se: Some(se),
        });
        parts.targets.push(Target {
            name: format!("geometric_absorption_step_{k}"),
            value: theo,
            paper_ref: "theo:markov-indep".into(),
        });
        parts.distances.push(Distance {
            name: format!("abs_error_step_{k}"),
            value: (emp - theo).abs(),
            tolerance: config.tolerance * se,
        });
    }
    Ok(parts)
}

fn homogeneity(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let cdf = LimitCdf::for_model(spec, h, eval_opts(config))?;
    let ts = config.t_factors.clone().expect("validated");
    let y0s = config.y0_grid.clone().unwrap_or_else(|| vec![1.0, 1.5, 2.0]);
    let y1s = config.y1_grid.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let mut parts = Parts::new();
    parts.evaluator_info(&cdf);
    parts.targets.push(Target {
        name: "homogeneity_residual".into(),
        value: 0.0,
        paper_ref: "eq:homogeneity-cev".into(),
    });
    for &t in &ts {
        let mut worst = 0.0f64;
        for &y0 in &y0s {
            for &y1 in &y1s {
                let mut y = vec![y1; h + 1];
                y[0] = y0;
                worst = worst.max(homogeneity_residual(&cdf, t, &y));
            }
        }
        parts.distances.push(Distance {
            name: format!("max_residual_t_{t}"),
            value: worst,
            tolerance: config.tolerance,
        });
    }
    Ok(parts)
}

fn section4_reduction(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let (alpha, phi) = match spec {
        ModelSpec::ExpLinear { alpha, coeffs: CoeffRule::Geometric { phi }, .. } => (*alpha, *phi),
        _ => {
            return Err(Error::Config(
                "section4-reduction needs an exp_linear model with a geometric rule".into(),
            ))
        }
    };
    let h = config.h;
    let lin = LimitCdf::for_model(spec, h, eval_opts(config))?;
    let ar = expar1_limit_cdf(alpha, phi, h, eval_opts(config));
    let y0s = config.y0_grid.clone().expect("validated");
    let y1s = config.y1_grid.clone().expect("validated");
    let mut worst = 0.0f64;
    let mut at = (0.0, 0.0);
    for &y0 in &y0s {
        for &y1 in &y1s {
            let mut y = vec![y1; h + 1];
            y[0] = y0;
            let d = (lin.query(&y)? - ar.query(&y)?).abs();
            if d > worst {
                worst = d;
                at = (y0, y1);
            }
        }
    }
    let mut parts = Parts::new();
    parts.evaluator_info(&lin);
    parts.estimates.push(Estimate {
        name: format!("worst_grid_point_y0_{}_y1_{}", at.0, at.1),
        value: worst,
        se: None,
    });
    parts.targets.push(Target {
        name: "reduction_to_ar1".into(),
        value: 0.0,
        paper_ref: "eq:formula_linear_multivariate".into(),
    });
    parts.distances.push(Distance {
        name: "max_abs_cdf_difference".into(),
        value: worst,
        tolerance: config.tolerance,
    });
    Ok(parts)
}

fn negative_control(config: &ExperimentConfig) -> Result<Parts> {
    let spec = model_of(config);
    let h = config.h;
    let grid_a = config.fit_grid.clone().expect("validated");
    let grid_b = config.grid_b.clone().expect("validated");
    let use_abs = config.use_abs.unwrap_or_else(|| spec.is_signed());
    let q_min = grid_a.iter().chain(grid_b.iter()).copied().fold(1.0, f64::min);
    let stream = RandomStream::new(config.seed, stream_ids::MODEL);
    let keep = keep_for_level(config.n, q_min);
    let tail = collect_tail_view(spec, h, config.n, keep, TailKey::X0, &stream)?;
    let fit_a = kappa_hat_from_tail(&tail, h, &grid_a, use_abs)?;
    let fit_b = kappa_hat_from_tail(&tail, h, &grid_b, use_abs)?;
    let gap = (fit_a.kappa - fit_b.kappa).abs();
    let mut parts = Parts::new();
    parts.estimates.push(Estimate {
        name: "kappa_hat_grid_a".into(),
        value: fit_a.kappa,
        se: Some(fit_a.std_error),
    });
    parts.estimates.push(Estimate {
        name: "kappa_hat_grid_b".into(),
        value: fit_b.kappa,
        se: Some(fit_b.std_error),
    });
    parts.targets.push(Target {
        name: "minimum_kappa_gap".into(),
        value: config.tolerance,
        paper_ref: "sec:counter".into(),
    });
    parts.distances.push(Distance {
        name: "kappa_gap_shortfall".into(),
        value: (config.tolerance - gap).max(0.0),
        tolerance: 0.0,
    });
    if gap > config.tolerance {
        parts.diagnostics.notes.push(format!(
            "no stable kappa: estimates drift from {:.3} to {:.3} across disjoint \
             threshold grids",
            fit_a.kappa, fit_b.kappa
        ));
    }
    parts.saturation_gate(tail.saturation, config.n);
    Ok(parts)
}
