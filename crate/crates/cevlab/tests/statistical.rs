//! Statistical invariants that sit between unit tests and the acceptance
//! suite: marginal tail indices, extremal independence, the tail-process
//! representation, and Monte Carlo cross-checks of every closed-form moment
//! limit. Each uses a fixed seed; bands were sized from pilot runs plus the
//! stated asymptotic standard errors.

use cevlab::estimate::{
    collect_tail_view, conditional_sample, hill, keep_for_level, m_hat, Scaling, TailKey,
};
use cevlab::limits::{cond_moment_limit, sv_innov_limit_cdf, EvalOptions};
use cevlab::models::{simulate_block, CoeffRule, ModelSpec, ZLaw};
use cevlab::randomness::{LogNormalLaw, RandomStream};
use cevlab::stream_ids;
use cevlab::tailchain::{j_vector_from_w, simulate_tail_chain, TailChainSpec, WSampler};
use cevlab::verify::{ks_one_sample, ks_two_sample, run_experiment, ExperimentConfig, ExperimentKind, Verdict};

fn model_stream() -> RandomStream {
    RandomStream::new(42, stream_ids::MODEL)
}

#[test]
fn marginal_hill_recovers_alpha_for_every_family() {
    let heavy: Vec<(&str, ModelSpec)> = vec![
        ("expar1", ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 }),
        (
            "switching",
            ModelSpec::SwitchingExpAr1 {
                alpha: 2.0,
                phi: 0.5,
                eta: 0.3,
                r_law: LogNormalLaw::standard(),
            },
        ),
        (
            "explin-geometric",
            ModelSpec::ExpLinear {
                alpha: 2.0,
                coeffs: CoeffRule::Geometric { phi: 0.5 },
                truncation: None,
            },
        ),
        (
            "explin-long-memory",
            ModelSpec::ExpLinear {
                alpha: 2.0,
                coeffs: CoeffRule::LongMemory { c: 0.5, gamma: 1.0 },
                truncation: Some(300),
            },
        ),
        ("sv-heavy-vol", ModelSpec::SvHeavyVol { alpha: 2.0, phi: 0.5, z_law: ZLaw::StdGaussian }),
        ("sv-heavy-innov", ModelSpec::SvHeavyInnov { z_alpha: 3.0, vol_rho: 0.7, vol_sigma: 0.5 }),
        ("sv-leverage", ModelSpec::SvLeverage { z_alpha: 2.0, coeffs: vec![0.6, 0.2] }),
    ];
    for (name, spec) in heavy {
        let block = simulate_block(&spec, 1, 1_000_000, &model_stream()).unwrap();
        let pos: Vec<f64> = block.column(0).into_iter().filter(|v| *v > 0.0).collect();
        let a = hill(&pos, 2000).unwrap();
        let alpha = spec.theoretical_alpha();
        assert!(
            (a / alpha - 1.0).abs() <= 0.10,
            "{name}: hill {a} vs alpha {alpha}"
        );
    }
    // the negative control has a genuine slowly varying correction, so the
    // band is wider
    let gs = ModelSpec::GaussianSquareExp { c: 0.25, ar1_rho: 0.8 };
    let block = simulate_block(&gs, 1, 1_000_000, &model_stream()).unwrap();
    let a = hill(&block.column(0), 2000).unwrap();
    assert!((a / 2.0 - 1.0).abs() <= 0.25, "gauss-sq: hill {a}");
}

#[test]
fn marginal_tail_constant_matches_breiman_product() {
    // P(V_0 > x) x^alpha flattens onto e^{-1} E[e^{alpha xi_0^*}], the
    // innovation tail constant times the stationary moment product
    let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
    let n = 4_000_000u64;
    let keep = keep_for_level(n, 1.0 - 2e-2);
    let tail = collect_tail_view(&spec, 1, n, keep, TailKey::X0, &model_stream()).unwrap();
    let series = cevlab::randomness::stationary_log_moment(
        2.0,
        |j| 0.5f64.powi(j as i32 + 1), // xi_0^* drops the newest innovation
        2.0,
        40,
    )
    .unwrap()
    .value;
    let constant = (-1.0f64).exp() * series;
    for (x, band) in [(10.0, 0.10), (31.0, 0.10), (100.0, 0.25)] {
        let hits = (0..tail.kept()).take_while(|&i| tail.key(i) > x).count();
        let emp = hits as f64 / n as f64 * x * x;
        assert!(
            (emp / constant - 1.0).abs() <= band,
            "x={x}: empirical constant {emp} vs {constant}"
        );
    }
}

#[test]
fn consecutive_exceedances_are_extremally_independent() {
    // the joint exceedance fraction decays to zero as the level rises; the
    // population value sits near 0.036 at the 99.9% level and near 0.010 at
    // 99.99%, so the 0.02 bound is checked where it actually holds
    let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
    let n = 20_000_000u64;
    let keep = keep_for_level(n, 0.999);
    let tail = collect_tail_view(&spec, 1, n, keep, TailKey::X0, &model_stream()).unwrap();
    let frac_at = |q: f64| {
        let (x, count) = tail.threshold_at(q).unwrap();
        let joint = (0..count).filter(|&i| tail.row(i)[1] > x).count();
        joint as f64 / count as f64
    };
    let lo = frac_at(0.999);
    let hi = frac_at(0.9999);
    assert!(hi < 0.02, "joint exceedance fraction {hi} at the 99.99% level");
    assert!(hi < lo, "no decay: {lo} -> {hi}");
    assert!(lo < 0.06, "fraction {lo} at the 99.9% level is out of line");
}

#[test]
fn tail_chain_matches_its_multiplier_representation() {
    // (Y_0, ..., Y_h) from the recursion against (Y_0, Y_0^k J_1, ...):
    // same law, independent streams, matched sizes
    let chain = TailChainSpec {
        alpha: 2.0,
        kappa: 0.5,
        w: WSampler::ExpInnovation { alpha: 2.0 },
        absorb_prob: 0.0,
    };
    let h = 3;
    let n = 1_000_000usize;
    let direct = simulate_tail_chain(&chain, h, n, &RandomStream::new(42, stream_ids::TAIL_CHAIN))
        .unwrap();
    let alt = RandomStream::new(42, stream_ids::MODEL_ALT);
    let pareto = cevlab::randomness::ParetoLaw::standard(2.0);
    let mut composed = vec![0.0; n * (h + 1)];
    for (i, row) in composed.chunks_mut(h + 1).enumerate() {
        let rs = alt.substream(i as u64);
        let y0 = pareto.quantile(rs.at(0)).unwrap();
        let w: Vec<f64> = (1..=h).map(|t| chain.w.from_uniform(rs.at(t as u64))).collect();
        let j = j_vector_from_w(chain.kappa, &w);
        row[0] = y0;
        for t in 1..=h {
            row[t] = y0.powf(chain.kappa.powi(t as i32)) * j[t - 1];
        }
    }
    for coord in 0..=h {
        let a = direct.column(coord);
        let b: Vec<f64> = composed.chunks(h + 1).map(|r| r[coord]).collect();
        let d = ks_two_sample(&a, &b);
        assert!(d <= 0.01, "coordinate {coord}: ks {d}");
    }
}

#[test]
fn tail_chain_start_is_pareto() {
    let chain = TailChainSpec {
        alpha: 2.0,
        kappa: 0.5,
        w: WSampler::ExpInnovation { alpha: 2.0 },
        absorb_prob: 0.0,
    };
    let block =
        simulate_tail_chain(&chain, 1, 1_000_000, &RandomStream::new(42, stream_ids::TAIL_CHAIN))
            .unwrap();
    let a = hill(&block.column(0), 5000).unwrap();
    assert!((a / 2.0 - 1.0).abs() <= 0.05, "hill {a}");
}

#[test]
fn sv_innov_conditional_cdf_matches_evaluator() {
    let spec = ModelSpec::SvHeavyInnov { z_alpha: 2.0, vol_rho: 0.7, vol_sigma: 0.5 };
    let n = 10_000_000u64;
    let keep = keep_for_level(n, 0.999);
    let tail = collect_tail_view(&spec, 1, n, keep, TailKey::X0, &model_stream()).unwrap();
    let cond = tail.conditional_at(0.999, &Scaling::Unit).unwrap();
    let cdf = sv_innov_limit_cdf(
        2.0,
        0.7,
        0.5,
        1,
        EvalOptions { inner_samples: 200_000, ..Default::default() },
    );
    let values = cond.coordinate(1);
    let d = ks_one_sample(&values, |y| cdf.marginal_cdf(1, y));
    assert!(d <= 0.02, "ks {d}");
}

/// Every closed-form moment limit against its own straight Monte Carlo.
/// Bands account for the heavy-tailed summands (tail index alpha) and the
/// finite conditioning level.
#[test]
fn moment_limits_cross_check_against_monte_carlo() {
    let cases: Vec<(&str, ModelSpec, f64, u64, f64)> = vec![
        ("expar1", ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 }, 0.9999, 10_000_000, 0.10),
        (
            "sv-heavy-vol",
            ModelSpec::SvHeavyVol { alpha: 2.0, phi: 0.5, z_law: ZLaw::StdGaussian },
            0.999,
            10_000_000,
            0.10,
        ),
        (
            "sv-leverage",
            ModelSpec::SvLeverage { z_alpha: 2.0, coeffs: vec![0.6, 0.2] },
            0.999,
            10_000_000,
            0.15,
        ),
        (
            "switching",
            ModelSpec::SwitchingExpAr1 {
                alpha: 2.0,
                phi: 0.5,
                eta: 0.3,
                r_law: LogNormalLaw::standard(),
            },
            0.9999,
            20_000_000,
            0.10,
        ),
        (
            "explin-geometric-lag2",
            ModelSpec::ExpLinear {
                alpha: 2.0,
                coeffs: CoeffRule::Geometric { phi: 0.5 },
                truncation: None,
            },
            0.999,
            10_000_000,
            0.10,
        ),
        (
            "sv-heavy-innov",
            ModelSpec::SvHeavyInnov { z_alpha: 3.0, vol_rho: 0.7, vol_sigma: 0.5 },
            0.999,
            10_000_000,
            0.10,
        ),
    ];
    for (name, spec, q, n, tol) in cases {
        let h = if name.ends_with("lag2") { 2 } else { 1 };
        let target = cond_moment_limit(&spec, h).unwrap();
        let keep = keep_for_level(n, q);
        let tail = collect_tail_view(&spec, h, n, keep, TailKey::X0, &model_stream()).unwrap();
        let cond = tail.conditional_at(q, &Scaling::for_model(&spec, h).unwrap()).unwrap();
        let emp = m_hat(&cond, h).unwrap();
        assert!(
            (emp / target - 1.0).abs() <= tol,
            "{name}: empirical {emp} vs closed form {target}"
        );
    }
}

#[test]
fn absorbing_chain_truncated_comparison_passes_when_steps_are_concentrated() {
    // with a concentrated multiplier law the separation filter actually
    // isolates the continuous part at desk-scale thresholds
    let mut cfg = ExperimentConfig::new(ExperimentKind::TailChainMatch);
    cfg.model = Some(ModelSpec::SwitchingExpAr1 {
        alpha: 2.0,
        phi: 0.7,
        eta: 0.3,
        r_law: LogNormalLaw { mu: 0.0, sigma: 0.3 },
    });
    cfg.h = 2;
    cfg.n = 10_000_000;
    cfg.q = Some(0.999);
    cfg.tolerance = 0.05;
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    // the final coordinate carries the slowly-converging atom and is
    // reported, not gated
    assert!(report
        .diagnostics
        .notes
        .iter()
        .any(|n| n.contains("ungated ks_coordinate_2")));
}

#[test]
fn product_of_lag_two_coordinates_has_the_predicted_index() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ProductTail);
    cfg.model = Some(ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 });
    cfg.h = 2;
    cfg.n = 10_000_000;
    cfg.hill_k = Some(5000);
    cfg.tolerance = 0.10;
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    let target = report.targets.iter().find(|t| t.name == "product_tail_index").unwrap();
    assert!((target.value - 1.6).abs() < 1e-12);
}

#[test]
fn starved_conditioning_is_inconclusive_not_failed() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ConditionalCdf);
    cfg.model = Some(ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 });
    cfg.h = 1;
    cfg.n = 2_000;
    cfg.q = Some(0.999); // two exceedances
    cfg.tolerance = 0.05;
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Inconclusive);
    assert!(report.diagnostics.notes.iter().any(|n| n.contains("inconclusive")));
}

#[test]
fn run_experiment_is_seed_deterministic() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::KappaRecovery);
    cfg.model = Some(ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 });
    cfg.h = 1;
    cfg.n = 300_000;
    cfg.fit_grid = Some(vec![0.99, 0.995, 0.999]);
    cfg.band = Some([0.3, 0.7]);
    cfg.tolerance = 0.2;
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.canonical_bytes(), b.canonical_bytes());
    cfg.seed = 43;
    let c = run_experiment(&cfg).unwrap();
    assert_ne!(a.canonical_bytes(), c.canonical_bytes());
}

#[test]
fn conditional_cdf_of_expar1_against_evaluator_at_modest_scale() {
    // the marginal of the second coordinate against the quadrature route,
    // at a scale where the test stays fast
    let spec = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
    let block = simulate_block(&spec, 1, 1_000_000, &model_stream()).unwrap();
    let cond =
        conditional_sample(&block, 0.999, &Scaling::Power { kappas: vec![0.5] }).unwrap();
    let cdf = cevlab::limits::expar1_limit_cdf(2.0, 0.5, 1, EvalOptions::default());
    let d = ks_one_sample(&cond.coordinate(1), |y| cdf.marginal_cdf(1, y));
    assert!(d <= 0.05, "ks {d}");
}
