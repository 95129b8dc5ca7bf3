//! Command-line front end: simulate blocks, simulate tail chains, tabulate
//! limit distributions, run estimators on CSV data, and run verification
//! experiments or the whole acceptance suite.
//!
//! Exit codes: 0 success (experiments: pass), 1 experiment failure, 2 usage
//! error, 3 inconclusive.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cevlab::estimate::{
    self, cte_semiparametric, default_hill_k, EstimateReport, Scaling, TailKey, TailView,
};
use cevlab::limits::{EvalOptions, LimitCdf};
use cevlab::models::{
    read_block_csv, simulate_block, write_block_csv, CoeffRule, ModelSpec, ZLaw,
};
use cevlab::randomness::{LogNormalLaw, RandomStream};
use cevlab::tailchain::{simulate_tail_chain, TailChainSpec, WSampler};
use cevlab::verify::{
    format_summary, run_experiment, run_suite, write_report, ExperimentConfig, ExperimentKind,
    Verdict,
};
use cevlab::{stream_ids, Error};

#[derive(Parser)]
#[command(name = "cevlab", version, about = "Heavy-tailed time series with extremal \
independence: simulation, limiting conditional distributions, estimation, verification")]
struct Cli {
    /// Master seed; everything downstream is a pure function of it.
    #[arg(long, global = true, env = "CEVLAB_SEED", default_value_t = 42)]
    seed: u64,
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct ModelArgs {
    /// Model family: expar1 | switching | explin | sv-vol | sv-innov |
    /// sv-leverage | gauss-sq
    #[arg(long)]
    model: Option<String>,
    /// Tail index of the heavy innovation (eq:expepsilon-rv).
    #[arg(long)]
    alpha: Option<f64>,
    /// Autoregression exponent (eq:ar1); the per-step conditional scaling
    /// exponent (sec:expar).
    #[arg(long)]
    phi: Option<f64>,
    /// Switch probability of the switching model (sec:switchingAR).
    #[arg(long)]
    eta: Option<f64>,
    /// Log-mean of the switching multiplier law.
    #[arg(long, default_value_t = 0.0)]
    r_mu: f64,
    /// Log-standard-deviation of the switching multiplier law.
    #[arg(long, default_value_t = 1.0)]
    r_sigma: f64,
    /// Coefficient rule of the linear process: geometric | long-memory |
    /// explicit (eq:formula_linear_multivariate).
    #[arg(long)]
    rule: Option<String>,
    /// Long-memory scale c in phi_j = c (j+1)^(-gamma).
    #[arg(long)]
    lm_c: Option<f64>,
    /// Long-memory decay gamma (> 1/2 for square-summability).
    #[arg(long)]
    lm_gamma: Option<f64>,
    /// Explicit coefficients for lags 1,2,... (comma separated); also the
    /// leverage coefficients c_j (sec:sv-heavy-innovation-leverage).
    #[arg(long)]
    coeffs: Option<String>,
    /// Series truncation override.
    #[arg(long)]
    trunc: Option<usize>,
    /// Tail index of the heavy innovation Z of the stochastic volatility
    /// models (eq:sv-noL).
    #[arg(long)]
    z_alpha: Option<f64>,
    /// AR(1) coefficient of the log-volatility.
    #[arg(long)]
    vol_rho: Option<f64>,
    /// Innovation standard deviation of the log-volatility.
    #[arg(long)]
    vol_sigma: Option<f64>,
    /// Curvature of the Gaussian-square negative control (sec:counter).
    #[arg(long)]
    c: Option<f64>,
    /// AR(1) correlation of the Gaussian driver of the negative control.
    #[arg(long)]
    rho: Option<f64>,
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
        .collect()
}

impl ModelArgs {
    fn build(&self) -> Result<ModelSpec, String> {
        let name = self.model.as_deref().ok_or("missing --model")?;
        let need = |v: Option<f64>, what: &str| v.ok_or(format!("{name} needs --{what}"));
        let spec = match name {
            "expar1" => ModelSpec::ExpAr1 {
                alpha: need(self.alpha, "alpha")?,
                phi: need(self.phi, "phi")?,
            },
            "switching" => ModelSpec::SwitchingExpAr1 {
                alpha: need(self.alpha, "alpha")?,
                phi: need(self.phi, "phi")?,
                eta: need(self.eta, "eta")?,
                r_law: LogNormalLaw { mu: self.r_mu, sigma: self.r_sigma },
            },
            "explin" => {
                let rule = match self.rule.as_deref().unwrap_or("geometric") {
                    "geometric" => CoeffRule::Geometric { phi: need(self.phi, "phi")? },
                    "long-memory" => CoeffRule::LongMemory {
                        c: need(self.lm_c, "lm-c")?,
                        gamma: need(self.lm_gamma, "lm-gamma")?,
                    },
                    "explicit" => CoeffRule::Explicit {
                        coeffs: parse_f64_list(
                            self.coeffs.as_deref().ok_or("explicit rule needs --coeffs")?,
                        )?,
                    },
                    other => return Err(format!("unknown rule {other:?}")),
                };
                ModelSpec::ExpLinear {
                    alpha: need(self.alpha, "alpha")?,
                    coeffs: rule,
                    truncation: self.trunc,
                }
            }
            "sv-vol" => ModelSpec::SvHeavyVol {
                alpha: need(self.alpha, "alpha")?,
                phi: need(self.phi, "phi")?,
                z_law: ZLaw::StdGaussian,
            },
            "sv-innov" => ModelSpec::SvHeavyInnov {
                z_alpha: need(self.z_alpha, "z-alpha")?,
                vol_rho: need(self.vol_rho, "vol-rho")?,
                vol_sigma: need(self.vol_sigma, "vol-sigma")?,
            },
            "sv-leverage" => ModelSpec::SvLeverage {
                z_alpha: need(self.z_alpha, "z-alpha")?,
                coeffs: parse_f64_list(
                    self.coeffs.as_deref().ok_or("sv-leverage needs --coeffs")?,
                )?,
            },
            "gauss-sq" => ModelSpec::GaussianSquareExp {
                c: need(self.c, "c")?,
                ar1_rho: need(self.rho, "rho")?,
            },
            other => return Err(format!("unknown model {other:?}")),
        };
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a block of paths (X_0, ..., X_h) and write CSV plus a
    /// sidecar metadata file (eq:indep-vague-noncentered).
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Lag horizon.
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Replicates.
        #[arg(long)]
        n: usize,
        /// Output CSV path; a .json sidecar lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the limiting tail chain Y_t = Y_(t-1)^kappa W_t
    /// (theo:markov-indep).
    Tailchain {
        /// Tail index of the Pareto start.
        #[arg(long)]
        alpha: f64,
        /// Per-step scaling exponent.
        #[arg(long)]
        kappa: f64,
        /// Step law: exp-innovation | log-normal | constant.
        #[arg(long, default_value = "exp-innovation")]
        w: String,
        /// Tail index of the exp-innovation step law (defaults to --alpha).
        #[arg(long)]
        w_alpha: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        w_mu: f64,
        #[arg(long, default_value_t = 1.0)]
        w_sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        w_value: f64,
        /// Mass of the step law at zero (sec:switchingAR).
        #[arg(long, default_value_t = 0.0)]
        absorb: f64,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate a limiting conditional CDF on a grid (eq:def-cevcdf).
    Limits {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Grid, one clause per coordinate: y0=inf y1=0.5,1,2 ...
        #[arg(long, num_args = 1.., value_name = "yK=v1,v2,...")]
        grid: Vec<String>,
        /// Inner Monte Carlo samples of the evaluator.
        #[arg(long)]
        inner: Option<usize>,
        /// Output CSV path; a .json header with the accuracy budget lands
        /// next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run estimators on a block CSV (external data uses the same format).
    Estimate {
        /// Input CSV in the block format.
        #[arg(long)]
        input: PathBuf,
        /// Estimator: hill | kappa | cte | cte-sp | ecdf.
        #[arg(long)]
        op: String,
        /// Hill order statistics (default: 2 n^0.6 capped at n/10).
        #[arg(long)]
        k: Option<usize>,
        /// Coordinate the estimator looks at (hill, ecdf).
        #[arg(long, default_value_t = 0)]
        coord: usize,
        /// Lag for kappa/cte estimators.
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Quantile grid for the exponent regression (eq:lim-cevcdf).
        #[arg(long)]
        grid: Option<String>,
        /// Work on magnitudes.
        #[arg(long)]
        abs: bool,
        /// Conditioning quantile level.
        #[arg(long)]
        q: Option<f64>,
        /// Evaluation points for ecdf / extrapolation point for cte-sp.
        #[arg(long)]
        at: Option<String>,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one verification experiment, or the whole acceptance suite.
    Verify {
        /// Experiment kind: conditional-cdf | tail-chain-match |
        /// product-tail | moment-limit | cte | kappa-recovery | absorption
        /// | homogeneity | section4-reduction | negative-control.
        #[arg(long, conflicts_with = "suite")]
        kind: Option<String>,
        /// Run a named suite; "paper" runs every acceptance criterion
        /// including the determinism check.
        #[arg(long)]
        suite: Option<String>,
        /// JSON config to start from; explicit flags win over file values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        n: Option<u64>,
        /// Conditioning quantile level (eq:lim-cevcdf).
        #[arg(long)]
        q: Option<f64>,
        /// Level the semiparametric CTE is tested at (sec:concluding).
        #[arg(long)]
        test_q: Option<f64>,
        /// Threshold grid for exponent fits.
        #[arg(long)]
        grid: Option<String>,
        /// Second grid of the negative control (sec:counter).
        #[arg(long)]
        grid_b: Option<String>,
        /// Hill order statistics (prop:tail-product-cev).
        #[arg(long)]
        k: Option<usize>,
        /// Acceptance band lo,hi for the exponent estimate.
        #[arg(long)]
        band: Option<String>,
        /// Two lags whose exponents must come out decreasing.
        #[arg(long)]
        lag_pair: Option<String>,
        /// Absorption steps checked (theo:markov-indep).
        #[arg(long)]
        steps: Option<usize>,
        /// Dilation factors of the homogeneity check (eq:homogeneity-cev).
        #[arg(long)]
        t_factors: Option<String>,
        #[arg(long)]
        y0_grid: Option<String>,
        #[arg(long)]
        y1_grid: Option<String>,
        /// Inner Monte Carlo samples of limit evaluators.
        #[arg(long)]
        inner: Option<usize>,
        /// Estimate exponents on magnitudes.
        #[arg(long)]
        abs: bool,
        /// Tolerance of every gated distance.
        #[arg(long)]
        tol: Option<f64>,
        /// Report destination: a file for one experiment, a directory for a
        /// suite.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the cross-thread determinism pass of the suite.
        #[arg(long)]
        skip_determinism: bool,
    },
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            return usage_error("could not size the thread pool");
        }
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => match e {
            Error::InvalidSpec(_) | Error::Config(_) | Error::Domain(_) => {
                usage_error(&e.to_string())
            }
            other => {
                eprintln!("error: {other}");
                ExitCode::from(1)
            }
        },
    }
}

fn dispatch(cli: Cli) -> cevlab::Result<ExitCode> {
    match cli.command {
        Command::Simulate { model, h, n, out } => {
            let spec = model.build().map_err(Error::Config)?;
            spec.validate()?;
            let stream = RandomStream::new(cli.seed, stream_ids::MODEL);
            let block = simulate_block(&spec, h, n, &stream)?;
            write_block_csv(&block, &out)?;
            eprintln!(
                "wrote {} rows to {} (saturation {})",
                block.meta.n,
                out.display(),
                block.meta.saturation
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Tailchain {
            alpha,
            kappa,
            w,
            w_alpha,
            w_mu,
            w_sigma,
            w_value,
            absorb,
            h,
            n,
            out,
        } => {
            let w = match w.as_str() {
                "exp-innovation" => WSampler::ExpInnovation { alpha: w_alpha.unwrap_or(alpha) },
                "log-normal" => WSampler::LogNormal { mu: w_mu, sigma: w_sigma },
                "constant" => WSampler::Constant { value: w_value },
                other => return Err(Error::Config(format!("unknown step law {other:?}"))),
            };
            if !(0.0..=1.0).contains(&absorb) {
                return Err(Error::Config("absorb out of [0,1]".into()));
            }
            let spec = TailChainSpec { alpha, kappa, w, absorb_prob: absorb };
            let stream = RandomStream::new(cli.seed, stream_ids::TAIL_CHAIN);
            let block = simulate_tail_chain(&spec, h, n, &stream)?;
            write_block_csv(&block, &out)?;
            eprintln!("wrote {} tail-chain paths to {}", block.meta.n, out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Limits { model, h, grid, inner, out } => {
            let spec = model.build().map_err(Error::Config)?;
            let mut opts = EvalOptions { seed: cli.seed, ..Default::default() };
            if let Some(i) = inner {
                opts.inner_samples = i;
            }
            let cdf = LimitCdf::for_model(&spec, h, opts)?;
            let axes = parse_grid(&grid, h)?;
            let mut csv = String::new();
            let header: Vec<String> = (0..=h).map(|j| format!("y{j}")).collect();
            csv.push_str(&format!("{},psi\n", header.join(",")));
            let counts: Vec<usize> = axes.iter().map(|a| a.len()).collect();
            let total: usize = counts.iter().product();
            for flat in 0..total {
                let mut rem = flat;
                let mut y = vec![0.0; h + 1];
                // y0-major enumeration of the grid
                for j in (0..=h).rev() {
                    y[j] = axes[j][rem % counts[j]];
                    rem /= counts[j];
                }
                let p = cdf.query(&y)?;
                for v in &y {
                    if v.is_infinite() {
                        csv.push_str("inf,");
                    } else {
                        csv.push_str(&format!("{v},"));
                    }
                }
                csv.push_str(&format!("{p}\n"));
            }
            std::fs::write(&out, &csv)?;
            let meta = serde_json::json!({
                "alpha": cdf.alpha(),
                "kappas": cdf.kappas(),
                "method": cdf.method(),
                "accuracy": cdf.accuracy(),
                "inner_samples": cdf.inner_samples(),
                "inner_seed": cdf.inner_seed(),
            });
            std::fs::write(
                out.with_extension("json"),
                serde_json::to_string_pretty(&meta)? + "\n",
            )?;
            eprintln!("wrote limit table to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate { input, op, k, coord, h, grid, abs, q, at, out } => {
            let block = read_block_csv(&input)?;
            let report = run_estimate(&block, &op, k, coord, h, grid, abs, q, at)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(p) => std::fs::write(p, json)?,
                None => print!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            kind,
            suite,
            config,
            model,
            h,
            n,
            q,
            test_q,
            grid,
            grid_b,
            k,
            band,
            lag_pair,
            steps,
            t_factors,
            y0_grid,
            y1_grid,
            inner,
            abs,
            tol,
            out,
            skip_determinism,
        } => {
            if let Some(name) = suite {
                if name != "paper" {
                    return Err(Error::Config(format!("unknown suite {name:?}")));
                }
                let outcome = run_suite(cli.seed, !skip_determinism, |id, report| {
                    let verdict = match report.verdict {
                        Verdict::Pass => "pass",
                        Verdict::Fail => "FAIL",
                        Verdict::Inconclusive => "inconclusive",
                    };
                    eprintln!("{id}: {verdict} ({:.1}s)", report.runtime_seconds);
                })?;
                print!("{}", format_summary(&outcome));
                if let Some(dir) = out {
                    std::fs::create_dir_all(&dir)?;
                    for (item, report) in &outcome.items {
                        write_report(report, &dir.join(format!("{}.json", item.id)))?;
                    }
                    std::fs::write(dir.join("summary.txt"), format_summary(&outcome))?;
                }
                return Ok(if outcome.any_fail() {
                    ExitCode::from(1)
                } else if outcome.all_pass() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(3)
                });
            }
            let mut cfg = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<ExperimentConfig>(&text)?
                }
                None => {
                    let kind = kind
                        .as_deref()
                        .ok_or_else(|| Error::Config("verify needs --kind or --suite".into()))?;
                    ExperimentConfig::new(parse_kind(kind)?)
                }
            };
            let from_file = config.is_some();
            let note = |what: &str| {
                if from_file {
                    eprintln!("note: flag --{what} overrides the config file");
                }
            };
            if let (Some(kname), true) = (&kind, from_file) {
                let parsed = parse_kind(kname)?;
                if cfg.kind != parsed {
                    note("kind");
                    cfg.kind = parsed;
                }
            }
            if model.model.is_some() {
                let m = model.build().map_err(Error::Config)?;
                if cfg.model.as_ref().is_some_and(|old| old != &m) {
                    note("model");
                }
                cfg.model = Some(m);
            }
            if let Some(v) = h {
                note("h");
                cfg.h = v;
            }
            if let Some(v) = n {
                note("n");
                cfg.n = v;
            }
            if let Some(v) = q {
                note("q");
                cfg.q = Some(v);
            }
            if let Some(v) = test_q {
                note("test-q");
                cfg.test_q = Some(v);
            }
            if let Some(g) = grid {
                note("grid");
                cfg.fit_grid = Some(parse_f64_list(&g).map_err(Error::Config)?);
            }
            if let Some(g) = grid_b {
                note("grid-b");
                cfg.grid_b = Some(parse_f64_list(&g).map_err(Error::Config)?);
            }
            if let Some(v) = k {
                note("k");
                cfg.hill_k = Some(v);
            }
            if let Some(b) = band {
                note("band");
                let v = parse_f64_list(&b).map_err(Error::Config)?;
                if v.len() != 2 {
                    return Err(Error::Config("--band wants lo,hi".into()));
                }
                cfg.band = Some([v[0], v[1]]);
            }
            if let Some(p) = lag_pair {
                note("lag-pair");
                let v = parse_f64_list(&p).map_err(Error::Config)?;
                if v.len() != 2 {
                    return Err(Error::Config("--lag-pair wants a,b".into()));
                }
                cfg.lag_pair = Some([v[0] as usize, v[1] as usize]);
            }
            if let Some(v) = steps {
                note("steps");
                cfg.steps = Some(v);
            }
            if let Some(t) = t_factors {
                note("t-factors");
                cfg.t_factors = Some(parse_f64_list(&t).map_err(Error::Config)?);
            }
            if let Some(g) = y0_grid {
                note("y0-grid");
                cfg.y0_grid = Some(parse_f64_list(&g).map_err(Error::Config)?);
            }
            if let Some(g) = y1_grid {
                note("y1-grid");
                cfg.y1_grid = Some(parse_f64_list(&g).map_err(Error::Config)?);
            }
            if let Some(v) = inner {
                note("inner");
                cfg.inner_samples = Some(v);
            }
            if abs {
                cfg.use_abs = Some(true);
            }
            if let Some(v) = tol {
                note("tol");
                cfg.tolerance = v;
            }
            cfg.seed = cli.seed;
            let report = run_experiment(&cfg)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(p) => {
                    std::fs::write(&p, &json)?;
                    eprintln!("report written to {}", p.display());
                }
                None => print!("{json}"),
            }
            for d in &report.distances {
                eprintln!(
                    "{}: {:.6} (tolerance {:.6}) {}",
                    d.name,
                    d.value,
                    d.tolerance,
                    if d.value <= d.tolerance { "ok" } else { "EXCEEDED" }
                );
            }
            Ok(match report.verdict {
                Verdict::Pass => ExitCode::SUCCESS,
                Verdict::Fail => ExitCode::from(1),
                Verdict::Inconclusive => ExitCode::from(3),
            })
        }
    }
}

fn parse_kind(s: &str) -> cevlab::Result<ExperimentKind> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Config(format!("unknown experiment kind {s:?}")))
}

fn parse_grid(clauses: &[String], h: usize) -> cevlab::Result<Vec<Vec<f64>>> {
    let mut axes = vec![Vec::new(); h + 1];
    for clause in clauses {
        let (name, values) = clause
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("grid clause {clause:?} wants yK=...")))?;
        let k: usize = name
            .strip_prefix('y')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad grid coordinate {name:?}")))?;
        if k > h {
            return Err(Error::Config(format!("grid coordinate {name} beyond horizon {h}")));
        }
        axes[k] = values
            .split(',')
            .map(|p| {
                let p = p.trim();
                if p == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    p.parse::<f64>().map_err(|e| Error::Config(format!("bad value {p:?}: {e}")))
                }
            })
            .collect::<cevlab::Result<Vec<f64>>>()?;
    }
    for axis in axes.iter_mut() {
        if axis.is_empty() {
            *axis = vec![f64::INFINITY];
        }
    }
    Ok(axes)
}

#[allow(clippy::too_many_arguments)]
fn run_estimate(
    block: &cevlab::models::PathBlock,
    op: &str,
    k: Option<usize>,
    coord: usize,
    h: usize,
    grid: Option<String>,
    abs: bool,
    q: Option<f64>,
    at: Option<String>,
) -> cevlab::Result<EstimateReport> {
    let input = serde_json::json!({ "n": block.meta.n, "h": block.meta.h });
    match op {
        "hill" => {
            let col: Vec<f64> = block.column(coord).into_iter().filter(|v| *v > 0.0).collect();
            let k = k.unwrap_or_else(|| default_hill_k(col.len()));
            let a = estimate::hill(&col, k)?;
            Ok(EstimateReport {
                estimator: format!("hill[coord={coord},k={k}]"),
                value: a,
                std_error: Some(estimate::hill_se(a, k)),
                provenance: input,
            })
        }
        "kappa" => {
            let grid = parse_f64_list(
                grid.as_deref().ok_or_else(|| Error::Config("kappa needs --grid".into()))?,
            )
            .map_err(Error::Config)?;
            let fit = estimate::kappa_hat(block, h, &grid, abs)?;
            Ok(EstimateReport {
                estimator: format!("kappa_hat[h={h}]"),
                value: fit.kappa,
                std_error: Some(fit.std_error),
                provenance: serde_json::json!({
                    "input": input,
                    "levels": fit.levels,
                }),
            })
        }
        "cte" => {
            let q = q.ok_or_else(|| Error::Config("cte needs --q".into()))?;
            let tail = TailView::from_block(block, TailKey::X0);
            let (x, count) = tail.threshold_at(q)?;
            let v = estimate::cte_plus_hat(&tail, h, x)?;
            Ok(EstimateReport {
                estimator: format!("cte_plus_hat[h={h},q={q}]"),
                value: v,
                std_error: None,
                provenance: serde_json::json!({
                    "input": input, "threshold": x, "exceedances": count,
                }),
            })
        }
        "cte-sp" => {
            let grid = parse_f64_list(
                grid.as_deref().ok_or_else(|| Error::Config("cte-sp needs --grid".into()))?,
            )
            .map_err(Error::Config)?;
            let q = q.ok_or_else(|| Error::Config("cte-sp needs --q (fit level)".into()))?;
            let x_at = at
                .as_deref()
                .ok_or_else(|| Error::Config("cte-sp needs --at (extrapolation x)".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad --at: {e}")))?;
            let tail = TailView::from_block(block, TailKey::X0);
            let fit = estimate::kappa_hat_from_tail(&tail, h, &grid, abs)?;
            let mut kappas = vec![0.0; h];
            kappas[h - 1] = fit.kappa;
            let cond = tail.conditional_at(q, &Scaling::Power { kappas })?;
            let m = estimate::m_hat(&cond, h)?;
            Ok(EstimateReport {
                estimator: format!("cte_semiparametric[h={h}]"),
                value: cte_semiparametric(x_at, fit.kappa, m),
                std_error: None,
                provenance: serde_json::json!({
                    "input": input, "kappa_hat": fit.kappa, "m_hat": m, "at": x_at,
                }),
            })
        }
        "ecdf" => {
            let q = q.ok_or_else(|| Error::Config("ecdf needs --q".into()))?;
            let ys = parse_f64_list(
                at.as_deref().ok_or_else(|| Error::Config("ecdf needs --at y1,y2,...".into()))?,
            )
            .map_err(Error::Config)?;
            let scaling = match &block.meta.spec {
                Some(spec) => Scaling::for_model(spec, block.meta.h)?,
                None => Scaling::Unit,
            };
            let cond = estimate::conditional_sample(block, q, &scaling)?;
            let points: Vec<serde_json::Value> = ys
                .iter()
                .map(|&y| {
                    serde_json::json!({"y": y, "cdf": estimate::empirical_cdf(&cond, coord, y)})
                })
                .collect();
            Ok(EstimateReport {
                estimator: format!("empirical_cdf[coord={coord},q={q}]"),
                value: f64::NAN,
                std_error: None,
                provenance: serde_json::json!({ "input": input, "points": points }),
            })
        }
        other => Err(Error::Config(format!("unknown estimator {other:?}"))),
    }
}
