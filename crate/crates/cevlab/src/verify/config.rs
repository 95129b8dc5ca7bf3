//! Experiment configuration: one struct across all experiment kinds, with
//! per-kind required fields checked up front.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Empirical conditional CDF of the lag-h coordinate against the
    /// limiting marginal.
    ConditionalCdf,
    /// Conditioned model paths against the simulated tail chain,
    /// coordinate by coordinate.
    TailChainMatch,
    /// Hill index of `X_0 X_h` against `alpha/(1+kappa_h)`.
    ProductTail,
    /// Rescaled conditional mean against its closed-form limit.
    MomentLimit,
    /// Semiparametric conditional tail expectation extrapolated from a fit
    /// window against the empirical value beyond it.
    Cte,
    /// Scaling-exponent regression against the theoretical exponent (or an
    /// ordering pattern across lags).
    KappaRecovery,
    /// Fraction of tail-chain paths absorbed at zero by step k against the
    /// geometric law.
    Absorption,
    /// Scaling identity of the limit measure under `t`-dilation.
    Homogeneity,
    /// Linear-process evaluator against the AR(1) evaluator for geometric
    /// coefficients.
    Section4Reduction,
    /// The family without a conditional limit: the exponent regression must
    /// disagree across disjoint threshold grids.
    NegativeControl,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ConditionalCdf => "conditional-cdf",
            ExperimentKind::TailChainMatch => "tail-chain-match",
            ExperimentKind::ProductTail => "product-tail",
            ExperimentKind::MomentLimit => "moment-limit",
            ExperimentKind::Cte => "cte",
            ExperimentKind::KappaRecovery => "kappa-recovery",
            ExperimentKind::Absorption => "absorption",
            ExperimentKind::Homogeneity => "homogeneity",
            ExperimentKind::Section4Reduction => "section4-reduction",
            ExperimentKind::NegativeControl => "negative-control",
        }
    }
}

fn default_h() -> usize {
    1
}

fn default_seed() -> u64 {
    42
}

/// Configuration of one verification experiment. Fields beyond `kind`,
/// `tolerance` and `seed` are kind-specific; `validate` names anything
/// missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default = "default_h")]
    pub h: usize,
    #[serde(default)]
    pub n: u64,
    /// Conditioning quantile level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Threshold grid for exponent fits (and the negative control's first
    /// grid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_grid: Option<Vec<f64>>,
    /// Second, disjoint grid of the negative control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_b: Option<Vec<f64>>,
    /// Evaluation level of the extrapolated conditional tail expectation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_q: Option<f64>,
    /// Hill order-statistic count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hill_k: Option<usize>,
    /// Acceptance band for the exponent estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    /// Two lags whose exponent estimates must come out in decreasing order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_pair: Option<[usize; 2]>,
    /// Steps checked by the absorption experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Dilation factors of the homogeneity check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_factors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y1_grid: Option<Vec<f64>>,
    /// Inner Monte Carlo size of limit evaluators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_samples: Option<usize>,
    /// Estimate scaling exponents on magnitudes (defaults to the model's
    /// signedness).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub use_abs: Option<bool>,
    pub tolerance: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl ExperimentConfig {
    /// A blank config for `kind`; callers fill the fields the kind needs.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            model: None,
            h: 1,
            n: 0,
            q: None,
            fit_grid: None,
            grid_b: None,
            test_q: None,
            hill_k: None,
            band: None,
            lag_pair: None,
            steps: None,
            t_factors: None,
            y0_grid: None,
            y1_grid: None,
            inner_samples: None,
            use_abs: None,
            tolerance: 0.0,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut missing = Vec::new();
        let mut need = |ok: bool, what: &str| {
            if !ok {
                missing.push(what.to_string());
            }
        };
        if self.tolerance <= 0.0 && self.kind != ExperimentKind::NegativeControl {
            need(false, "tolerance > 0");
        }
        if self.h == 0 {
            need(false, "h >= 1");
        }
        use ExperimentKind::*;
        match self.kind {
            ConditionalCdf | TailChainMatch | MomentLimit => {
                need(self.model.is_some(), "model");
                need(self.n > 0, "n");
                need(self.q.is_some(), "q");
            }
            ProductTail => {
                need(self.model.is_some(), "model");
                need(self.n > 0, "n");
                need(self.hill_k.is_some(), "hill_k");
            }
            Cte => {
                need(self.model.is_some(), "model");
                need(self.n > 0, "n");
                need(self.q.is_some(), "q");
                need(self.test_q.is_some(), "test_q");
                need(self.fit_grid.as_ref().is_some_and(|g| g.len() >= 3), "fit_grid (>= 3 levels)");
            }
            KappaRecovery => {
                need(self.model.is_some(), "model");
                need(self.n > 0, "n");
                need(self.fit_grid.as_ref().is_some_and(|g| g.len() >= 3), "fit_grid (>= 3 levels)");
                need(self.band.is_some() || self.lag_pair.is_some(), "band or lag_pair");
            }
            Absorption => {
                need(self.model.is_some(), "model (switching family)");
                need(self.n > 0, "n");
                need(self.steps.is_some_and(|s| s >= 1), "steps");
            }
            Homogeneity => {
                need(self.model.is_some(), "model");
                need(self.t_factors.as_ref().is_some_and(|t| !t.is_empty()), "t_factors");
            }
            Section4Reduction => {
                need(self.model.is_some(), "model (exp_linear with a geometric rule)");
                need(self.y0_grid.as_ref().is_some_and(|g| !g.is_empty()), "y0_grid");
                need(self.y1_grid.as_ref().is_some_and(|g| !g.is_empty()), "y1_grid");
            }
            NegativeControl => {
                need(self.model.is_some(), "model");
                need(self.n > 0, "n");
                need(self.fit_grid.as_ref().is_some_and(|g| g.len() >= 3), "fit_grid (>= 3 levels)");
                need(self.grid_b.as_ref().is_some_and(|g| g.len() >= 3), "grid_b (>= 3 levels)");
                need(self.tolerance > 0.0, "tolerance (minimum gap)");
            }
        }
        if let Some(m) = &self.model {
            if let Err(Error::InvalidSpec(msgs)) = m.validate() {
                missing.extend(msgs);
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{} experiment config invalid: {}",
                self.kind.as_str(),
                missing.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_missing_fields() {
        let cfg = ExperimentConfig::new(ExperimentKind::ConditionalCdf);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("model") && err.contains("q") && err.contains("tolerance"), "{err}");
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ProductTail);
        cfg.model = Some(ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 });
        cfg.n = 1000;
        cfg.hill_k = Some(50);
        cfg.tolerance = 0.1;
        let s = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(s.contains("\"kind\": \"product-tail\""));
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn model_violations_propagate() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ConditionalCdf);
        cfg.model = Some(ModelSpec::ExpAr1 { alpha: 2.0, phi: 1.5 });
        cfg.n = 10;
        cfg.q = Some(0.9);
        cfg.tolerance = 0.1;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("phi out of [0,1)"), "{err}");
    }
}
