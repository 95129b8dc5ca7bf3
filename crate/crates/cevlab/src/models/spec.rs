use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomness::LogNormalLaw;

/// Coefficient rule for the exponential linear process. The lag-0
/// coefficient is always 1; the rule describes lags `j >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CoeffRule {
    /// `phi_j = phi^j`.
    Geometric { phi: f64 },
    /// `phi_j = c (j+1)^{-gamma}` for `j >= 1`; square-summable only for
    /// `gamma > 1/2`.
    LongMemory { c: f64, gamma: f64 },
    /// Explicit coefficients for lags 1, 2, ...; zero beyond the list.
    Explicit { coeffs: Vec<f64> },
}

impl CoeffRule {
    /// Coefficient at lag `j` (`coeff(0) == 1` for every rule).
    pub fn coeff(&self, j: usize) -> f64 {
        if j == 0 {
            return 1.0;
        }
        match self {
            CoeffRule::Geometric { phi } => phi.powi(j as i32),
            CoeffRule::LongMemory { c, gamma } => c * ((j + 1) as f64).powf(-gamma),
            CoeffRule::Explicit { coeffs } => coeffs.get(j - 1).copied().unwrap_or(0.0),
        }
    }
}

/// Innovation law for the heavy-volatility stochastic volatility model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ZLaw {
    #[default]
    StdGaussian,
    LogNormal { mu: f64, sigma: f64 },
}

impl ZLaw {
    pub(crate) fn quantile(&self, u: f64) -> f64 {
        match self {
            ZLaw::StdGaussian => crate::randomness::std_normal_quantile(u),
            ZLaw::LogNormal { mu, sigma } => LogNormalLaw { mu: *mu, sigma: *sigma }.quantile(u),
        }
    }

    /// `E[(Z)_+^p]`, finite for every `p >= 0`.
    pub fn positive_part_moment(&self, p: f64) -> f64 {
        match self {
            // 2^{p/2-1} Gamma((p+1)/2) / sqrt(pi)
            ZLaw::StdGaussian => {
                2.0f64.powf(p / 2.0 - 1.0) * statrs::function::gamma::gamma((p + 1.0) / 2.0)
                    / std::f64::consts::PI.sqrt()
            }
            ZLaw::LogNormal { mu, sigma } => LogNormalLaw { mu: *mu, sigma: *sigma }.moment(p),
        }
    }
}

/// Tagged union of the model families.
///
/// The `alpha` parameter of the exponential families is the tail index of
/// the innovation `exp(eps)`; tail equivalence makes it the marginal index
/// as well. `z_alpha` plays the same role for heavy-tailed innovations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `V_t = exp(xi_t)`, `xi_t = phi xi_{t-1} + eps_t`.
    ExpAr1 { alpha: f64, phi: f64 },
    /// Multiplicative stochastic unit root: with probability `eta` the
    /// autoregressive part is replaced by 1 before multiplying by `R_t`.
    /// Starts from the Pareto(alpha) initial law.
    SwitchingExpAr1 { alpha: f64, phi: f64, eta: f64, r_law: LogNormalLaw },
    /// `X_t = exp(xi_t)`, `xi_t = sum_j phi_j eps_{t-j}` truncated at
    /// `truncation` terms (chosen automatically when `None`).
    ExpLinear {
        alpha: f64,
        coeffs: CoeffRule,
        #[serde(default)]
        truncation: Option<usize>,
    },
    /// `X_t = exp(xi_t) Z_t` with the AR(1) `xi` and a light-tailed `Z`.
    SvHeavyVol {
        alpha: f64,
        phi: f64,
        #[serde(default)]
        z_law: ZLaw,
    },
    /// `X_t = sigma_t Z_t`, `Z` standard Pareto(z_alpha),
    /// `sigma_t = exp(zeta_t)` with a Gaussian AR(1) `zeta` independent
    /// of `Z`.
    SvHeavyInnov { z_alpha: f64, vol_rho: f64, vol_sigma: f64 },
    /// Leverage: `X_t = sigma_t Z_t`, `Z_t` = Rademacher sign times
    /// Pareto(z_alpha) modulus, `sigma_t = exp(sum_j c_j eta_{t-j})` with
    /// `eta_t = ln|Z_t| - E ln|Z_t|` built from the same innovations.
    SvLeverage { z_alpha: f64, coeffs: Vec<f64> },
    /// `X_t = exp(c xi_t^2)` with a standard Gaussian AR(1) `xi`; regularly
    /// varying but without a limiting conditional law. Negative control.
    GaussianSquareExp { c: f64, ar1_rho: f64 },
}

/// Tail sum threshold used to pick the truncation of geometric series.
const GEOMETRIC_TAIL_TOL: f64 = 1e-6;
/// Default truncation for long-memory coefficient rules.
const LONG_MEMORY_TRUNCATION: usize = 2000;

/// Number of series terms kept when presampling a stationary state:
/// geometric rules keep terms until the coefficient tail sum drops below
/// 1e-6, long-memory rules keep 2000 terms, explicit lists keep the list.
pub fn default_truncation(rule: &CoeffRule) -> usize {
    match rule {
        CoeffRule::Geometric { phi } => geometric_truncation(*phi),
        CoeffRule::LongMemory { .. } => LONG_MEMORY_TRUNCATION,
        CoeffRule::Explicit { coeffs } => coeffs.len() + 1,
    }
}

pub(crate) fn geometric_truncation(phi: f64) -> usize {
    if phi <= 0.0 {
        return 1;
    }
    // smallest J with phi^J / (1 - phi) < tol
    let j = ((GEOMETRIC_TAIL_TOL * (1.0 - phi)).ln() / phi.ln()).ceil();
    (j as usize).clamp(1, 100_000)
}

impl ModelSpec {
    /// Checks every parameter invariant, returning all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                errs.push(msg.to_string());
            }
        };
        match self {
            ModelSpec::ExpAr1 { alpha, phi } => {
                check(*alpha > 0.0, "alpha must be positive");
                check((0.0..1.0).contains(phi), "phi out of [0,1)");
            }
            ModelSpec::SwitchingExpAr1 { alpha, phi, eta, r_law } => {
                check(*alpha > 0.0, "alpha must be positive");
                check(*phi > 0.0, "phi must be positive");
                check((0.0..=1.0).contains(eta), "eta out of [0,1]");
                check(r_law.sigma > 0.0, "r_law sigma must be positive");
            }
            ModelSpec::ExpLinear { alpha, coeffs, truncation } => {
                check(*alpha > 0.0, "alpha must be positive");
                match coeffs {
                    CoeffRule::Geometric { phi } => {
                        check((0.0..1.0).contains(phi), "phi out of [0,1)");
                    }
                    CoeffRule::LongMemory { c, gamma } => {
                        check(*gamma > 0.5, "gamma <= 1/2 breaks square-summability");
                        check(*c > 0.0 && *c < 1.0, "c out of (0,1)");
                    }
                    CoeffRule::Explicit { coeffs } => {
                        for (i, &c) in coeffs.iter().enumerate() {
                            if !(0.0..1.0).contains(&c) {
                                errs.push(format!("coefficient {} out of [0,1) at lag {}", c, i + 1));
                            }
                        }
                    }
                }
                if let Some(t) = truncation {
                    if *t == 0 {
                        errs.push("truncation must be >= 1".into());
                    }
                }
            }
            ModelSpec::SvHeavyVol { alpha, phi, .. } => {
                check(*alpha > 0.0, "alpha must be positive");
                check((0.0..1.0).contains(phi), "phi out of [0,1)");
            }
            ModelSpec::SvHeavyInnov { z_alpha, vol_rho, vol_sigma } => {
                check(*z_alpha > 0.0, "z_alpha must be positive");
                check(vol_rho.abs() < 1.0, "vol_rho out of (-1,1)");
                check(*vol_sigma > 0.0, "vol_sigma must be positive");
            }
            ModelSpec::SvLeverage { z_alpha, coeffs } => {
                check(*z_alpha > 0.0, "z_alpha must be positive");
                check(!coeffs.is_empty(), "coeffs must be nonempty");
                for (i, &c) in coeffs.iter().enumerate() {
                    if !(c > 0.0 && c < 1.0) {
                        errs.push(format!("coefficient {} out of (0,1) at lag {}", c, i + 1));
                    }
                }
            }
            ModelSpec::GaussianSquareExp { c, ar1_rho } => {
                check(*c > 0.0 && *c < 0.5, "c out of (0, 1/2)");
                check(ar1_rho.abs() < 1.0 && *ar1_rho != 0.0, "ar1_rho out of (-1,1)\\{0}");
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(errs))
        }
    }

    /// Marginal right tail index.
    pub fn theoretical_alpha(&self) -> f64 {
        match self {
            ModelSpec::ExpAr1 { alpha, .. }
            | ModelSpec::SwitchingExpAr1 { alpha, .. }
            | ModelSpec::ExpLinear { alpha, .. }
            | ModelSpec::SvHeavyVol { alpha, .. } => *alpha,
            ModelSpec::SvHeavyInnov { z_alpha, .. } | ModelSpec::SvLeverage { z_alpha, .. } => {
                *z_alpha
            }
            ModelSpec::GaussianSquareExp { c, .. } => 1.0 / (2.0 * c),
        }
    }

    /// Conditional scaling exponent at lag `h >= 1`; `None` for the negative
    /// control, whose conditional laws have no scaling limit.
    pub fn theoretical_kappa(&self, h: usize) -> Option<f64> {
        assert!(h >= 1, "kappa is defined for lags h >= 1");
        match self {
            ModelSpec::ExpAr1 { phi, .. }
            | ModelSpec::SwitchingExpAr1 { phi, .. }
            | ModelSpec::SvHeavyVol { phi, .. } => Some(phi.powi(h as i32)),
            ModelSpec::ExpLinear { coeffs, .. } => Some(coeffs.coeff(h)),
            ModelSpec::SvHeavyInnov { .. } => Some(0.0),
            ModelSpec::SvLeverage { coeffs, .. } => {
                Some(coeffs.get(h - 1).copied().unwrap_or(0.0))
            }
            ModelSpec::GaussianSquareExp { .. } => None,
        }
    }

    /// Scaling function `b_h(x) = x^{kappa_h}` (pure power tails by
    /// construction).
    pub fn scaling_b(&self, h: usize, x: f64) -> Result<f64> {
        let kappa = self.theoretical_kappa(h).ok_or_else(|| {
            Error::Unsupported("no conditional scaling exponent for this family".into())
        })?;
        Ok(x.powf(kappa))
    }

    /// The exponents `(kappa_1, ..., kappa_h)`, when defined.
    pub fn kappa_vector(&self, h: usize) -> Option<Vec<f64>> {
        (1..=h).map(|j| self.theoretical_kappa(j)).collect()
    }

    /// True when the marginal takes negative values (sign-symmetric
    /// innovations); estimators of the scaling exponent then work on
    /// magnitudes.
    pub fn is_signed(&self) -> bool {
        match self {
            ModelSpec::SvHeavyVol { z_law, .. } => matches!(z_law, ZLaw::StdGaussian),
            ModelSpec::SvLeverage { .. } => true,
            _ => false,
        }
    }
}
