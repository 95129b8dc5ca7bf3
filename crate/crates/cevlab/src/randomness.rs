//! Deterministic random sources and the distribution laws shared by all
//! models.
//!
//! Nothing in this crate calls a platform RNG. Every draw is a pure function
//! of a `(seed, stream_id, counter)` triple, so a simulation is reproducible
//! bit for bit no matter how replicates are partitioned across threads:
//! worker count only decides *who* evaluates `uniform_at`, never *what* it
//! returns.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[inline]
fn mix64(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in the open interval (0,1), addressed by
/// `(seed, stream_id, index)`.
///
/// Same triple, same value. Distinct `(stream_id, index)` pairs under one
/// seed behave as independent uniforms for Monte Carlo purposes. The value
/// is built from the top 53 bits of a mixed word, offset by half an ulp so
/// that 0 and 1 are never returned.
#[inline]
pub fn uniform_at(seed: u64, stream_id: u64, index: u64) -> f64 {
    let a = mix64(seed ^ 0x4CF5_AD43_2745_937F);
    let b = mix64(a ^ stream_id.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let c = mix64(b ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    (((c >> 11) as f64) + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Address of a stream of uniforms under one seed.
///
/// `counter` is only a convenience cursor for sequential use; `at` is the
/// pure access path and ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
    pub counter: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream { seed, stream_id, counter: 0 }
    }

    /// Uniform at an explicit counter position.
    #[inline]
    pub fn at(&self, index: u64) -> f64 {
        uniform_at(self.seed, self.stream_id, index)
    }

    /// Sequential draw; advances the cursor.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        let u = self.at(self.counter);
        self.counter += 1;
        u
    }

    /// Stream with the same seed and a shifted stream id. Used to hand each
    /// replicate its own stream: replicate `i` gets `substream(i)`.
    #[inline]
    pub fn substream(&self, offset: u64) -> RandomStream {
        RandomStream::new(self.seed, self.stream_id.wrapping_add(offset))
    }
}

/// Standard normal quantile, shared by every Gaussian sampler in the crate.
#[inline]
pub fn std_normal_quantile(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u)
}

/// Standard normal CDF.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Pareto law with survival `(x/scale)^{-alpha}` on `[scale, infinity)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoLaw {
    pub alpha: f64,
    pub scale: f64,
}

impl ParetoLaw {
    pub fn standard(alpha: f64) -> Self {
        ParetoLaw { alpha, scale: 1.0 }
    }

    /// Quantile `scale * (1-u)^{-1/alpha}`, monotone in `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Domain(format!("pareto quantile needs u in [0,1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        self.scale * (1.0 - u).powf(-1.0 / self.alpha)
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (x / self.scale).powf(-self.alpha)
        }
    }
}

/// Free-function form of the Pareto quantile.
pub fn pareto_quantile(law: ParetoLaw, u: f64) -> Result<f64> {
    law.quantile(u)
}

/// Law of the innovation `eps = E - 1/alpha` with `E` exponential of rate
/// `alpha`, so that `E[eps] = 0` and `exp(eps)` has the exact power tail
/// `P(exp(eps) > x) = e^{-1} x^{-alpha}` for `x >= e^{-1/alpha}`.
///
/// Fixing the innovation family to this law makes every moment constant in
/// the crate closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenteredLogParetoLaw {
    pub alpha: f64,
}

impl CenteredLogParetoLaw {
    /// Innovation from a uniform: `-ln(1-u)/alpha - 1/alpha`.
    #[inline]
    pub fn eps_from_uniform(&self, u: f64) -> f64 {
        -(1.0 - u).ln() / self.alpha - 1.0 / self.alpha
    }

    /// Innovation under the exponential tilt `e^{s eps}`. The tilted law of
    /// `E` is exponential with rate `alpha - s`, so sampling stays exact.
    #[inline]
    pub fn eps_from_uniform_tilted(&self, u: f64, s: f64) -> f64 {
        debug_assert!(s < self.alpha);
        -(1.0 - u).ln() / (self.alpha - s) - 1.0 / self.alpha
    }

    /// CDF of `exp(eps)`: `1 - e^{-1} x^{-alpha}` for `x >= e^{-1/alpha}`.
    #[inline]
    pub fn exp_cdf(&self, x: f64) -> f64 {
        if x <= (-1.0 / self.alpha).exp() {
            0.0
        } else {
            1.0 - (-1.0f64).exp() * x.powf(-self.alpha)
        }
    }

    /// Survival of `exp(eps)`.
    #[inline]
    pub fn exp_survival(&self, x: f64) -> f64 {
        1.0 - self.exp_cdf(x)
    }
}

/// Lognormal law `exp(mu + sigma N)`; all positive moments finite, which is
/// what the lighter-tailed factors of the models require.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalLaw {
    pub mu: f64,
    pub sigma: f64,
}

impl LogNormalLaw {
    pub fn standard() -> Self {
        LogNormalLaw { mu: 0.0, sigma: 1.0 }
    }

    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        (self.mu + self.sigma * std_normal_quantile(u)).exp()
    }

    /// `E[X^s] = exp(s mu + s^2 sigma^2 / 2)`.
    pub fn moment(&self, s: f64) -> f64 {
        (s * self.mu + 0.5 * s * s * self.sigma * self.sigma).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            std_normal_cdf((x.ln() - self.mu) / self.sigma)
        }
    }
}

/// `E[e^{s eps}]` for the centered log-Pareto innovation:
/// `e^{-s/alpha} * alpha / (alpha - s)` for `s < alpha`, infinite otherwise.
///
/// Infinity is a value here, not an error; every Breiman-type constant in the
/// crate is a product of these factors.
#[inline]
pub fn innovation_mgf(alpha: f64, s: f64) -> f64 {
    if s >= alpha {
        f64::INFINITY
    } else {
        (-s / alpha).exp() * alpha / (alpha - s)
    }
}

/// Truncated product of innovation MGFs together with its truncation
/// diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedProduct {
    /// Product over the first `truncation` coefficients.
    pub value: f64,
    /// Relative change when the truncation is doubled; an explicit
    /// truncation-error report.
    pub rel_change_on_doubling: f64,
}

/// `E[exp(s xi)]` for `xi = sum_j phi_j eps_{-j}` truncated at `truncation`
/// terms: the product of `innovation_mgf(alpha, s * phi_j)` for
/// `j = 0, ..., truncation-1`.
///
/// Errors if any factor is infinite, i.e. `s * phi_j >= alpha` for some `j`
/// in range.
pub fn stationary_log_moment(
    alpha: f64,
    coeff: impl Fn(usize) -> f64,
    s: f64,
    truncation: usize,
) -> Result<TruncatedProduct> {
    if truncation == 0 {
        return Err(Error::Domain("truncation must be >= 1".into()));
    }
    let factor = |j: usize| -> Result<f64> {
        let m = innovation_mgf(alpha, s * coeff(j));
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::Domain(format!(
                "E[exp(s phi_j eps)] infinite at j={j}: s*phi_j = {} >= alpha = {alpha}",
                s * coeff(j)
            )))
        }
    };
    let mut value = 1.0;
    for j in 0..truncation {
        value *= factor(j)?;
    }
    let mut doubled = value;
    for j in truncation..2 * truncation {
        doubled *= factor(j)?;
    }
    Ok(TruncatedProduct {
        value,
        rel_change_on_doubling: (doubled / value - 1.0).abs(),
    })
}
