//! Closed-form limits of the rescaled conditional moments
//! `lim E[(X_h)_+ / x^{kappa_h} | X_0 > x]`, one formula per family, all
//! built from products of innovation MGFs and elementary distribution
//! moments.

use crate::error::{Error, Result};
use crate::models::{default_truncation, ModelSpec};
use crate::randomness::{innovation_mgf, stationary_log_moment};

/// Truncation for the geometric moment products: far past the point where a
/// factor differs from 1 by double rounding.
fn geometric_moment_truncation(phi: f64) -> usize {
    if phi <= 0.0 {
        return 1;
    }
    ((1e-14f64.ln() / phi.ln()).ceil() as usize).clamp(1, 4000)
}

fn finite_or_moment_error(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} is infinite: moment condition fails")))
    }
}

/// Limiting rescaled conditional expectation of the positive part at lag
/// `h`. Requires a marginal tail index above 1.
pub fn cond_moment_limit(spec: &ModelSpec, h: usize) -> Result<f64> {
    assert!(h >= 1);
    let alpha = spec.theoretical_alpha();
    if alpha <= 1.0 {
        return Err(Error::Unsupported(format!(
            "conditional moment limits need alpha > 1, got alpha = {alpha}"
        )));
    }
    match spec {
        ModelSpec::ExpAr1 { alpha, phi } => {
            let kappa = phi.powi(h as i32);
            // alpha E[V_0] / ((alpha - kappa) E[V_0^kappa]) with the
            // stationary moments as truncated products
            let t = geometric_moment_truncation(*phi);
            let coeff = |j: usize| phi.powi(j as i32);
            let ev = stationary_log_moment(*alpha, coeff, 1.0, t)?.value;
            let evk = stationary_log_moment(*alpha, coeff, kappa, t)?.value;
            Ok(alpha * ev / ((alpha - kappa) * evk))
        }
        ModelSpec::SwitchingExpAr1 { alpha, phi, eta, r_law } => {
            let kappa = phi.powf(h as f64);
            if kappa >= *alpha {
                return Err(Error::Unsupported(format!(
                    "kappa_h = {kappa} >= alpha = {alpha}: no finite moment limit"
                )));
            }
            // tail-chain form: alpha/(alpha-kappa) prod_{i<h} E[W^{phi^i}],
            // W = (1-eta) R + eta delta_0
            let mut prod = 1.0;
            for i in 0..h {
                prod *= (1.0 - eta) * r_law.moment(phi.powi(i as i32));
            }
            Ok(alpha / (alpha - kappa) * prod)
        }
        ModelSpec::ExpLinear { alpha, coeffs, truncation } => {
            let t = truncation.unwrap_or_else(|| default_truncation(coeffs)).max(h + 1);
            let kappa = coeffs.coeff(h);
            if kappa >= *alpha {
                return Err(Error::Unsupported(format!(
                    "kappa_h = {kappa} >= alpha = {alpha}: no finite moment limit"
                )));
            }
            // alpha/(alpha-kappa) E[e^{xi_h^* + (alpha-kappa) xi_0^*}] /
            // E[e^{alpha xi_0^*}], all three as innovation MGF products
            let a = alpha - kappa;
            let mut num = 1.0;
            for i in 0..h {
                num *= finite_or_moment_error(
                    innovation_mgf(*alpha, coeffs.coeff(i)),
                    "E[exp(phi_i eps)]",
                )?;
            }
            let mut cross = 1.0;
            let mut den = 1.0;
            for j in 1..t {
                let cj = coeffs.coeff(j);
                cross *= finite_or_moment_error(
                    innovation_mgf(*alpha, coeffs.coeff(h + j) + a * cj),
                    "cross moment factor",
                )?;
                den *= finite_or_moment_error(innovation_mgf(*alpha, alpha * cj), "E[exp(alpha xi_0^*)]")?;
            }
            Ok(alpha / (alpha - kappa) * num * cross / den)
        }
        ModelSpec::SvHeavyVol { alpha, phi, z_law } => {
            let kappa = phi.powi(h as i32);
            let t = geometric_moment_truncation(*phi);
            let coeff = |j: usize| phi.powi(j as i32);
            let ev = stationary_log_moment(*alpha, coeff, 1.0, t)?.value;
            let evk = stationary_log_moment(*alpha, coeff, kappa, t)?.value;
            let z_plus = z_law.positive_part_moment(1.0);
            let z_plus_ak = z_law.positive_part_moment(alpha - kappa);
            let z_plus_a = z_law.positive_part_moment(*alpha);
            Ok(alpha * z_plus_ak * z_plus * ev / ((alpha - kappa) * z_plus_a * evk))
        }
        ModelSpec::SvHeavyInnov { z_alpha, vol_rho, vol_sigma } => {
            // kappa = 0: E[(Z)_+] E[sigma_h sigma_0^alpha] / E[sigma_0^alpha]
            let tau2 = vol_sigma * vol_sigma / (1.0 - vol_rho * vol_rho);
            let z_plus = z_alpha / (z_alpha - 1.0);
            Ok(z_plus * (0.5 * tau2 * (1.0 + 2.0 * z_alpha * vol_rho.powi(h as i32))).exp())
        }
        ModelSpec::SvLeverage { z_alpha, coeffs } => {
            let kappa = coeffs.get(h - 1).copied().unwrap_or(0.0);
            let a = z_alpha - kappa;
            let c = |j: usize| {
                if j >= 1 {
                    coeffs.get(j - 1).copied().unwrap_or(0.0)
                } else {
                    0.0
                }
            };
            // E[(Z)_+] for a Rademacher sign on a Pareto modulus
            let z_plus = 0.5 * z_alpha / (z_alpha - 1.0);
            let mut num = (-c(h) / z_alpha).exp();
            for i in 1..h {
                num *= finite_or_moment_error(innovation_mgf(*z_alpha, c(i)), "E[exp(c_i eta)]")?;
            }
            let mut den = 1.0;
            for j in 1..=coeffs.len() {
                num *= finite_or_moment_error(
                    innovation_mgf(*z_alpha, c(h + j) + a * c(j)),
                    "cross moment factor",
                )?;
                den *= finite_or_moment_error(
                    innovation_mgf(*z_alpha, z_alpha * c(j)),
                    "E[sigma_0^alpha]",
                )?;
            }
            Ok(z_alpha * z_plus * num / ((z_alpha - kappa) * den))
        }
        ModelSpec::GaussianSquareExp { .. } => Err(Error::Unsupported(
            "the Gaussian-square family has no limiting conditional law".into(),
        )),
    }
}
