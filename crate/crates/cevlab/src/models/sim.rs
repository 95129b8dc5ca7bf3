//! Path simulation. One replicate = one stream; within a replicate every
//! uniform has a fixed counter slot, so a row is a pure function of
//! `(spec, h, seed, stream_id)` and the block is independent of how rows are
//! scheduled across threads.

use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::Result;
use crate::models::block::{BlockMeta, PathBlock};
use crate::models::spec::{default_truncation, geometric_truncation, ModelSpec, ZLaw};
use crate::randomness::{
    std_normal_quantile, CenteredLogParetoLaw, LogNormalLaw, ParetoLaw, RandomStream,
};

/// Rows per rayon work item; fixed so that reductions never depend on the
/// worker count.
pub(crate) const ROW_CHUNK: usize = 1 << 14;

/// Saturate non-finite values to the float maximum and count them instead of
/// dropping the row.
#[inline]
fn clamp_overflow(x: f64, saturated: &mut u64) -> f64 {
    if x.is_finite() {
        x
    } else {
        *saturated += 1;
        f64::MAX
    }
}

/// Precomputed per-spec state reused across rows.
enum Gen {
    ExpAr1 {
        law: CenteredLogParetoLaw,
        phi: f64,
        presample: usize,
    },
    ExpLinear {
        law: CenteredLogParetoLaw,
        coeffs: Vec<f64>,
    },
    Switching {
        x0: ParetoLaw,
        phi: f64,
        eta: f64,
        r_law: LogNormalLaw,
    },
    SvHeavyVol {
        law: CenteredLogParetoLaw,
        phi: f64,
        presample: usize,
        z_law: ZLaw,
    },
    SvHeavyInnov {
        z: ParetoLaw,
        rho: f64,
        sigma: f64,
        stat_sd: f64,
    },
    SvLeverage {
        modulus: ParetoLaw,
        coeffs: Vec<f64>,
        mean_log_abs_z: f64,
    },
    GaussSq {
        c: f64,
        rho: f64,
        innov_sd: f64,
    },
}

impl Gen {
    fn new(spec: &ModelSpec) -> Gen {
        match spec {
            ModelSpec::ExpAr1 { alpha, phi } => Gen::ExpAr1 {
                law: CenteredLogParetoLaw { alpha: *alpha },
                phi: *phi,
                presample: geometric_truncation(*phi),
            },
            ModelSpec::ExpLinear { alpha, coeffs, truncation } => {
                let j = truncation.unwrap_or_else(|| default_truncation(coeffs));
                Gen::ExpLinear {
                    law: CenteredLogParetoLaw { alpha: *alpha },
                    coeffs: (0..j).map(|k| coeffs.coeff(k)).collect(),
                }
            }
            ModelSpec::SwitchingExpAr1 { alpha, phi, eta, r_law } => Gen::Switching {
                x0: ParetoLaw::standard(*alpha),
                phi: *phi,
                eta: *eta,
                r_law: *r_law,
            },
            ModelSpec::SvHeavyVol { alpha, phi, z_law } => Gen::SvHeavyVol {
                law: CenteredLogParetoLaw { alpha: *alpha },
                phi: *phi,
                presample: geometric_truncation(*phi),
                z_law: *z_law,
            },
            ModelSpec::SvHeavyInnov { z_alpha, vol_rho, vol_sigma } => Gen::SvHeavyInnov {
                z: ParetoLaw::standard(*z_alpha),
                rho: *vol_rho,
                sigma: *vol_sigma,
                stat_sd: vol_sigma / (1.0 - vol_rho * vol_rho).sqrt(),
            },
            ModelSpec::SvLeverage { z_alpha, coeffs } => Gen::SvLeverage {
                modulus: ParetoLaw::standard(*z_alpha),
                coeffs: coeffs.clone(),
                mean_log_abs_z: 1.0 / z_alpha,
            },
            ModelSpec::GaussianSquareExp { c, ar1_rho } => Gen::GaussSq {
                c: *c,
                rho: *ar1_rho,
                innov_sd: (1.0 - ar1_rho * ar1_rho).sqrt(),
            },
        }
    }

    /// Fills `out` (length `h+1`) with one replicate and returns the number
    /// of saturated values.
    fn fill_row(&self, rs: &RandomStream, out: &mut [f64]) -> u64 {
        let h = out.len() - 1;
        let mut sat = 0u64;
        match self {
            Gen::ExpAr1 { law, phi, presample } => {
                // counters 0..presample: series terms of xi_0 (newest first);
                // counters presample..presample+h: eps_1..eps_h
                let mut xi = 0.0;
                let mut w = 1.0;
                for j in 0..*presample {
                    xi += w * law.eps_from_uniform(rs.at(j as u64));
                    w *= phi;
                }
                out[0] = clamp_overflow(xi.exp(), &mut sat);
                for t in 1..=h {
                    xi = phi * xi + law.eps_from_uniform(rs.at((*presample + t - 1) as u64));
                    out[t] = clamp_overflow(xi.exp(), &mut sat);
                }
            }
            Gen::ExpLinear { law, coeffs } => {
                // eps_s for s = -(J-1)..=h at counter s + J - 1
                let j = coeffs.len();
                let mut eps = vec![0.0; j + h];
                for (idx, e) in eps.iter_mut().enumerate() {
                    *e = law.eps_from_uniform(rs.at(idx as u64));
                }
                for (t, slot) in out.iter_mut().enumerate() {
                    // xi_t = sum_k phi_k eps_{t-k}; eps_{t-k} sits at index t-k+J-1
                    let mut xi = 0.0;
                    for (k, &phi_k) in coeffs.iter().enumerate() {
                        xi += phi_k * eps[t + j - 1 - k];
                    }
                    *slot = clamp_overflow(xi.exp(), &mut sat);
                }
            }
            Gen::Switching { x0, phi, eta, r_law } => {
                // counter 0: X_0; counters 2t-1, 2t: switch uniform and R_t
                let mut x = x0.quantile_unchecked(rs.at(0));
                out[0] = clamp_overflow(x, &mut sat);
                for t in 1..=h {
                    let switch = rs.at((2 * t - 1) as u64) < *eta;
                    let r = r_law.quantile(rs.at((2 * t) as u64));
                    x = if switch { r } else { r * x.powf(*phi) };
                    out[t] = clamp_overflow(x, &mut sat);
                    x = out[t];
                }
            }
            Gen::SvHeavyVol { law, phi, presample, z_law } => {
                // AR(1) xi as in ExpAr1, then Z_t at counters presample+h+t
                let mut xi = 0.0;
                let mut w = 1.0;
                for j in 0..*presample {
                    xi += w * law.eps_from_uniform(rs.at(j as u64));
                    w *= phi;
                }
                let z_base = (*presample + h) as u64;
                let z0 = z_law.quantile(rs.at(z_base));
                out[0] = clamp_overflow(xi.exp() * z0, &mut sat);
                for t in 1..=h {
                    xi = phi * xi + law.eps_from_uniform(rs.at((*presample + t - 1) as u64));
                    let z = z_law.quantile(rs.at(z_base + t as u64));
                    out[t] = clamp_overflow(xi.exp() * z, &mut sat);
                }
            }
            Gen::SvHeavyInnov { z, rho, sigma, stat_sd } => {
                // counters 0..=h: volatility normals; h+1..=2h+1: innovations
                let mut zeta = stat_sd * std_normal_quantile(rs.at(0));
                for t in 0..=h {
                    if t > 0 {
                        zeta = rho * zeta + sigma * std_normal_quantile(rs.at(t as u64));
                    }
                    let zt = z.quantile_unchecked(rs.at((h + 1 + t) as u64));
                    out[t] = clamp_overflow(zeta.exp() * zt, &mut sat);
                }
            }
            Gen::SvLeverage { modulus, coeffs, mean_log_abs_z } => {
                // Z_s for s = -J..=h; modulus at counter 2(s+J), sign at
                // 2(s+J)+1. eta_s feeds sigma_{s+1}, ..., sigma_{s+J}.
                let j = coeffs.len();
                let mut eta = vec![0.0; j + h + 1];
                let mut z = vec![0.0; h + 1];
                for s in 0..(j + h + 1) {
                    let m = modulus.quantile_unchecked(rs.at((2 * s) as u64));
                    let sign = if rs.at((2 * s + 1) as u64) < 0.5 { -1.0 } else { 1.0 };
                    eta[s] = m.ln() - mean_log_abs_z;
                    let t = s as i64 - j as i64;
                    if t >= 0 {
                        z[t as usize] = sign * m;
                    }
                }
                for (t, slot) in out.iter_mut().enumerate() {
                    // sigma_t = exp(sum_k c_k eta_{t-k}); eta_{t-k} at index t+j-k
                    let mut log_sigma = 0.0;
                    for (k, &c) in coeffs.iter().enumerate() {
                        log_sigma += c * eta[t + j - (k + 1)];
                    }
                    *slot = clamp_overflow(log_sigma.exp() * z[t], &mut sat);
                }
            }
            Gen::GaussSq { c, rho, innov_sd } => {
                let mut xi = std_normal_quantile(rs.at(0));
                out[0] = clamp_overflow((c * xi * xi).exp(), &mut sat);
                for t in 1..=h {
                    xi = rho * xi + innov_sd * std_normal_quantile(rs.at(t as u64));
                    out[t] = clamp_overflow((c * xi * xi).exp(), &mut sat);
                }
            }
        }
        sat
    }
}

/// Simulates rows `lo..hi` of the block into a freshly allocated buffer.
/// Pure in all arguments; the streaming collectors use this to work through
/// far more rows than fit in memory.
pub fn simulate_rows_range(
    spec: &ModelSpec,
    h: usize,
    lo: u64,
    hi: u64,
    stream: &RandomStream,
) -> (Vec<f64>, u64) {
    let gen = Gen::new(spec);
    let width = h + 1;
    let mut data = vec![0.0; (hi - lo) as usize * width];
    let mut sat = 0u64;
    for (i, row) in data.chunks_mut(width).enumerate() {
        let rs = stream.substream(lo + i as u64);
        sat += gen.fill_row(&rs, row);
    }
    (data, sat)
}

/// Simulates a full block of `n` replicates of `(X_0, ..., X_h)`.
///
/// Replicate `i` uses `stream.substream(i)`, so output is bitwise identical
/// for any worker count.
pub fn simulate_block(
    spec: &ModelSpec,
    h: usize,
    n: usize,
    stream: &RandomStream,
) -> Result<PathBlock> {
    spec.validate()?;
    assert!(h >= 1 && n >= 1, "simulate_block needs h >= 1 and n >= 1");
    let gen = Gen::new(spec);
    let width = h + 1;
    let mut data = vec![0.0; n * width];
    let saturation = AtomicU64::new(0);
    data.par_chunks_mut(ROW_CHUNK * width).enumerate().for_each(|(ci, chunk)| {
        let base = (ci * ROW_CHUNK) as u64;
        let mut sat = 0u64;
        for (i, row) in chunk.chunks_mut(width).enumerate() {
            let rs = stream.substream(base + i as u64);
            sat += gen.fill_row(&rs, row);
        }
        saturation.fetch_add(sat, Ordering::Relaxed);
    });
    Ok(PathBlock {
        meta: BlockMeta {
            spec: Some(spec.clone()),
            seed: Some(stream.seed),
            stream_base: Some(stream.stream_id),
            n,
            h,
            saturation: saturation.into_inner(),
        },
        data,
    })
}

/// Exponential AR(1) path from explicit innovations: `V_0 = exp(xi_0)` and
/// `xi_t = phi xi_{t-1} + eps_t`. The degenerate-innovation fixed point
/// (`eps = 0`, `xi_0 = 0` gives a constant path) is exercised in tests.
pub fn expar1_path_from_innovations(xi0: f64, phi: f64, eps: &[f64]) -> Vec<f64> {
    let mut path = Vec::with_capacity(eps.len() + 1);
    let mut xi = xi0;
    path.push(xi.exp());
    for &e in eps {
        xi = phi * xi + e;
        path.push(xi.exp());
    }
    path
}

/// Switching path from explicit driver sequences.
pub fn switching_path_from_innovations(
    x0: f64,
    phi: f64,
    eta: f64,
    switch_u: &[f64],
    r: &[f64],
) -> Vec<f64> {
    assert_eq!(switch_u.len(), r.len());
    let mut path = Vec::with_capacity(r.len() + 1);
    let mut x = x0;
    path.push(x);
    for (&u, &rt) in switch_u.iter().zip(r) {
        x = if u < eta { rt } else { rt * x.powf(phi) };
        path.push(x);
    }
    path
}

/// Exponential linear path from explicit innovations. `eps` holds
/// `eps_{-(J-1)}, ..., eps_h` where `J = coeffs.len()`.
pub fn explinear_path_from_innovations(coeffs: &[f64], eps: &[f64], h: usize) -> Vec<f64> {
    let j = coeffs.len();
    assert_eq!(eps.len(), j + h);
    (0..=h)
        .map(|t| {
            let xi: f64 =
                coeffs.iter().enumerate().map(|(k, &c)| c * eps[t + j - 1 - k]).sum();
            xi.exp()
        })
        .collect()
}
