//! The limiting tail process of the Markov families: `Y_0` standard Pareto,
//! `Y_t = Y_{t-1}^kappa W_t` with `W_t` i.i.d., possibly with an atom at
//! zero (switching models absorb at a geometric time). This is the reference
//! law that conditioned model simulations must match.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{BlockMeta, ModelSpec, PathBlock};
use crate::randomness::{CenteredLogParetoLaw, LogNormalLaw, ParetoLaw, RandomStream};
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

/// Law of the multiplicative step `W` (before mixing in absorption).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "w", rename_all = "snake_case")]
pub enum WSampler {
    /// `W = exp(eps)` with the centered log-Pareto innovation.
    ExpInnovation { alpha: f64 },
    /// `W` lognormal; the step law of the switching model.
    LogNormal { mu: f64, sigma: f64 },
    /// Degenerate step, useful in tests.
    Constant { value: f64 },
}

impl WSampler {
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        match self {
            WSampler::ExpInnovation { alpha } => {
                CenteredLogParetoLaw { alpha: *alpha }.eps_from_uniform(u).exp()
            }
            WSampler::LogNormal { mu, sigma } => {
                LogNormalLaw { mu: *mu, sigma: *sigma }.quantile(u)
            }
            WSampler::Constant { value } => *value,
        }
    }

    /// `E[W^s]` where defined; infinite for the exp-innovation law at
    /// `s >= alpha`.
    pub fn moment(&self, s: f64) -> f64 {
        match self {
            WSampler::ExpInnovation { alpha } => crate::randomness::innovation_mgf(*alpha, s),
            WSampler::LogNormal { mu, sigma } => {
                LogNormalLaw { mu: *mu, sigma: *sigma }.moment(s)
            }
            WSampler::Constant { value } => value.powf(s),
        }
    }
}

/// Parameters of the tail chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailChainSpec {
    pub alpha: f64,
    /// Per-step exponent; the lag-h exponent is `kappa^h` by composition.
    pub kappa: f64,
    pub w: WSampler,
    /// Mass of the step distribution at zero. Once a step lands on zero the
    /// path stays there.
    pub absorb_prob: f64,
}

impl TailChainSpec {
    /// Tail chain implied by a Markov model family, if it has one.
    pub fn of_model(spec: &ModelSpec) -> Option<TailChainSpec> {
        match spec {
            ModelSpec::ExpAr1 { alpha, phi } => Some(TailChainSpec {
                alpha: *alpha,
                kappa: *phi,
                w: WSampler::ExpInnovation { alpha: *alpha },
                absorb_prob: 0.0,
            }),
            ModelSpec::SwitchingExpAr1 { alpha, phi, eta, r_law } => Some(TailChainSpec {
                alpha: *alpha,
                kappa: *phi,
                w: WSampler::LogNormal { mu: r_law.mu, sigma: r_law.sigma },
                absorb_prob: *eta,
            }),
            _ => None,
        }
    }
}

/// Simulates `n` paths `(Y_0, ..., Y_h)` of the tail chain.
///
/// Counter layout per replicate: 0 is the Pareto start, then step `t` uses
/// `2t-1` for the absorption mark and `2t` for `W_t`.
pub fn simulate_tail_chain(
    spec: &TailChainSpec,
    h: usize,
    n: usize,
    stream: &RandomStream,
) -> Result<PathBlock> {
    assert!(n >= 1);
    let pareto = ParetoLaw::standard(spec.alpha);
    let width = h + 1;
    let mut data = vec![0.0; n * width];
    let saturation = AtomicU64::new(0);
    data.par_chunks_mut(crate::models::ROW_CHUNK * width)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let base = (ci * crate::models::ROW_CHUNK) as u64;
            let mut sat = 0u64;
            for (i, row) in chunk.chunks_mut(width).enumerate() {
                let rs = stream.substream(base + i as u64);
                let mut y = pareto.quantile_unchecked(rs.at(0));
                if !y.is_finite() {
                    y = f64::MAX;
                    sat += 1;
                }
                row[0] = y;
                let mut absorbed = false;
                for t in 1..=h {
                    let mark = rs.at((2 * t - 1) as u64);
                    let w = spec.w.from_uniform(rs.at((2 * t) as u64));
                    if absorbed || mark < spec.absorb_prob {
                        absorbed = true;
                        row[t] = 0.0;
                    } else {
                        y = y.powf(spec.kappa) * w;
                        if !y.is_finite() {
                            y = f64::MAX;
                            sat += 1;
                        }
                        row[t] = y;
                    }
                }
            }
            saturation.fetch_add(sat, Ordering::Relaxed);
        });
    Ok(PathBlock {
        meta: BlockMeta {
            spec: None,
            seed: Some(stream.seed),
            stream_base: Some(stream.stream_id),
            n,
            h,
            saturation: saturation.into_inner(),
        },
        data,
    })
}

/// Unrolls the recursion into the representation multipliers:
/// `J_t = prod_{j<=t} W_j^{kappa^{t-j}}`, so that `Y_t = Y_0^{kappa^t} J_t`
/// with `Y_0` independent of `(J_1, ..., J_h)`.
pub fn j_vector_from_w(kappa: f64, w: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len());
    let mut j = 1.0f64;
    for &wt in w {
        j = j.powf(kappa) * wt;
        out.push(j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_ids;
    use approx::assert_relative_eq;

    #[test]
    fn j_vector_examples() {
        assert_eq!(j_vector_from_w(0.5, &[3.0]), vec![3.0]);
        let j = j_vector_from_w(0.5, &[4.0, 5.0]);
        assert_relative_eq!(j[1], 2.0 * 5.0, max_relative = 1e-12);
        assert_eq!(j_vector_from_w(0.7, &[1.0, 1.0, 1.0]), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn deterministic_w_gives_pure_power_path() {
        let spec = TailChainSpec {
            alpha: 2.0,
            kappa: 0.5,
            w: WSampler::Constant { value: 1.0 },
            absorb_prob: 0.0,
        };
        let s = RandomStream::new(4, stream_ids::TAIL_CHAIN);
        let block = simulate_tail_chain(&spec, 3, 100, &s).unwrap();
        for i in 0..block.meta.n {
            let r = block.row(i);
            for t in 1..=3 {
                assert_relative_eq!(r[t], r[0].powf(0.5f64.powi(t as i32)), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn kappa_zero_makes_steps_independent_of_start() {
        let spec = TailChainSpec {
            alpha: 2.0,
            kappa: 0.0,
            w: WSampler::ExpInnovation { alpha: 2.0 },
            absorb_prob: 0.0,
        };
        let s = RandomStream::new(4, stream_ids::TAIL_CHAIN);
        let block = simulate_tail_chain(&spec, 2, 50, &s).unwrap();
        for i in 0..block.meta.n {
            let rs = s.substream(i as u64);
            let w1 = spec.w.from_uniform(rs.at(2));
            assert_eq!(block.row(i)[1], w1);
        }
    }

    #[test]
    fn absorption_fraction_matches_geometric_law() {
        let eta = 0.3f64;
        let spec = TailChainSpec {
            alpha: 2.0,
            kappa: 0.5,
            w: WSampler::LogNormal { mu: 0.0, sigma: 1.0 },
            absorb_prob: eta,
        };
        let n = 1_000_000usize;
        let s = RandomStream::new(42, stream_ids::TAIL_CHAIN);
        let block = simulate_tail_chain(&spec, 3, n, &s).unwrap();
        for k in 1..=3usize {
            let p = 1.0 - (1.0 - eta).powi(k as i32);
            let zeros = (0..n).filter(|&i| block.row(i)[k] == 0.0).count();
            let emp = zeros as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (emp - p).abs() <= 3.0 * se,
                "step {k}: emp {emp} vs {p}, 3se = {}",
                3.0 * se
            );
        }
    }

    #[test]
    fn paths_stay_zero_after_absorption() {
        let spec = TailChainSpec {
            alpha: 1.0,
            kappa: 0.0, // 0^0 would resurrect the path if absorption leaked
            w: WSampler::LogNormal { mu: 0.0, sigma: 1.0 },
            absorb_prob: 0.5,
        };
        let s = RandomStream::new(9, stream_ids::TAIL_CHAIN);
        let block = simulate_tail_chain(&spec, 5, 20_000, &s).unwrap();
        for i in 0..block.meta.n {
            let r = block.row(i);
            let mut seen_zero = false;
            for &v in &r[1..] {
                if seen_zero {
                    assert_eq!(v, 0.0);
                }
                if v == 0.0 {
                    seen_zero = true;
                }
            }
        }
    }

    #[test]
    fn model_tail_chains() {
        let m = ModelSpec::ExpAr1 { alpha: 2.0, phi: 0.5 };
        let tc = TailChainSpec::of_model(&m).unwrap();
        assert_eq!(tc.kappa, 0.5);
        assert_eq!(tc.absorb_prob, 0.0);
        assert!(TailChainSpec::of_model(&ModelSpec::SvHeavyInnov {
            z_alpha: 2.0,
            vol_rho: 0.5,
            vol_sigma: 0.5
        })
        .is_none());
    }
}
