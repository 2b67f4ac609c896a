//! Brute-force simulation of the pair price models.
//!
//! Each path draws one trading decision and the next-day returns directly
//! from the model equations, so the sample moments are an independent check
//! on the closed forms. Paths are generated in fixed-size blocks, each with
//! its own ChaCha stream, and block results are reduced in block order: the
//! output depends only on the seed, never on the worker count.

use super::closed_form::{PairModelParams, TripleModelParams};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

pub const MIN_PATHS: usize = 10_000;
const BLOCK: usize = 1 << 15;

/// Which price model to simulate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McModel {
    /// A single cointegrated pair.
    Cointegrated(PairModelParams),
    /// A single non-cointegrated pair made of two of the three stocks.
    NonCointegrated { params: TripleModelParams, stocks: (usize, usize) },
    /// Two cointegrated pairs sharing stock 1.
    SharedCointegrated { a: PairModelParams, b: PairModelParams },
    /// Non-cointegrated pairs (1,2) and (1,3).
    SharedNonCointegrated(TripleModelParams),
}

/// A sample statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Discrepancy of `reference` from this estimate in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - reference) / self.std_error
        }
    }
}

/// Sample moments of simulated pair returns. For the shared models `mean`
/// and `variance` describe pair a and `covariance` is between pairs a and b.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McMoments {
    pub n_paths: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    pub covariance: Option<Estimate>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Signal of a spread observation against a `k * sd` band.
fn band_signal(spread: f64, k: f64, sd: f64) -> f64 {
    let band = k * sd;
    if spread <= -band {
        1.0
    } else if spread >= band {
        -1.0
    } else {
        0.0
    }
}

impl McModel {
    fn validate(&self) -> Result<()> {
        match self {
            McModel::Cointegrated(p) => p.validate(),
            McModel::NonCointegrated { params, stocks } => {
                params.validate()?;
                let (a, b) = *stocks;
                if a > 2 || b > 2 || a == b {
                    return Err(Error::InvalidParameter(format!("bad stock pair ({a}, {b})")));
                }
                Ok(())
            }
            McModel::SharedCointegrated { a, b } => {
                a.validate()?;
                b.validate()?;
                if a.mu1 != b.mu1 || a.sigma1 != b.sigma1 {
                    return Err(Error::InvalidParameter(
                        "shared-stock pairs must agree on the shared stock parameters".into(),
                    ));
                }
                Ok(())
            }
            McModel::SharedNonCointegrated(p) => p.validate(),
        }
    }

    fn is_shared(&self) -> bool {
        matches!(self, McModel::SharedCointegrated { .. } | McModel::SharedNonCointegrated(_))
    }

    /// One path: returns of pair a and (for shared models) pair b.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match *self {
            McModel::Cointegrated(p) => {
                let delta = p.sigma1 * normal(rng);
                let eps_now = p.sigma * normal(rng);
                let eps_next = p.sigma * normal(rng);
                let s = band_signal(eps_now, p.k, p.sigma);
                let stock1 = (p.mu1 + delta).exp();
                let stock2 = (p.mu1 + delta + eps_next - eps_now).exp();
                (s * (stock2 - stock1), 0.0)
            }
            McModel::NonCointegrated { params, stocks: (a, b) } => {
                let t = params.t as f64;
                let walk_a = params.sigma[a] * t.sqrt() * normal(rng);
                let walk_b = params.sigma[b] * t.sqrt() * normal(rng);
                let step_a = params.sigma[a] * normal(rng);
                let step_b = params.sigma[b] * normal(rng);
                let s = band_signal(walk_b - walk_a, params.k, params.spread_sigma(a, b));
                let ra = (params.mu[a] + step_a).exp();
                let rb = (params.mu[b] + step_b).exp();
                (s * (rb - ra), 0.0)
            }
            McModel::SharedCointegrated { a, b } => {
                let delta = a.sigma1 * normal(rng);
                let ea_now = a.sigma * normal(rng);
                let ea_next = a.sigma * normal(rng);
                let eb_now = b.sigma * normal(rng);
                let eb_next = b.sigma * normal(rng);
                let stock1 = (a.mu1 + delta).exp();
                let stock2 = (a.mu1 + delta + ea_next - ea_now).exp();
                let stock3 = (a.mu1 + delta + eb_next - eb_now).exp();
                let sa = band_signal(ea_now, a.k, a.sigma);
                let sb = band_signal(eb_now, b.k, b.sigma);
                (sa * (stock2 - stock1), sb * (stock3 - stock1))
            }
            McModel::SharedNonCointegrated(p) => {
                let sqrt_t = (p.t as f64).sqrt();
                let walks: [f64; 3] = std::array::from_fn(|i| p.sigma[i] * sqrt_t * normal(rng));
                let steps: [f64; 3] = std::array::from_fn(|i| p.sigma[i] * normal(rng));
                let sa = band_signal(walks[1] - walks[0], p.k, p.spread_sigma(0, 1));
                let sb = band_signal(walks[2] - walks[0], p.k, p.spread_sigma(0, 2));
                let gross: [f64; 3] = std::array::from_fn(|i| (p.mu[i] + steps[i]).exp());
                (sa * (gross[1] - gross[0]), sb * (gross[2] - gross[0]))
            }
        }
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn block_len(block: usize, n_paths: usize) -> usize {
    BLOCK.min(n_paths - block * BLOCK)
}

#[derive(Default, Clone, Copy)]
struct CentralSums {
    xx: f64,
    yy: f64,
    x4: f64,
    xy: f64,
    xy2: f64,
}

/// Simulate `n_paths` independent paths of `model` and return the sample
/// moments with standard errors. Deterministic in `seed`.
pub fn mc_pair_moments(model: &McModel, n_paths: usize, seed: u64) -> Result<McMoments> {
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_PATHS} paths are required, got {n_paths}"
        )));
    }
    model.validate()?;
    let n_blocks = n_paths.div_ceil(BLOCK);

    // pass 1: means
    let sums: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let (mut sx, mut sy) = (0.0, 0.0);
            for _ in 0..block_len(b, n_paths) {
                let (x, y) = model.draw(&mut rng);
                sx += x;
                sy += y;
            }
            (sx, sy)
        })
        .collect();
    let n = n_paths as f64;
    let mean_x = sums.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = sums.iter().map(|s| s.1).sum::<f64>() / n;

    // pass 2: central moments about the global means, regenerating the same streams
    let central: Vec<CentralSums> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let mut c = CentralSums::default();
            for _ in 0..block_len(b, n_paths) {
                let (x, y) = model.draw(&mut rng);
                let (dx, dy) = (x - mean_x, y - mean_y);
                c.xx += dx * dx;
                c.yy += dy * dy;
                c.x4 += dx * dx * dx * dx;
                c.xy += dx * dy;
                c.xy2 += (dx * dy) * (dx * dy);
            }
            c
        })
        .collect();
    let total = central.iter().fold(CentralSums::default(), |acc, c| CentralSums {
        xx: acc.xx + c.xx,
        yy: acc.yy + c.yy,
        x4: acc.x4 + c.x4,
        xy: acc.xy + c.xy,
        xy2: acc.xy2 + c.xy2,
    });

    let variance = total.xx / (n - 1.0);
    let m2 = total.xx / n;
    let m4 = total.x4 / n;
    let mean = Estimate { value: mean_x, std_error: (variance / n).sqrt() };
    let var_est = Estimate {
        value: variance,
        std_error: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
    };
    let covariance = model.is_shared().then(|| {
        let c = total.xy / n;
        Estimate {
            value: total.xy / (n - 1.0),
            std_error: ((total.xy2 / n - c * c).max(0.0) / n).sqrt(),
        }
    });
    Ok(McMoments { n_paths, mean, variance: var_est, covariance })
}
