//! Closed-form return moments of threshold-traded pairs.
//!
//! Two price models are covered. In the cointegrated model stock 1 follows a
//! log-normal random walk and the log-price spread to stock 2 is i.i.d.
//! normal. In the non-cointegrated model every stock follows an independent
//! log-normal walk and the drift-adjusted spread has variance growing with
//! the elapsed time `t`. Either way a pair trades only when the spread is
//! at least `k` spread standard deviations away from zero.

use super::normal::{std_normal_cdf, std_normal_interval, std_normal_sf};
use super::orthant::{bivariate_orthant, Quadrant};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default elapsed time (one trading year) for non-cointegrated spreads.
pub const DEFAULT_ELAPSED_DAYS: u32 = 252;

/// Variances within this distance below zero are cancellation noise.
const VARIANCE_CLAMP: f64 = 1e-12;

/// Generative parameters of a single traded pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairModelParams {
    /// Daily log-price drift of the shared (first) stock.
    pub mu1: f64,
    /// Daily log-price noise standard deviation of the first stock.
    pub sigma1: f64,
    /// Spread standard deviation.
    pub sigma: f64,
    /// Trading threshold in spread standard deviations.
    pub k: f64,
}

impl PairModelParams {
    pub fn new(mu1: f64, sigma1: f64, sigma: f64, k: f64) -> Result<Self> {
        let p = PairModelParams { mu1, sigma1, sigma, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.mu1, self.sigma1, self.sigma, self.k]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("pair parameters must be finite".into()));
        }
        if self.sigma1 <= 0.0 || self.sigma <= 0.0 || self.k <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma1, sigma and k must be positive (sigma1={}, sigma={}, k={})",
                self.sigma1, self.sigma, self.k
            )));
        }
        Ok(())
    }
}

/// Parameters of three independent log-normal stocks; pairs (1,2) and (1,3)
/// share stock 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleModelParams {
    pub mu: [f64; 3],
    pub sigma: [f64; 3],
    pub k: f64,
    /// Elapsed time steps; only scales the spread variance.
    pub t: u32,
}

impl TripleModelParams {
    pub fn new(mu: [f64; 3], sigma: [f64; 3], k: f64) -> Result<Self> {
        Self::with_elapsed(mu, sigma, k, DEFAULT_ELAPSED_DAYS)
    }

    pub fn with_elapsed(mu: [f64; 3], sigma: [f64; 3], k: f64, t: u32) -> Result<Self> {
        let p = TripleModelParams { mu, sigma, k, t };
        p.validate()?;
        Ok(p)
    }

    /// Three identical stocks with drift `mu` and noise `sigma`.
    pub fn homogeneous(mu: f64, sigma: f64, k: f64, t: u32) -> Result<Self> {
        Self::with_elapsed([mu; 3], [sigma; 3], k, t)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.mu.iter().chain(self.sigma.iter()).all(|v| v.is_finite()) && self.k.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("stock parameters must be finite".into()));
        }
        if self.sigma.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidParameter("every stock noise sigma must be positive".into()));
        }
        if self.k <= 0.0 {
            return Err(Error::InvalidParameter(format!("k must be positive, got {}", self.k)));
        }
        if self.t == 0 {
            return Err(Error::InvalidParameter("elapsed time t must be at least 1".into()));
        }
        Ok(())
    }

    /// Standard deviation of the drift-adjusted spread between two stocks.
    pub fn spread_sigma(&self, a: usize, b: usize) -> f64 {
        (self.t as f64 * (self.sigma[a].powi(2) + self.sigma[b].powi(2))).sqrt()
    }
}

/// Mean and variance of a daily pair return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Correlation between the standardized spreads of two non-cointegrated
/// pairs sharing stock 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateCorrelation(pub f64);

impl BivariateCorrelation {
    pub fn for_shared_stock(params: &TripleModelParams) -> Self {
        let [s1, s2, s3] = params.sigma.map(|s| s * s);
        BivariateCorrelation(s1 / ((s1 + s2) * (s1 + s3)).sqrt())
    }

    pub fn rho(&self) -> f64 {
        self.0
    }
}

fn clamp_variance(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -VARIANCE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("{what} evaluated to negative variance {v:e}")))
    }
}

/// Expected daily return of a cointegrated pair:
/// `exp(mu1 + sigma1^2/2 + sigma^2) * P(k - sigma <= Z <= k + sigma)`.
pub fn cointegrated_pair_mean(params: &PairModelParams) -> Result<f64> {
    params.validate()?;
    let PairModelParams { mu1, sigma1, sigma, k } = *params;
    Ok((mu1 + 0.5 * sigma1 * sigma1 + sigma * sigma).exp() * std_normal_interval(k - sigma, k + sigma))
}

/// Variance of the daily return of a cointegrated pair.
pub fn cointegrated_pair_variance(params: &PairModelParams) -> Result<f64> {
    params.validate()?;
    let PairModelParams { mu1, sigma1, sigma, k } = *params;
    let mean = cointegrated_pair_mean(params)?;
    let base = 2.0 * mu1 + 2.0 * sigma1 * sigma1;
    let s2 = sigma * sigma;
    let second_moment = (base + 4.0 * s2).exp()
        * (std_normal_cdf(-k + 2.0 * sigma) + std_normal_sf(k + 2.0 * sigma))
        - 2.0 * (base + s2).exp() * (std_normal_cdf(-k + sigma) + std_normal_sf(k + sigma))
        + 2.0 * base.exp() * std_normal_sf(k);
    clamp_variance(second_moment - mean * mean, "cointegrated pair variance")
}

/// Both moments of a cointegrated pair.
pub fn cointegrated_pair_moments(params: &PairModelParams) -> Result<PairMoments> {
    Ok(PairMoments {
        mean: cointegrated_pair_mean(params)?,
        variance: cointegrated_pair_variance(params)?,
    })
}

/// Covariance of two cointegrated pairs that share stock 1:
/// `(exp(sigma1^2) - 1) * E[r_a] * E[r_b]`.
pub fn cointegrated_shared_covariance(a: &PairModelParams, b: &PairModelParams) -> Result<f64> {
    if a.mu1 != b.mu1 || a.sigma1 != b.sigma1 {
        return Err(Error::InvalidParameter(format!(
            "pairs sharing a stock must agree on its drift and noise \
             (mu1 {} vs {}, sigma1 {} vs {})",
            a.mu1, b.mu1, a.sigma1, b.sigma1
        )));
    }
    let mean_a = cointegrated_pair_mean(a)?;
    let mean_b = cointegrated_pair_mean(b)?;
    Ok((a.sigma1 * a.sigma1).exp_m1() * mean_a * mean_b)
}

/// Mean and variance of a non-cointegrated pair of stocks `(a, b)` drawn
/// from `params` (0-based indices). The mean is exactly zero.
pub fn noncoint_pair_moments(params: &TripleModelParams, stocks: (usize, usize)) -> Result<PairMoments> {
    params.validate()?;
    let (a, b) = stocks;
    if a > 2 || b > 2 || a == b {
        return Err(Error::InvalidParameter(format!(
            "stock indices must be distinct and in 0..3, got ({a}, {b})"
        )));
    }
    let (mu_a, mu_b) = (params.mu[a], params.mu[b]);
    let (va, vb) = (params.sigma[a].powi(2), params.sigma[b].powi(2));
    let bracket = (2.0 * mu_a + 2.0 * va).exp() + (2.0 * mu_b + 2.0 * vb).exp()
        - 2.0 * (mu_a + mu_b + 0.5 * va + 0.5 * vb).exp();
    let variance = clamp_variance(2.0 * std_normal_sf(params.k) * bracket, "non-cointegrated pair variance")?;
    Ok(PairMoments { mean: 0.0, variance })
}

/// Covariance of the non-cointegrated pairs (1,2) and (1,3).
pub fn noncoint_shared_covariance(params: &TripleModelParams) -> Result<f64> {
    params.validate()?;
    let rho = BivariateCorrelation::for_shared_stock(params).rho();
    let k = params.k;
    let same = bivariate_orthant(rho, k, Quadrant::UpperUpper)?;
    let opposite = bivariate_orthant(rho, k, Quadrant::UpperLower)?;
    let [m1, m2, m3] = params.mu;
    let [v1, v2, v3] = params.sigma.map(|s| s * s);
    let bracket = (m2 + m3 + 0.5 * v2 + 0.5 * v3).exp() - (m1 + m3 + 0.5 * v1 + 0.5 * v3).exp()
        - (m1 + m2 + 0.5 * v1 + 0.5 * v2).exp()
        + (2.0 * m1 + 2.0 * v1).exp();
    Ok(2.0 * (same - opposite) * bracket)
}
