//! Theoretical portfolio moments for a mix of cointegrated and
//! non-cointegrated pairs, and shared-stock counting on portfolio graphs.

use crate::error::{Error, Result};
use crate::moments::{
    cointegrated_pair_moments, cointegrated_shared_covariance, noncoint_pair_moments, noncoint_shared_covariance,
    PairModelParams, TripleModelParams,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

pub const TRADING_DAYS: f64 = 252.0;

/// How many pairs of each kind a portfolio holds, and how many
/// pairs-of-pairs of each kind share a stock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortfolioComposition {
    pub n1: u64,
    pub n2: u64,
    pub m1: u64,
    pub m2: u64,
}

impl PortfolioComposition {
    pub fn validate(&self) -> Result<()> {
        let max_pairs = |n: u64| n.saturating_mul(n.saturating_sub(1)) / 2;
        if self.m1 > max_pairs(self.n1) || self.m2 > max_pairs(self.n2) {
            return Err(Error::InvalidParameter(format!(
                "shared pair counts exceed the number of pairs-of-pairs: {self:?}"
            )));
        }
        Ok(())
    }
}

/// The single-pair inputs the portfolio formula combines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMomentInputs {
    /// Mean return of a cointegrated pair.
    pub mu_c: f64,
    /// Variance of a cointegrated pair.
    pub nu1: f64,
    /// Variance of a non-cointegrated pair.
    pub nu2: f64,
    /// Covariance of two cointegrated pairs sharing a stock.
    pub kappa1: f64,
    /// Covariance of two non-cointegrated pairs sharing a stock.
    pub kappa2: f64,
}

impl PairMomentInputs {
    /// Evaluate every input at homogeneous stock parameters: all stocks share
    /// drift `mu1` and noise `sigma1`, cointegrated spreads have std dev
    /// `sigma`, and non-cointegrated spreads are observed after `t` days.
    pub fn from_model(mu1: f64, sigma1: f64, sigma: f64, k: f64, t: u32) -> Result<Self> {
        let coint = PairModelParams::new(mu1, sigma1, sigma, k)?;
        let noncoint = TripleModelParams::homogeneous(mu1, sigma1, k, t)?;
        let c = cointegrated_pair_moments(&coint)?;
        Ok(PairMomentInputs {
            mu_c: c.mean,
            nu1: c.variance,
            nu2: noncoint_pair_moments(&noncoint, (0, 1))?.variance,
            kappa1: cointegrated_shared_covariance(&coint, &coint)?,
            kappa2: noncoint_shared_covariance(&noncoint)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoreticalPortfolioMoments {
    pub mean: f64,
    pub variance: f64,
    pub sharpe_daily: f64,
    pub sharpe_annualized: f64,
}

/// Portfolio mean `n1 * mu_c` and variance
/// `n1*nu1 + n2*nu2 + 2*m1*kappa1 + 2*m2*kappa2`, with unit capital per pair.
pub fn portfolio_moments(comp: &PortfolioComposition, inputs: &PairMomentInputs) -> Result<TheoreticalPortfolioMoments> {
    comp.validate()?;
    if inputs.nu1 < 0.0 || inputs.nu2 < 0.0 {
        return Err(Error::InvalidParameter("pair variances must be non-negative".into()));
    }
    let mean = comp.n1 as f64 * inputs.mu_c;
    let variance = comp.n1 as f64 * inputs.nu1
        + comp.n2 as f64 * inputs.nu2
        + 2.0 * comp.m1 as f64 * inputs.kappa1
        + 2.0 * comp.m2 as f64 * inputs.kappa2;
    if variance < 0.0 {
        return Err(Error::Numerical(format!("portfolio variance is negative: {variance:e}")));
    }
    let sharpe_daily = if variance > 0.0 { mean / variance.sqrt() } else { f64::NAN };
    Ok(TheoreticalPortfolioMoments {
        mean,
        variance,
        sharpe_daily,
        sharpe_annualized: sharpe_daily * TRADING_DAYS.sqrt(),
    })
}

/// Expected number of two-hop paths in `G(n, p)`: `3 p^2 n(n-1)(n-2) / 6`.
pub fn er_expected_shared_pairs(n: u64, p: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 nodes, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability must be in [0, 1], got {p}")));
    }
    let n = n as f64;
    Ok(3.0 * p * p * n * (n - 1.0) * (n - 2.0) / 6.0)
}

/// Density of a graph with `edges` edges on `n` nodes, `edges / C(n, 2)`.
pub fn er_edge_probability(n: u64, edges: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {n}")));
    }
    let slots = n * (n - 1) / 2;
    if edges > slots {
        return Err(Error::InvalidParameter(format!("{edges} edges do not fit on {n} nodes")));
    }
    Ok(edges as f64 / slots as f64)
}

/// Number of unordered edge pairs that share a node, `sum_v C(deg v, 2)`.
pub fn count_shared_pairs<T>(edges: &[(T, T)]) -> Result<u64>
where
    T: Eq + std::hash::Hash + Clone + std::fmt::Debug,
{
    let mut seen: HashSet<(T, T)> = HashSet::with_capacity(edges.len());
    let mut degree: HashMap<T, u64> = HashMap::new();
    for (a, b) in edges {
        if a == b {
            return Err(Error::MalformedEdges(format!("self-loop on {a:?}")));
        }
        if seen.contains(&(b.clone(), a.clone())) || !seen.insert((a.clone(), b.clone())) {
            return Err(Error::MalformedEdges(format!("duplicate edge {a:?}-{b:?}")));
        }
        *degree.entry(a.clone()).or_default() += 1;
        *degree.entry(b.clone()).or_default() += 1;
    }
    Ok(degree.values().map(|&d| d * d.saturating_sub(1) / 2).sum())
}

/// Sample the edge list of a `G(n, p)` graph by geometric skipping over the
/// `n(n-1)/2` candidate edges in lexicographic order.
pub fn sample_gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    if n < 2 || p <= 0.0 {
        return edges;
    }
    if p >= 1.0 {
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        return edges;
    }
    let log_q = (1.0 - p).ln();
    // Batagelj-Brandes enumeration: w indexes the column within row v.
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor() as i64;
        w += 1 + skip;
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges
}
