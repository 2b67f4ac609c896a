//! Theoretical Sharpe ratios of a baseline and a matching portfolio.

use anyhow::{Context, Result};
use pairmatch::portfolio_theory::{portfolio_moments, PairMomentInputs, PortfolioComposition, TheoreticalPortfolioMoments};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryParams {
    pub mu1: f64,
    pub sigma1: f64,
    pub sigma: f64,
    pub k: f64,
    pub n1: u64,
    pub n2: u64,
    pub m1: u64,
    pub baseline_m2: u64,
    pub matching_m2: u64,
    /// Days elapsed for non-cointegrated spreads.
    pub t: u32,
    pub t_scan: Vec<u32>,
}

impl Default for TheoryParams {
    fn default() -> Self {
        TheoryParams {
            mu1: 0.0005,
            sigma1: 0.0180,
            sigma: 0.0711,
            k: 2.0,
            n1: 1,
            n2: 249,
            m1: 0,
            baseline_m2: 1748,
            matching_m2: 0,
            t: 252,
            t_scan: vec![21, 126, 252, 504],
        }
    }
}

impl TheoryParams {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("in params {}", p.display()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub t: u32,
    pub baseline_sharpe: f64,
    pub matching_sharpe: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub params: TheoryParams,
    pub inputs: PairMomentInputs,
    pub baseline: TheoreticalPortfolioMoments,
    pub matching: TheoreticalPortfolioMoments,
    pub t_scan: Vec<ScanRow>,
}

fn both(p: &TheoryParams, t: u32) -> Result<(PairMomentInputs, TheoreticalPortfolioMoments, TheoreticalPortfolioMoments)> {
    let inputs = PairMomentInputs::from_model(p.mu1, p.sigma1, p.sigma, p.k, t)?;
    let comp = |m2| PortfolioComposition { n1: p.n1, n2: p.n2, m1: p.m1, m2 };
    let baseline = portfolio_moments(&comp(p.baseline_m2), &inputs)?;
    let matching = portfolio_moments(&comp(p.matching_m2), &inputs)?;
    Ok((inputs, baseline, matching))
}

pub fn evaluate(params: &TheoryParams) -> Result<TheoryReport> {
    let (inputs, baseline, matching) = both(params, params.t)?;
    let t_scan = params
        .t_scan
        .iter()
        .map(|&t| {
            let (_, b, m) = both(params, t)?;
            Ok(ScanRow { t, baseline_sharpe: b.sharpe_annualized, matching_sharpe: m.sharpe_annualized })
        })
        .collect::<Result<_>>()?;
    Ok(TheoryReport { params: params.clone(), inputs, baseline, matching, t_scan })
}

pub fn render(r: &TheoryReport) -> String {
    let p = &r.params;
    let mut out = String::new();
    let _ = writeln!(out, "| Parameter description | Parameter | Baseline portfolio | Matching portfolio |");
    let _ = writeln!(out, "|---|---|---:|---:|");
    let mut line = |d: &str, s: &str, b: String, m: String| {
        let _ = writeln!(out, "| {d} | {s} | {b} | {m} |");
    };
    line("Daily log-price change mean", "mu1", p.mu1.to_string(), p.mu1.to_string());
    line("Daily log-price change std. dev.", "sigma1", format!("{:.4}", p.sigma1), format!("{:.4}", p.sigma1));
    line("Spread std. dev.", "sigma", p.sigma.to_string(), p.sigma.to_string());
    line("Trading threshold", "k", p.k.to_string(), p.k.to_string());
    line("Number of cointegrated pairs", "n1", p.n1.to_string(), p.n1.to_string());
    line("Number of non-cointegrated pairs", "n2", p.n2.to_string(), p.n2.to_string());
    line("Number of pairs of cointegrated pairs sharing a common stock", "m1", p.m1.to_string(), p.m1.to_string());
    line(
        "Number of pairs of non cointegrated pairs sharing a common stock",
        "m2",
        p.baseline_m2.to_string(),
        p.matching_m2.to_string(),
    );
    line(
        "Annualized Sharpe ratio",
        "",
        format!("{:.2}", r.baseline.sharpe_annualized),
        format!("{:.2}", r.matching.sharpe_annualized),
    );
    let i = &r.inputs;
    let _ = writeln!(out, "\nPair inputs at t = {}:", p.t);
    let _ = writeln!(out, "  cointegrated mean        {:.6e}", i.mu_c);
    let _ = writeln!(out, "  cointegrated variance    {:.6e}", i.nu1);
    let _ = writeln!(out, "  non-coint. variance      {:.6e}", i.nu2);
    let _ = writeln!(out, "  shared coint. covariance {:.6e}", i.kappa1);
    let _ = writeln!(out, "  shared non-coint. cov.   {:.6e}", i.kappa2);
    if !r.t_scan.is_empty() {
        let _ = writeln!(out, "\n| t | Baseline Sharpe | Matching Sharpe |");
        let _ = writeln!(out, "|---:|---:|---:|");
        for s in &r.t_scan {
            let _ = writeln!(out, "| {} | {:.4} | {:.4} |", s.t, s.baseline_sharpe, s.matching_sharpe);
        }
    }
    out
}
