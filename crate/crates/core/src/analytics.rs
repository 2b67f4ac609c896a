//! Performance metrics, turnover, retention, concentration and
//! cross-strategy correlation.

use crate::backtest::DailyLedger;
use crate::error::{Error, Result};
use crate::selection::{selection_concentration, PortfolioSelection};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub const TRADING_DAYS: f64 = 252.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub sharpe: f64,
    /// Absent when fewer than two negative days exist or they have zero spread.
    pub sortino: Option<f64>,
    pub cumulative_return: f64,
    pub annualized_return: f64,
    pub min_day: f64,
    pub max_day: f64,
    pub skew: f64,
    pub max_drawdown: f64,
    pub n_days: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Lowest value of equity/peak − 1 on the compounded curve started at 1.0.
pub fn max_drawdown(returns: &[f64]) -> f64 {
    let mut equity = 1.0_f64;
    let mut peak = 1.0_f64;
    let mut worst = 0.0_f64;
    for r in returns {
        equity *= 1.0 + r;
        peak = peak.max(equity);
        worst = worst.min(equity / peak - 1.0);
    }
    worst
}

pub fn cumulative_return(returns: &[f64]) -> f64 {
    returns.iter().fold(1.0, |acc, r| acc * (1.0 + r)) - 1.0
}

/// Skewness from population central moments, m3 / m2^1.5.
pub fn skewness(returns: &[f64]) -> f64 {
    let m = mean(returns);
    let n = returns.len() as f64;
    let m2 = returns.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = returns.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return 0.0;
    }
    m3 / m2.powf(1.5)
}

/// Metrics of a daily return series, risk-free rate 0, 252 days a year.
pub fn performance(returns: &[f64]) -> Result<PerformanceReport> {
    if returns.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "performance needs at least 2 daily returns, got {}",
            returns.len()
        )));
    }
    if let Some(bad) = returns.iter().find(|r| !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite daily return {bad}")));
    }
    let m = mean(returns);
    let sd = sample_std(returns);
    if !(sd > 0.0) || sd <= 1e-15 * m.abs() {
        return Err(Error::Degenerate("return series has zero standard deviation".into()));
    }
    let ann = TRADING_DAYS.sqrt();
    let negatives: Vec<f64> = returns.iter().copied().filter(|r| *r < 0.0).collect();
    let sortino = if negatives.len() >= 2 {
        let dsd = sample_std(&negatives);
        (dsd > 0.0).then(|| m / dsd * ann)
    } else {
        None
    };
    let cumulative = cumulative_return(returns);
    let growth = 1.0 + cumulative;
    let annualized = if growth > 0.0 { growth.powf(TRADING_DAYS / returns.len() as f64) - 1.0 } else { -1.0 };
    let min_day = returns.iter().copied().fold(f64::INFINITY, f64::min);
    let max_day = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PerformanceReport {
        sharpe: m / sd * ann,
        sortino,
        cumulative_return: cumulative,
        annualized_return: annualized,
        min_day,
        max_day,
        skew: skewness(returns),
        max_drawdown: max_drawdown(returns),
        n_days: returns.len(),
    })
}

/// Which return stream a table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnBasis {
    Gross,
    Net,
}

impl ReturnBasis {
    fn word(&self) -> (&'static str, &'static str) {
        match self {
            ReturnBasis::Gross => ("Gross", "gross"),
            ReturnBasis::Net => ("Net", "net"),
        }
    }
}

fn fmt_opt(v: Option<f64>, scale: f64) -> String {
    match v {
        Some(x) => format!("{:.2}", x * scale),
        None => "n/a".to_string(),
    }
}

/// Markdown table with one column per strategy, rows as in the published
/// performance tables. Percent rows are multiplied by 100.
pub fn performance_table_markdown(basis: ReturnBasis, columns: &[(String, PerformanceReport)]) -> String {
    let (cap, low) = basis.word();
    let rows: Vec<(String, Box<dyn Fn(&PerformanceReport) -> String>)> = vec![
        (format!("{cap} Sharpe ratio"), Box::new(|r| fmt_opt(Some(r.sharpe), 1.0))),
        (format!("{cap} Sortino ratio"), Box::new(|r| fmt_opt(r.sortino, 1.0))),
        (format!("{cap} cumulative returns (%)"), Box::new(|r| fmt_opt(Some(r.cumulative_return), 100.0))),
        (format!("{cap} annualized returns (%)"), Box::new(|r| fmt_opt(Some(r.annualized_return), 100.0))),
        (format!("Minimum {low} single day return (%)"), Box::new(|r| fmt_opt(Some(r.min_day), 100.0))),
        (format!("Maximum {low} single day return (%)"), Box::new(|r| fmt_opt(Some(r.max_day), 100.0))),
        ("Skew".to_string(), Box::new(|r| fmt_opt(Some(r.skew), 1.0))),
        ("Drawdown (%)".to_string(), Box::new(|r| fmt_opt(Some(r.max_drawdown), 100.0))),
    ];
    let mut out = String::from("| |");
    for (name, _) in columns {
        let _ = write!(out, " {name} |");
    }
    out.push_str("\n|---|");
    for _ in columns {
        out.push_str("---:|");
    }
    out.push('\n');
    for (label, f) in &rows {
        let _ = write!(out, "| {label} |");
        for (_, r) in columns {
            let _ = write!(out, " {} |", f(r));
        }
        out.push('\n');
    }
    out
}

/// Σ_j |x_j(t) − x_j(t−1)| over the ledger's per-ticker positions. On the
/// first ledger day the previous positions are taken as flat.
pub fn turnover(ledger: &DailyLedger, t: NaiveDate) -> Result<f64> {
    let idx = ledger
        .days
        .iter()
        .position(|d| d.date == t)
        .ok_or_else(|| Error::InvalidParameter(format!("date {t} is not in the ledger")))?;
    let empty = BTreeMap::new();
    let prev = if idx == 0 { &empty } else { &ledger.days[idx - 1].positions };
    Ok(position_change(prev, &ledger.days[idx].positions))
}

pub fn position_change(prev: &BTreeMap<String, f64>, cur: &BTreeMap<String, f64>) -> f64 {
    let tickers: BTreeSet<&String> = prev.keys().chain(cur.keys()).collect();
    tickers
        .into_iter()
        .map(|k| (cur.get(k).copied().unwrap_or(0.0) - prev.get(k).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Turnover on every ledger date.
pub fn turnover_series(ledger: &DailyLedger) -> Vec<(NaiveDate, f64)> {
    let empty = BTreeMap::new();
    let mut prev = &empty;
    let mut out = Vec::with_capacity(ledger.days.len());
    for d in &ledger.days {
        out.push((d.date, position_change(prev, &d.positions)));
        prev = &d.positions;
    }
    out
}

fn pair_set(sel: &PortfolioSelection) -> BTreeSet<(String, String)> {
    sel.pairs
        .iter()
        .map(|p| {
            if p.ticker_i <= p.ticker_j {
                (p.ticker_i.clone(), p.ticker_j.clone())
            } else {
                (p.ticker_j.clone(), p.ticker_i.clone())
            }
        })
        .collect()
}

/// Jaccard index of the two pair sets; two empty selections count as identical.
pub fn retention(a: &PortfolioSelection, b: &PortfolioSelection) -> f64 {
    let sa = pair_set(a);
    let sb = pair_set(b);
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Retention between each selection and the one before it.
pub fn retention_series(selections: &[PortfolioSelection]) -> Vec<(NaiveDate, f64)> {
    selections.windows(2).map(|w| (w[1].as_of, retention(&w[0], &w[1]))).collect()
}

pub fn concentration_series(selections: &[PortfolioSelection]) -> Vec<(NaiveDate, usize)> {
    selections.iter().map(|s| (s.as_of, selection_concentration(s))).collect()
}

/// A named daily series with its dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

impl StrategySeries {
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, returns: Vec<f64>) -> Self {
        StrategySeries { name: name.into(), dates, returns }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| |");
        for l in &self.labels {
            let _ = write!(out, " {l} |");
        }
        out.push_str("\n|---|");
        for _ in &self.labels {
            out.push_str("---:|");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            let _ = write!(out, "| {l} |");
            for v in row {
                let _ = write!(out, " {v:.2} |");
            }
            out.push('\n');
        }
        out
    }
}

/// Pearson correlation of daily returns. Every series must cover the same
/// dates in the same order.
pub fn strategy_correlation(series: &[StrategySeries]) -> Result<CorrelationMatrix> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no series to correlate".into()));
    }
    let first = &series[0];
    for s in series {
        if s.dates.len() != s.returns.len() {
            return Err(Error::InvalidParameter(format!(
                "series {} has {} dates but {} returns",
                s.name,
                s.dates.len(),
                s.returns.len()
            )));
        }
        if s.dates != first.dates {
            return Err(Error::InvalidParameter(format!(
                "series {} is not aligned with {}",
                s.name, first.name
            )));
        }
    }
    if first.returns.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 observations".into()));
    }
    let centered: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let m = mean(&s.returns);
            s.returns.iter().map(|r| r - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    for (s, n) in series.iter().zip(&norms) {
        if !(*n > 0.0) {
            return Err(Error::Degenerate(format!("series {} has zero variance", s.name)));
        }
    }
    let k = series.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { labels: series.iter().map(|s| s.name.clone()).collect(), values })
}

/// Portfolio returns divided by the number of selected pairs on each day, so
/// a day's figure is the return per unit of capital committed. Days with no
/// selected pairs return 0.
pub fn capital_normalized_returns(ledger: &DailyLedger, basis: ReturnBasis) -> Vec<f64> {
    ledger
        .days
        .iter()
        .map(|d| {
            if d.pairs.is_empty() {
                0.0
            } else {
                let r = match basis {
                    ReturnBasis::Gross => d.gross_return,
                    ReturnBasis::Net => d.net_return,
                };
                r / d.pairs.len() as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
