//! Daily pairs-trading engine with monthly reselection.
//!
//! Timing: on every formation date `d` each selected pair is refit on the
//! trailing `lookback_days` window ending at `d`, scored, and given a
//! position at the close of `d`. That position earns the price change to the
//! close of `d + 1`. A new selection is drawn on the first trading date of
//! each calendar month from the same trailing window.

mod ledger;

pub use ledger::{DailyLedger, DayRecord, PairDay, SignalRecord};

use crate::error::{Error, Result};
use crate::pair_stats::{ols_fit, DateWindow, ResidualQuantiles, ScoreKind, MIN_WINDOW};
use crate::panel::PricePanel;
use crate::portfolio_theory::TRADING_DAYS;
use crate::selection::{
    baseline_topk, build_pairs_graph, max_weight_matching, PairsGraph, PortfolioSelection, SelectionMethod,
    DEFAULT_K_TARGET,
};
use chrono::Datelike;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// When the per-pair fee is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeeMode {
    /// Every day a pair holds a position.
    HeldDays,
    /// Every day a pair's signal differs from the previous day's.
    ChangeDays,
}

impl std::str::FromStr for FeeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "held-days" => Ok(FeeMode::HeldDays),
            "change-days" => Ok(FeeMode::ChangeDays),
            other => Err(Error::InvalidParameter(format!(
                "unknown fee mode '{other}' (expected held-days or change-days)"
            ))),
        }
    }
}

impl std::fmt::Display for FeeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeeMode::HeldDays => "held-days",
            FeeMode::ChangeDays => "change-days",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub selection_method: SelectionMethod,
    pub signal_kind: ScoreKind,
    /// z-score entry threshold.
    pub k: f64,
    pub lookback_days: usize,
    pub fee_annual: f64,
    pub k_target: usize,
    pub fee_mode: FeeMode,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            selection_method: SelectionMethod::Matching,
            signal_kind: ScoreKind::ZScore,
            k: 2.0,
            lookback_days: 504,
            fee_annual: 0.01,
            k_target: DEFAULT_K_TARGET,
            fee_mode: FeeMode::HeldDays,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lookback_days < MIN_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "lookback_days must be at least {MIN_WINDOW}, got {}",
                self.lookback_days
            )));
        }
        if !(0.0..1.0).contains(&self.fee_annual) {
            return Err(Error::InvalidParameter(format!("fee_annual must be in [0, 1), got {}", self.fee_annual)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be positive, got {}", self.k)));
        }
        if self.k_target == 0 {
            return Err(Error::InvalidParameter("k_target must be at least 1".into()));
        }
        Ok(())
    }

    /// Two-letter strategy label: M/B for the selection method, Z/Q for the signal.
    pub fn strategy_label(&self) -> String {
        let m = match self.selection_method {
            SelectionMethod::Matching => 'M',
            SelectionMethod::Baseline => 'B',
        };
        let s = match self.signal_kind {
            ScoreKind::ZScore => 'Z',
            ScoreKind::QScore => 'Q',
        };
        format!("{m}{s}")
    }

    pub fn daily_fee(&self) -> f64 {
        self.fee_annual / TRADING_DAYS
    }
}

/// `+1` when `z >= k` (spread rich: long stock i, short stock j), `-1` when
/// `z <= -k`, else 0.
pub fn z_signal(z: f64, k: f64) -> i64 {
    if z >= k {
        1
    } else if z <= -k {
        -1
    } else {
        0
    }
}

/// `sign(q) * round(|q|)`, so `|q| < 0.5` never trades.
pub fn q_signal(q: f64) -> i64 {
    q.signum() as i64 * q.abs().round() as i64
}

/// Dollar positions `(stock i, stock j)` for signal `s`: long `beta*s` of i
/// and short `s` of j (negative `s` reverses both legs).
pub fn pair_positions(signal: i64, beta: f64) -> (f64, f64) {
    if signal == 0 {
        return (0.0, 0.0);
    }
    let s = signal as f64;
    (beta * s, -s)
}

/// Per-ticker dollar positions for one pair; empty when flat.
pub fn signal_to_positions(signal: &SignalRecord, beta: f64) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if signal.signal != 0 {
        let (pi, pj) = pair_positions(signal.signal, beta);
        out.insert(signal.ticker_i.clone(), pi);
        out.insert(signal.ticker_j.clone(), pj);
    }
    out
}

/// Return of dollar positions held from the close of `date` to the next close.
pub fn pair_gross_return(positions: &BTreeMap<String, f64>, panel: &PricePanel, date: usize) -> Result<f64> {
    if date + 1 >= panel.n_dates() {
        return Err(Error::InsufficientData(format!("no trading date after index {date}")));
    }
    let mut total = 0.0;
    for (ticker, &x) in positions {
        let t = panel.ticker_index(ticker).ok_or_else(|| Error::UnknownTicker(ticker.clone()))?;
        let missing = |d: usize| Error::MissingPrice { ticker: ticker.clone(), date: panel.dates()[d].to_string() };
        let p0 = panel.price(t, date).ok_or_else(|| missing(date))?;
        let p1 = panel.price(t, date + 1).ok_or_else(|| missing(date + 1))?;
        total += x * (p1 / p0 - 1.0);
    }
    Ok(total)
}

/// Charge `fee_annual / 252` to every pair holding a position and refresh the
/// day's totals. Returns the portfolio net return.
pub fn apply_fees(day: &mut DayRecord, fee_annual: f64) -> f64 {
    let fee = fee_annual / TRADING_DAYS;
    for p in &mut day.pairs {
        p.fee = if p.is_active() { fee } else { 0.0 };
        p.net_return = p.gross_return - p.fee;
    }
    day.aggregate();
    day.net_return
}

/// First trading date of each calendar month that has a full lookback
/// window behind it and at least one later date to realize returns on.
pub fn rebalance_dates(panel: &PricePanel, lookback_days: usize) -> Vec<usize> {
    let dates = panel.dates();
    (1..dates.len().saturating_sub(1))
        .filter(|&d| d + 1 >= lookback_days)
        .filter(|&d| (dates[d].year(), dates[d].month()) != (dates[d - 1].year(), dates[d - 1].month()))
        .collect()
}

/// Pairs graph drawn on one rebalance date.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyGraph {
    pub date_index: usize,
    /// `None` when too few tickers had complete data.
    pub graph: Option<PairsGraph>,
}

/// Build the pairs graph for every rebalance date. The graphs depend only on
/// the panel and lookback, so several strategies can share them.
pub fn monthly_graphs(panel: &PricePanel, lookback_days: usize) -> Result<Vec<MonthlyGraph>> {
    if lookback_days < MIN_WINDOW {
        return Err(Error::InvalidParameter(format!("lookback_days must be at least {MIN_WINDOW}")));
    }
    let days = rebalance_dates(panel, lookback_days);
    if days.is_empty() {
        return Err(Error::InsufficientData(format!(
            "panel has {} dates; need a {lookback_days}-day lookback followed by a month start and one more date",
            panel.n_dates()
        )));
    }
    days.into_iter()
        .map(|d| {
            let window = DateWindow::trailing(d, lookback_days).expect("rebalance dates have full lookback");
            match build_pairs_graph(panel, window, panel.tickers()) {
                Ok(g) => Ok(MonthlyGraph { date_index: d, graph: Some(g) }),
                Err(Error::InsufficientData(msg)) => {
                    warn!("no pairs graph on {}: {msg}", panel.dates()[d]);
                    Ok(MonthlyGraph { date_index: d, graph: None })
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn select(graph: &MonthlyGraph, panel: &PricePanel, config: &BacktestConfig) -> Result<PortfolioSelection> {
    let as_of = panel.dates()[graph.date_index];
    let sel = match &graph.graph {
        None => PortfolioSelection { method: config.selection_method, pairs: Vec::new(), as_of },
        Some(g) => match config.selection_method {
            SelectionMethod::Matching => max_weight_matching(g),
            SelectionMethod::Baseline => baseline_topk(g, config.k_target)?,
        },
    };
    if sel.pairs.is_empty() {
        warn!("empty {} selection on {as_of}; no positions this month", config.selection_method);
    }
    Ok(sel)
}

/// Run one strategy end to end.
pub fn run_backtest(panel: &PricePanel, config: &BacktestConfig) -> Result<DailyLedger> {
    config.validate()?;
    let graphs = monthly_graphs(panel, config.lookback_days)?;
    run_backtest_with_graphs(panel, config, &graphs)
}

struct ActivePair {
    i: usize,
    j: usize,
}

/// Run one strategy on precomputed monthly graphs (see [`monthly_graphs`]).
pub fn run_backtest_with_graphs(
    panel: &PricePanel,
    config: &BacktestConfig,
    graphs: &[MonthlyGraph],
) -> Result<DailyLedger> {
    config.validate()?;
    if graphs.is_empty() {
        return Err(Error::InsufficientData("no rebalance dates".into()));
    }
    if graphs.windows(2).any(|w| w[0].date_index >= w[1].date_index)
        || graphs.iter().any(|g| g.date_index + 1 < config.lookback_days || g.date_index + 1 >= panel.n_dates())
    {
        return Err(Error::InvalidParameter("monthly graphs do not fit this panel and lookback".into()));
    }
    let logs: Vec<Vec<f64>> = (0..panel.n_tickers())
        .into_par_iter()
        .map(|t| panel.series(t).iter().map(|p| p.ln()).collect())
        .collect();
    let fee = config.daily_fee();
    let last_formation = panel.n_dates() - 2;
    let mut days = Vec::new();
    let mut selections = Vec::with_capacity(graphs.len());
    let mut prev_signal: HashMap<(usize, usize), i64> = HashMap::new();

    for (m, graph) in graphs.iter().enumerate() {
        let sel = select(graph, panel, config)?;
        let pairs: Vec<ActivePair> = sel
            .pairs
            .iter()
            .map(|p| {
                let i = panel.ticker_index(&p.ticker_i).ok_or_else(|| Error::UnknownTicker(p.ticker_i.clone()))?;
                let j = panel.ticker_index(&p.ticker_j).ok_or_else(|| Error::UnknownTicker(p.ticker_j.clone()))?;
                Ok(ActivePair { i, j })
            })
            .collect::<Result<_>>()?;
        let month_end = graphs.get(m + 1).map_or(last_formation, |g| g.date_index - 1);
        let keep: HashMap<(usize, usize), i64> = pairs
            .iter()
            .map(|p| ((p.i, p.j), prev_signal.get(&(p.i, p.j)).copied().unwrap_or(0)))
            .collect();
        prev_signal = keep;

        for d in graph.date_index..=month_end {
            let window = DateWindow::trailing(d, config.lookback_days).expect("formation dates have full lookback");
            let rows: Vec<PairDay> = pairs
                .par_iter()
                .map(|p| pair_day(panel, &logs, config, window, d, p))
                .collect();
            let mut rows = rows;
            for (row, p) in rows.iter_mut().zip(&pairs) {
                let s = row.signal.signal;
                let charged = match config.fee_mode {
                    FeeMode::HeldDays => s != 0,
                    FeeMode::ChangeDays => s != prev_signal[&(p.i, p.j)],
                };
                row.fee = if charged { fee } else { 0.0 };
                row.net_return = row.gross_return - row.fee;
                prev_signal.insert((p.i, p.j), s);
            }
            let mut day = DayRecord {
                date: panel.dates()[d],
                realized_on: panel.dates()[d + 1],
                rebalance: d == graph.date_index,
                pairs: rows,
                positions: BTreeMap::new(),
                gross_return: 0.0,
                fees: 0.0,
                net_return: 0.0,
            };
            day.aggregate();
            days.push(day);
        }
        selections.push(sel);
    }
    Ok(DailyLedger { config: *config, days, selections })
}

fn pair_day(
    panel: &PricePanel,
    logs: &[Vec<f64>],
    config: &BacktestConfig,
    window: DateWindow,
    d: usize,
    p: &ActivePair,
) -> PairDay {
    let tickers = panel.tickers();
    let flat = |raw_score: Option<f64>, beta: Option<f64>, forced_flat: bool| PairDay {
        signal: SignalRecord {
            date: panel.dates()[d],
            ticker_i: tickers[p.i].clone(),
            ticker_j: tickers[p.j].clone(),
            raw_score,
            signal: 0,
        },
        beta,
        position_i: 0.0,
        position_j: 0.0,
        gross_return: 0.0,
        fee: 0.0,
        net_return: 0.0,
        forced_flat,
    };
    let x = &logs[p.i][window.start..window.end];
    let y = &logs[p.j][window.start..window.end];
    let next_ok = panel.price(p.i, d + 1).is_some() && panel.price(p.j, d + 1).is_some();
    if !next_ok || x.iter().chain(y).any(|v| v.is_nan()) {
        warn!("{}/{} flattened on {}: missing prices", tickers[p.i], tickers[p.j], panel.dates()[d]);
        return flat(None, None, true);
    }
    let (beta, _mu, residuals, residual_std) = match ols_fit(x, y) {
        Ok(f) => f,
        Err(e) => {
            warn!("{}/{} not traded on {}: {e}", tickers[p.i], tickers[p.j], panel.dates()[d]);
            return flat(None, None, false);
        }
    };
    let e = *residuals.last().expect("window is non-empty");
    let scored = match config.signal_kind {
        ScoreKind::ZScore => crate::pair_stats::zscore_value(e, residual_std).map(|z| (z, z_signal(z, config.k))),
        ScoreKind::QScore => ResidualQuantiles::from_residuals(&residuals)
            .and_then(|q| q.score(e))
            .map(|q| (q, q_signal(q))),
    };
    let (raw, signal) = match scored {
        Ok(v) => v,
        Err(_) => return flat(None, Some(beta), false),
    };
    let (position_i, position_j) = pair_positions(signal, beta);
    let ret = |t: usize| panel.series(t)[d + 1] / panel.series(t)[d] - 1.0;
    let gross_return = if signal == 0 { 0.0 } else { position_i * ret(p.i) + position_j * ret(p.j) };
    PairDay {
        signal: SignalRecord {
            date: panel.dates()[d],
            ticker_i: tickers[p.i].clone(),
            ticker_j: tickers[p.j].clone(),
            raw_score: Some(raw),
            signal,
        },
        beta: Some(beta),
        position_i,
        position_j,
        gross_return,
        fee: 0.0,
        net_return: gross_return,
        forced_flat: false,
    }
}
