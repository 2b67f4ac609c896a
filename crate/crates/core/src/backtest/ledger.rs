use super::BacktestConfig;
use crate::error::{Error, Result};
use crate::selection::PortfolioSelection;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Score and signal for one pair on one formation date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub date: NaiveDate,
    pub ticker_i: String,
    pub ticker_j: String,
    /// `None` when no score could be computed (degenerate fit, zero IQR,
    /// missing data); the signal is then 0.
    pub raw_score: Option<f64>,
    pub signal: i64,
}

/// One pair's row: positions formed at the close of `signal.date` and the
/// return they realize by the next close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDay {
    pub signal: SignalRecord,
    pub beta: Option<f64>,
    pub position_i: f64,
    pub position_j: f64,
    pub gross_return: f64,
    pub fee: f64,
    pub net_return: f64,
    /// Flattened because a price was missing in the window or on the next day.
    pub forced_flat: bool,
}

impl PairDay {
    pub fn is_active(&self) -> bool {
        self.signal.signal != 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    /// Formation date (positions set at this close).
    pub date: NaiveDate,
    /// Next trading date, on whose close the returns are realized.
    pub realized_on: NaiveDate,
    /// A new selection took effect on this date.
    pub rebalance: bool,
    pub pairs: Vec<PairDay>,
    /// Net dollar position per ticker, summed over pairs; zero entries omitted.
    pub positions: BTreeMap<String, f64>,
    pub gross_return: f64,
    pub fees: f64,
    pub net_return: f64,
}

impl DayRecord {
    pub fn active_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_active()).count()
    }

    /// Recompute ticker positions and portfolio totals from the pair rows.
    pub fn aggregate(&mut self) {
        let mut positions = BTreeMap::new();
        for p in &self.pairs {
            if p.is_active() {
                *positions.entry(p.signal.ticker_i.clone()).or_insert(0.0) += p.position_i;
                *positions.entry(p.signal.ticker_j.clone()).or_insert(0.0) += p.position_j;
            }
        }
        positions.retain(|_, v: &mut f64| *v != 0.0);
        self.positions = positions;
        self.gross_return = self.pairs.iter().map(|p| p.gross_return).sum();
        self.fees = self.pairs.iter().map(|p| p.fee).sum();
        self.net_return = self.pairs.iter().map(|p| p.net_return).sum();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyLedger {
    pub config: BacktestConfig,
    pub days: Vec<DayRecord>,
    /// One selection per rebalance date, in date order.
    pub selections: Vec<PortfolioSelection>,
}

#[derive(Serialize)]
struct PairRow<'a> {
    date: NaiveDate,
    realized_on: NaiveDate,
    ticker_i: &'a str,
    ticker_j: &'a str,
    raw_score: Option<f64>,
    signal: i64,
    beta: Option<f64>,
    position_i: f64,
    position_j: f64,
    gross_return: f64,
    fee: f64,
    net_return: f64,
    forced_flat: bool,
}

#[derive(Serialize)]
struct PortfolioRow {
    date: NaiveDate,
    realized_on: NaiveDate,
    rebalance: bool,
    selected_pairs: usize,
    active_pairs: usize,
    gross_return: f64,
    fees: f64,
    net_return: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

impl DailyLedger {
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.days.iter().map(|d| d.date).collect()
    }

    pub fn gross_returns(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.gross_return).collect()
    }

    pub fn net_returns(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.net_return).collect()
    }

    /// One row per (date, pair). Columns: `date, realized_on, ticker_i,
    /// ticker_j, raw_score, signal, beta, position_i, position_j,
    /// gross_return, fee, net_return, forced_flat`. Empty cells mean "none".
    pub fn write_pairs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for d in &self.days {
            for p in &d.pairs {
                w.serialize(PairRow {
                    date: d.date,
                    realized_on: d.realized_on,
                    ticker_i: &p.signal.ticker_i,
                    ticker_j: &p.signal.ticker_j,
                    raw_score: p.signal.raw_score,
                    signal: p.signal.signal,
                    beta: p.beta,
                    position_i: p.position_i,
                    position_j: p.position_j,
                    gross_return: p.gross_return,
                    fee: p.fee,
                    net_return: p.net_return,
                    forced_flat: p.forced_flat,
                })
                .map_err(csv_err)?;
            }
        }
        if self.days.iter().all(|d| d.pairs.is_empty()) {
            w.write_record([
                "date", "realized_on", "ticker_i", "ticker_j", "raw_score", "signal", "beta", "position_i",
                "position_j", "gross_return", "fee", "net_return", "forced_flat",
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per date. Columns: `date, realized_on, rebalance,
    /// selected_pairs, active_pairs, gross_return, fees, net_return`.
    pub fn write_portfolio_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for d in &self.days {
            w.serialize(PortfolioRow {
                date: d.date,
                realized_on: d.realized_on,
                rebalance: d.rebalance,
                selected_pairs: d.pairs.len(),
                active_pairs: d.active_pairs(),
                gross_return: d.gross_return,
                fees: d.fees,
                net_return: d.net_return,
            })
            .map_err(csv_err)?;
        }
        if self.days.is_empty() {
            w.write_record([
                "date", "realized_on", "rebalance", "selected_pairs", "active_pairs", "gross_return", "fees",
                "net_return",
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
