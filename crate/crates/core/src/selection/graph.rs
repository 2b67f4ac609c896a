use crate::error::{Error, Result};
use crate::pair_stats::{adf_single_lag, fit_log_series, log_prices, AdfResult, DateWindow, FitSummary, MIN_WINDOW};
use crate::panel::PricePanel;
use chrono::NaiveDate;
use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One candidate pair. `i < j` index into [`PairsGraph::nodes`]; the fit
/// regresses `log p_j` on `log p_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEdge {
    pub i: usize,
    pub j: usize,
    /// `-adf.t_stat`.
    pub weight: f64,
    pub fit: FitSummary,
    pub adf: AdfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsGraph {
    /// Eligible tickers, sorted.
    pub nodes: Vec<String>,
    /// Sorted by `(i, j)`, i.e. by lexicographic ticker pair.
    pub edges: Vec<PairEdge>,
    pub window: DateWindow,
    /// Last date of the window.
    pub as_of: NaiveDate,
}

impl PairsGraph {
    pub fn tickers_of(&self, edge: &PairEdge) -> (&str, &str) {
        (&self.nodes[edge.i], &self.nodes[edge.j])
    }

    /// Check the structural invariants: sorted nodes, `i < j`, no duplicates,
    /// and `weight == -t_stat`.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedEdges("graph nodes are not sorted and unique".into()));
        }
        let mut prev: Option<(usize, usize)> = None;
        for e in &self.edges {
            if e.i >= e.j || e.j >= self.nodes.len() {
                return Err(Error::MalformedEdges(format!("bad edge ({}, {})", e.i, e.j)));
            }
            if prev.is_some_and(|p| p >= (e.i, e.j)) {
                return Err(Error::MalformedEdges(format!("edge ({}, {}) is duplicated or out of order", e.i, e.j)));
            }
            if e.weight != -e.adf.t_stat {
                return Err(Error::MalformedEdges(format!("edge ({}, {}) weight is not -t_stat", e.i, e.j)));
            }
            prev = Some((e.i, e.j));
        }
        Ok(())
    }
}

/// Fit and test every unordered pair of `universe` tickers that have complete
/// prices over `window`. Pairs whose regression or ADF test is degenerate
/// (constant prices, exact fits) get no edge.
pub fn build_pairs_graph(panel: &PricePanel, window: DateWindow, universe: &[String]) -> Result<PairsGraph> {
    if window.end > panel.n_dates() || window.len() < MIN_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "window {window:?} must lie inside {} dates and hold at least {MIN_WINDOW}",
            panel.n_dates()
        )));
    }
    let mut idx = Vec::with_capacity(universe.len());
    for t in universe {
        idx.push(panel.ticker_index(t).ok_or_else(|| Error::UnknownTicker(t.clone()))?);
    }
    let mut eligible: Vec<usize> = idx
        .into_iter()
        .filter(|&t| panel.is_complete(t, window.start, window.end))
        .collect();
    eligible.sort_by(|a, b| panel.tickers()[*a].cmp(&panel.tickers()[*b]));
    eligible.dedup();
    if eligible.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} eligible tickers in window {window:?}, need at least 2",
            eligible.len()
        )));
    }
    let logs: Vec<Vec<f64>> = eligible
        .par_iter()
        .map(|&t| log_prices(panel, t, window))
        .collect::<Result<_>>()?;
    let n = eligible.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let edges: Vec<PairEdge> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let edge = fit_log_series(&logs[i], &logs[j], window).and_then(|fit| {
                let adf = adf_single_lag(&fit.residuals)?;
                Ok(PairEdge { i, j, weight: -adf.t_stat, fit: fit.summary(), adf })
            });
            match edge {
                Ok(e) => Some(e),
                Err(err) => {
                    debug!("no edge for pair ({i}, {j}): {err}");
                    None
                }
            }
        })
        .collect();
    Ok(PairsGraph {
        nodes: eligible.iter().map(|&t| panel.tickers()[t].clone()).collect(),
        edges,
        window,
        as_of: panel.dates()[window.end - 1],
    })
}
