//! The pairs graph and the two portfolio selection rules.

mod blossom;
mod graph;

pub use blossom::max_weight_matching as max_weight_matching_raw;
pub use graph::{build_pairs_graph, PairEdge, PairsGraph};

use crate::error::{Error, Result};
use crate::pair_stats::FitSummary;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// Edge weights are quantized to this many units per 1.0 before matching.
pub const WEIGHT_SCALE: f64 = 1e9;

/// Default number of pairs held by the baseline portfolio.
pub const DEFAULT_K_TARGET: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Matching,
    Baseline,
}

impl SelectionMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SelectionMethod::Matching => "matching",
            SelectionMethod::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matching" | "m" => Ok(SelectionMethod::Matching),
            "baseline" | "b" => Ok(SelectionMethod::Baseline),
            other => Err(Error::InvalidParameter(format!(
                "unknown selection method '{other}' (expected matching or baseline)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPair {
    pub ticker_i: String,
    pub ticker_j: String,
    pub weight: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub fit: FitSummary,
}

impl SelectedPair {
    fn from_edge(graph: &PairsGraph, e: &PairEdge) -> Self {
        let (a, b) = graph.tickers_of(e);
        SelectedPair {
            ticker_i: a.to_string(),
            ticker_j: b.to_string(),
            weight: e.weight,
            t_stat: e.adf.t_stat,
            p_value: e.adf.p_value,
            fit: e.fit,
        }
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.ticker_i, &self.ticker_j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSelection {
    pub method: SelectionMethod,
    pub pairs: Vec<SelectedPair>,
    pub as_of: NaiveDate,
}

impl PortfolioSelection {
    pub fn ticker_pairs(&self) -> Vec<(String, String)> {
        self.pairs.iter().map(|p| (p.ticker_i.clone(), p.ticker_j.clone())).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.pairs.iter().map(|p| p.weight).sum()
    }
}

/// Maximum-weight matching over the positive-weight edges. The result lists
/// pairs in lexicographic ticker order.
///
/// Weights are quantized to `1 / WEIGHT_SCALE` so the solver runs in exact
/// integer arithmetic; with edges fed in lexicographic order the solver is
/// deterministic, which fixes the choice among tied optima.
pub fn max_weight_matching(graph: &PairsGraph) -> PortfolioSelection {
    let candidates: Vec<&PairEdge> = graph.edges.iter().filter(|e| e.weight > 0.0).collect();
    let raw: Vec<(usize, usize, i64)> = candidates
        .iter()
        .map(|e| (e.i, e.j, (e.weight * WEIGHT_SCALE).round() as i64))
        .filter(|e| e.2 > 0)
        .collect();
    let mate = blossom::max_weight_matching(graph.nodes.len(), &raw);
    let pairs = candidates
        .into_iter()
        .filter(|e| mate[e.i] == Some(e.j))
        .map(|e| SelectedPair::from_edge(graph, e))
        .collect();
    PortfolioSelection { method: SelectionMethod::Matching, pairs, as_of: graph.as_of }
}

/// The `k_target` pairs with the smallest p-values. Ordering uses the
/// t-statistic, which ranks identically but without the ties introduced by
/// clamping p-values; equal statistics fall back to the ticker pair.
pub fn baseline_topk(graph: &PairsGraph, k_target: usize) -> Result<PortfolioSelection> {
    if k_target == 0 {
        return Err(Error::InvalidParameter("k_target must be at least 1".into()));
    }
    let mut edges: Vec<&PairEdge> = graph.edges.iter().collect();
    edges.sort_by(|a, b| {
        a.adf
            .t_stat
            .total_cmp(&b.adf.t_stat)
            .then_with(|| graph.tickers_of(a).cmp(&graph.tickers_of(b)))
    });
    let pairs = edges.into_iter().take(k_target).map(|e| SelectedPair::from_edge(graph, e)).collect();
    Ok(PortfolioSelection { method: SelectionMethod::Baseline, pairs, as_of: graph.as_of })
}

fn degrees(sel: &PortfolioSelection) -> BTreeMap<&str, usize> {
    let mut deg = BTreeMap::new();
    for p in &sel.pairs {
        *deg.entry(p.ticker_i.as_str()).or_insert(0) += 1;
        *deg.entry(p.ticker_j.as_str()).or_insert(0) += 1;
    }
    deg
}

/// Largest number of selected pairs any one ticker belongs to.
pub fn selection_concentration(sel: &PortfolioSelection) -> usize {
    degrees(sel).into_values().max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphFormat {
    EdgeList,
    Dot,
}

/// Header of the edge-list format.
pub const EDGE_LIST_HEADER: &str = "ticker_i,ticker_j,weight,p_value";

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Render the portfolio graph. Lines are sorted by ticker pair.
pub fn emit_portfolio_graph(sel: &PortfolioSelection, format: GraphFormat) -> String {
    let mut pairs: Vec<&SelectedPair> = sel.pairs.iter().collect();
    pairs.sort_by(|a, b| a.key().cmp(&b.key()));
    let mut out = String::new();
    match format {
        GraphFormat::EdgeList => {
            out.push_str(EDGE_LIST_HEADER);
            out.push('\n');
            for p in pairs {
                let _ = writeln!(out, "{},{},{},{}", p.ticker_i, p.ticker_j, p.weight, p.p_value);
            }
        }
        GraphFormat::Dot => {
            let _ = writeln!(out, "graph portfolio {{");
            let _ = writeln!(out, "  label={};", dot_id(&format!("{} {}", sel.method, sel.as_of)));
            let nodes: BTreeSet<&str> = pairs.iter().flat_map(|p| [p.ticker_i.as_str(), p.ticker_j.as_str()]).collect();
            for n in nodes {
                let _ = writeln!(out, "  {};", dot_id(n));
            }
            for p in pairs {
                let _ = writeln!(
                    out,
                    "  {} -- {} [weight={}, label=\"{:.2}\"];",
                    dot_id(&p.ticker_i),
                    dot_id(&p.ticker_j),
                    p.weight,
                    p.weight
                );
            }
            out.push_str("}\n");
        }
    }
    out
}
