//! Panel loading and the generate / select / backtest pipelines.

use crate::config::RunConfig;
use anyhow::{bail, Context, Result};
use log::info;
use pairmatch::analytics::{
    capital_normalized_returns, concentration_series, performance, performance_table_markdown, retention_series,
    strategy_correlation, turnover_series, CorrelationMatrix, PerformanceReport, ReturnBasis, StrategySeries,
};
use pairmatch::backtest::{monthly_graphs, rebalance_dates, run_backtest_with_graphs, DailyLedger};
use pairmatch::pair_stats::DateWindow;
use pairmatch::selection::{
    baseline_topk, build_pairs_graph, emit_portfolio_graph, max_weight_matching, GraphFormat, PortfolioSelection,
    SelectionMethod,
};
use pairmatch::synthetic::generate;
use pairmatch::PricePanel;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Load the configured panel (or generate it) and apply the universe and
/// date filters.
pub fn load_panel(cfg: &RunConfig) -> Result<PricePanel> {
    let panel = if cfg.prices.is_empty() {
        generate(&cfg.universe_spec()?)?
    } else {
        PricePanel::read_csv_path(Path::new(&cfg.prices)).with_context(|| format!("loading {}", cfg.prices))?
    };
    let panel = if cfg.universe.is_empty() { panel } else { panel.select_tickers(&cfg.universe)? };
    let (start, end) = cfg.date_range()?;
    let dates = panel.dates();
    let lo = start.map_or(0, |s| dates.partition_point(|d| *d < s));
    let hi = end.map_or(dates.len(), |e| dates.partition_point(|d| *d <= e));
    if lo >= hi {
        bail!("no trading dates between {} and {}", cfg.start_date, cfg.end_date);
    }
    Ok(if lo == 0 && hi == dates.len() { panel } else { panel.slice_dates(lo, hi) })
}

/// Collects output files and their hashes.
pub struct OutputDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.insert(rel.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }

    /// Write `manifest.json` and return its SHA-256. The recorded config
    /// leaves out the output directory so the hash does not depend on it.
    pub fn finish(self, command: &str, cfg: &RunConfig) -> Result<String> {
        let cfg = &recorded(cfg);
        #[derive(Serialize)]
        struct Entry<'a> {
            path: &'a str,
            sha256: &'a str,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            tool: &'static str,
            version: &'static str,
            command: &'a str,
            config: &'a RunConfig,
            files: Vec<Entry<'a>>,
        }
        let m = Manifest {
            tool: "pairmatch",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: cfg,
            files: self.files.iter().map(|(p, h)| Entry { path: p, sha256: h }).collect(),
        };
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}

/// The config as recorded in outputs: everything except `out`.
pub fn recorded(cfg: &RunConfig) -> RunConfig {
    RunConfig { out: String::new(), ..cfg.clone() }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.universe_spec()?;
    let panel = generate(&spec)?;
    let mut out = OutputDir::create(Path::new(&cfg.out))?;
    let mut csv = Vec::new();
    panel.write_csv(&mut csv)?;
    out.write("prices.csv", &csv)?;
    out.write_json("universe.json", &spec)?;
    out.finish("generate", cfg)
}

#[derive(Serialize)]
struct SelectionSummary<'a> {
    method: SelectionMethod,
    as_of: chrono::NaiveDate,
    window_start: chrono::NaiveDate,
    candidate_edges: usize,
    pairs: usize,
    concentration: usize,
    total_weight: f64,
    selection: &'a PortfolioSelection,
}

/// Select pairs on the trailing lookback window ending at the last date.
pub fn cmd_select(cfg: &RunConfig) -> Result<String> {
    let panel = load_panel(cfg)?;
    if panel.n_dates() < cfg.lookback {
        bail!("lookback {} exceeds the {} dates in the panel", cfg.lookback, panel.n_dates());
    }
    let window = DateWindow::trailing(panel.n_dates() - 1, cfg.lookback).expect("checked above");
    let graph = build_pairs_graph(&panel, window, panel.tickers())?;
    let mut selections = Vec::new();
    for m in cfg.methods()? {
        selections.push(match m {
            SelectionMethod::Matching => max_weight_matching(&graph),
            SelectionMethod::Baseline => baseline_topk(&graph, cfg.pairs_target)?,
        });
    }
    let mut out = OutputDir::create(Path::new(&cfg.out))?;
    for sel in &selections {
        let name = sel.method.label();
        out.write_json(
            &format!("selection_{name}.json"),
            &SelectionSummary {
                method: sel.method,
                as_of: sel.as_of,
                window_start: panel.dates()[window.start],
                candidate_edges: graph.edges.len(),
                pairs: sel.pairs.len(),
                concentration: pairmatch::selection::selection_concentration(sel),
                total_weight: sel.total_weight(),
                selection: sel,
            },
        )?;
        out.write(&format!("selection_{name}.csv"), emit_portfolio_graph(sel, GraphFormat::EdgeList).as_bytes())?;
        out.write(&format!("selection_{name}.dot"), emit_portfolio_graph(sel, GraphFormat::Dot).as_bytes())?;
        info!("{name}: {} pairs", sel.pairs.len());
    }
    out.finish("select", cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyReport {
    pub strategy: String,
    pub days: usize,
    /// Unit capital per pair: daily return is the sum over pairs.
    pub gross: Option<PerformanceReport>,
    pub net: Option<PerformanceReport>,
    /// Daily return divided by the number of selected pairs.
    pub gross_per_capital: Option<PerformanceReport>,
    pub net_per_capital: Option<PerformanceReport>,
    pub total_fees: f64,
    pub mean_turnover: f64,
    pub mean_retention: Option<f64>,
    pub mean_concentration: f64,
    pub concentration: Vec<(chrono::NaiveDate, usize)>,
}

fn perf(r: &[f64]) -> Option<PerformanceReport> {
    performance(r).ok()
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

pub fn strategy_report(ledger: &DailyLedger) -> StrategyReport {
    let conc = concentration_series(&ledger.selections);
    StrategyReport {
        strategy: ledger.config.strategy_label(),
        days: ledger.days.len(),
        gross: perf(&ledger.gross_returns()),
        net: perf(&ledger.net_returns()),
        gross_per_capital: perf(&capital_normalized_returns(ledger, ReturnBasis::Gross)),
        net_per_capital: perf(&capital_normalized_returns(ledger, ReturnBasis::Net)),
        total_fees: ledger.days.iter().map(|d| d.fees).sum(),
        mean_turnover: mean(turnover_series(ledger).into_iter().map(|x| x.1)).unwrap_or(0.0),
        mean_retention: mean(retention_series(&ledger.selections).into_iter().map(|x| x.1)),
        mean_concentration: mean(conc.iter().map(|x| x.1 as f64)).unwrap_or(0.0),
        concentration: conc,
    }
}

pub struct BacktestOutcome {
    pub ledgers: Vec<DailyLedger>,
    pub reports: Vec<StrategyReport>,
    pub correlation: Option<CorrelationMatrix>,
    pub manifest_sha256: String,
}

fn tables(reports: &[StrategyReport], pick: impl Fn(&StrategyReport) -> Option<PerformanceReport>, basis: ReturnBasis) -> String {
    let cols: Vec<(String, PerformanceReport)> =
        reports.iter().filter_map(|r| pick(r).map(|p| (r.strategy.clone(), p))).collect();
    let missing: Vec<&str> = reports.iter().filter(|r| pick(r).is_none()).map(|r| r.strategy.as_str()).collect();
    let mut s = performance_table_markdown(basis, &cols);
    if !missing.is_empty() {
        s.push_str(&format!("\nNo variation in returns (metrics undefined): {}\n", missing.join(", ")));
    }
    s
}

/// Run every configured strategy on one panel and write all artifacts.
/// Preconditions are checked before the output directory is touched.
pub fn cmd_backtest(cfg: &RunConfig) -> Result<BacktestOutcome> {
    let strategies = cfg.strategies()?;
    let panel = load_panel(cfg)?;
    if panel.n_dates() < cfg.lookback + 2 || rebalance_dates(&panel, cfg.lookback).is_empty() {
        bail!(
            "lookback {} does not fit the panel: {} dates, need the lookback plus a month start and one more day",
            cfg.lookback,
            panel.n_dates()
        );
    }
    let graphs = monthly_graphs(&panel, cfg.lookback)?;
    let mut ledgers = Vec::new();
    for s in &strategies {
        info!("running {}", s.strategy_label());
        ledgers.push(run_backtest_with_graphs(&panel, s, &graphs)?);
    }

    let mut out = OutputDir::create(Path::new(&cfg.out))?;
    out.write("config.toml", recorded(cfg).to_toml().as_bytes())?;
    let reports: Vec<StrategyReport> = ledgers.iter().map(strategy_report).collect();
    for l in &ledgers {
        let label = l.config.strategy_label();
        let mut pairs = Vec::new();
        l.write_pairs_csv(&mut pairs)?;
        out.write(&format!("ledger_{label}_pairs.csv"), &pairs)?;
        let mut port = Vec::new();
        l.write_portfolio_csv(&mut port)?;
        out.write(&format!("ledger_{label}_portfolio.csv"), &port)?;
    }
    let mut written = std::collections::BTreeSet::new();
    for l in &ledgers {
        let method = l.config.selection_method;
        if !written.insert(method.label()) {
            continue;
        }
        for sel in &l.selections {
            let dot = emit_portfolio_graph(sel, GraphFormat::Dot);
            out.write(&format!("graphs/{}_{}.dot", method.label(), sel.as_of), dot.as_bytes())?;
        }
    }

    let series: Vec<StrategySeries> = ledgers
        .iter()
        .map(|l| StrategySeries::new(l.config.strategy_label(), l.dates(), l.net_returns()))
        .collect();
    let correlation = match strategy_correlation(&series) {
        Ok(c) if series.len() > 1 => Some(c),
        Ok(_) => None,
        Err(e) => {
            log::warn!("correlation matrix skipped: {e}");
            None
        }
    };
    if let Some(c) = &correlation {
        out.write_json("correlation.json", c)?;
    }

    #[derive(Serialize)]
    struct Report<'a> {
        first_formation_date: Option<chrono::NaiveDate>,
        last_formation_date: Option<chrono::NaiveDate>,
        strategies: &'a [StrategyReport],
        net_return_correlation: &'a Option<CorrelationMatrix>,
    }
    let dates = ledgers.first().map(|l| l.dates()).unwrap_or_default();
    out.write_json(
        "report.json",
        &Report {
            first_formation_date: dates.first().copied(),
            last_formation_date: dates.last().copied(),
            strategies: &reports,
            net_return_correlation: &correlation,
        },
    )?;

    let mut md = String::from("# Backtest report\n\n## Gross returns (unit capital per pair)\n\n");
    md.push_str(&tables(&reports, |r| r.gross, ReturnBasis::Gross));
    md.push_str("\n## Net returns (unit capital per pair)\n\n");
    md.push_str(&tables(&reports, |r| r.net, ReturnBasis::Net));
    md.push_str("\n## Gross returns per unit of committed capital\n\n");
    md.push_str(&tables(&reports, |r| r.gross_per_capital, ReturnBasis::Gross));
    md.push_str("\n## Net returns per unit of committed capital\n\n");
    md.push_str(&tables(&reports, |r| r.net_per_capital, ReturnBasis::Net));
    md.push_str("\n## Portfolio structure\n\n| | Mean turnover | Mean retention | Mean concentration | Total fees |\n|---|---:|---:|---:|---:|\n");
    for r in &reports {
        md.push_str(&format!(
            "| {} | {:.4} | {} | {:.2} | {:.4} |\n",
            r.strategy,
            r.mean_turnover,
            r.mean_retention.map_or("n/a".into(), |x| format!("{x:.4}")),
            r.mean_concentration,
            r.total_fees
        ));
    }
    if let Some(c) = &correlation {
        md.push_str("\n## Correlation of daily net returns\n\n");
        md.push_str(&c.to_markdown());
    }
    out.write("report.md", md.as_bytes())?;

    let manifest_sha256 = out.finish("backtest", cfg)?;
    Ok(BacktestOutcome { ledgers, reports, correlation, manifest_sha256 })
}
