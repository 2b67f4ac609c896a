//! Flat run configuration. Every key has a default; unknown keys are errors.

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use pairmatch::backtest::{BacktestConfig, FeeMode};
use pairmatch::pair_stats::ScoreKind;
use pairmatch::selection::SelectionMethod;
use pairmatch::synthetic::{default_start, PlantedPair, UniverseSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Long-format price CSV (`date,ticker,adj_close`). Empty: use the
    /// synthetic universe described by the `synthetic_*` keys.
    pub prices: String,
    pub out: String,
    pub seed: u64,
    /// Tickers to keep; empty keeps all.
    pub universe: Vec<String>,
    /// Inclusive ISO dates; empty means unbounded.
    pub start_date: String,
    pub end_date: String,
    /// matching, baseline or both.
    pub method: String,
    /// z, q or both.
    pub signal: String,
    pub k: f64,
    pub lookback: usize,
    pub fee: f64,
    /// held-days or change-days.
    pub fee_mode: String,
    pub pairs_target: usize,
    pub synthetic_stocks: usize,
    pub synthetic_days: usize,
    pub synthetic_pairs: usize,
    pub synthetic_sigma_spread: f64,
    /// Followers attached to one hub stock.
    pub synthetic_cluster_size: usize,
    pub synthetic_cluster_sigma_spread: f64,
    pub synthetic_drift_min: f64,
    pub synthetic_drift_max: f64,
    pub synthetic_noise_min: f64,
    pub synthetic_noise_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let bt = BacktestConfig::default();
        RunConfig {
            prices: String::new(),
            out: "pairmatch-out".into(),
            seed: 42,
            universe: Vec::new(),
            start_date: String::new(),
            end_date: String::new(),
            method: "both".into(),
            signal: "both".into(),
            k: bt.k,
            lookback: bt.lookback_days,
            fee: bt.fee_annual,
            fee_mode: bt.fee_mode.to_string(),
            pairs_target: bt.k_target,
            synthetic_stocks: 40,
            synthetic_days: 756,
            synthetic_pairs: 8,
            synthetic_sigma_spread: 0.0711,
            synthetic_cluster_size: 11,
            synthetic_cluster_sigma_spread: 0.005,
            synthetic_drift_min: -0.0005,
            synthetic_drift_max: 0.0005,
            synthetic_noise_min: 0.015,
            synthetic_noise_max: 0.02,
        }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub signal: Option<String>,
    pub k: Option<f64>,
    pub lookback: Option<usize>,
    pub fee: Option<f64>,
    pub pairs_target: Option<usize>,
    pub prices: Option<String>,
}

fn parse_date(key: &str, s: &str) -> Result<Option<NaiveDate>> {
    if s.is_empty() {
        return Ok(None);
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(Some)
        .with_context(|| format!("{key} must be an ISO date, got '{s}'"))
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("in config {}", p.display()))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = &o.$f { self.$f = v.clone(); })* };
        }
        set!(out, seed, method, signal, k, lookback, fee, pairs_target, prices);
        self.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.methods()?;
        self.signals()?;
        self.fee_mode()?;
        self.date_range()?;
        for s in self.strategies()? {
            s.validate()?;
        }
        if self.prices.is_empty() {
            self.universe_spec()?.validate()?;
        }
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<SelectionMethod>> {
        Ok(match self.method.as_str() {
            "both" => vec![SelectionMethod::Matching, SelectionMethod::Baseline],
            m => vec![m.parse()?],
        })
    }

    pub fn signals(&self) -> Result<Vec<ScoreKind>> {
        Ok(match self.signal.as_str() {
            "both" => vec![ScoreKind::QScore, ScoreKind::ZScore],
            s => vec![s.parse()?],
        })
    }

    pub fn fee_mode(&self) -> Result<FeeMode> {
        Ok(self.fee_mode.parse()?)
    }

    pub fn date_range(&self) -> Result<(Option<NaiveDate>, Option<NaiveDate>)> {
        let start = parse_date("start_date", &self.start_date)?;
        let end = parse_date("end_date", &self.end_date)?;
        if let (Some(s), Some(e)) = (start, end) {
            if s > e {
                bail!("start_date {s} is after end_date {e}");
            }
        }
        Ok((start, end))
    }

    /// One backtest configuration per (method, signal), in MQ MZ BQ BZ order.
    pub fn strategies(&self) -> Result<Vec<BacktestConfig>> {
        let fee_mode = self.fee_mode()?;
        let mut out = Vec::new();
        for m in self.methods()? {
            for s in self.signals()? {
                out.push(BacktestConfig {
                    selection_method: m,
                    signal_kind: s,
                    k: self.k,
                    lookback_days: self.lookback,
                    fee_annual: self.fee,
                    k_target: self.pairs_target,
                    fee_mode,
                });
            }
        }
        Ok(out)
    }

    /// Independent pairs first, then a hub with its followers; the rest of
    /// the stocks are free walks.
    pub fn universe_spec(&self) -> Result<UniverseSpec> {
        let independent = 2 * self.synthetic_pairs;
        let cluster = if self.synthetic_cluster_size > 0 { self.synthetic_cluster_size + 1 } else { 0 };
        if independent + cluster > self.synthetic_stocks {
            bail!(
                "synthetic universe of {} stocks cannot hold {} pairs and a cluster of {}",
                self.synthetic_stocks,
                self.synthetic_pairs,
                cluster
            );
        }
        let mut pairs: Vec<PlantedPair> = (0..self.synthetic_pairs)
            .map(|p| PlantedPair { leader: 2 * p, follower: 2 * p + 1, sigma_spread: self.synthetic_sigma_spread })
            .collect();
        pairs.extend((1..=self.synthetic_cluster_size).map(|f| PlantedPair {
            leader: independent,
            follower: independent + f,
            sigma_spread: self.synthetic_cluster_sigma_spread,
        }));
        Ok(UniverseSpec {
            n_stocks: self.synthetic_stocks,
            n_days: self.synthetic_days,
            planted_pairs: pairs,
            drift_range: (self.synthetic_drift_min, self.synthetic_drift_max),
            noise_range: (self.synthetic_noise_min, self.synthetic_noise_max),
            seed: self.seed,
            allow_shared_leaders: true,
            start_date: default_start(),
        })
    }
}
