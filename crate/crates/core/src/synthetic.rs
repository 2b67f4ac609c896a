//! Reproducible synthetic price panels.
//!
//! Every stock follows an independent log-normal random walk
//! `log p[t+1] = log p[t] + mu + N(0, sigma^2)`. A planted pair replaces the
//! follower's walk by the leader's log-price plus i.i.d. `N(0, sigma_spread^2)`
//! noise, i.e. a cointegrated pair with unit slope and zero intercept.
//!
//! Each stock draws from its own ChaCha stream (stream id = stock index),
//! so a stock's path does not depend on how many other stocks exist or in
//! which order they are generated.

use crate::error::{Error, Result};
use crate::panel::PricePanel;
use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    pub leader: usize,
    pub follower: usize,
    pub sigma_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniverseSpec {
    pub n_stocks: usize,
    pub n_days: usize,
    pub planted_pairs: Vec<PlantedPair>,
    /// Per-stock daily drift is drawn uniformly from this range.
    pub drift_range: (f64, f64),
    /// Per-stock daily noise std dev is drawn uniformly from this range.
    pub noise_range: (f64, f64),
    pub seed: u64,
    /// Allow one leader to anchor several planted pairs (a shared-stock cluster).
    pub allow_shared_leaders: bool,
    pub start_date: NaiveDate,
}

impl UniverseSpec {
    /// Independent walks with drift and noise fixed at the given values.
    pub fn independent(n_stocks: usize, n_days: usize, drift: f64, noise: f64, seed: u64) -> Self {
        UniverseSpec {
            n_stocks,
            n_days,
            planted_pairs: Vec::new(),
            drift_range: (drift, drift),
            noise_range: (noise, noise),
            seed,
            allow_shared_leaders: false,
            start_date: default_start(),
        }
    }

    pub fn with_pairs(mut self, pairs: Vec<PlantedPair>) -> Self {
        self.planted_pairs = pairs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_days < 2 {
            return Err(Error::InvalidParameter("a universe needs at least 2 days".into()));
        }
        if self.n_stocks == 0 {
            return Err(Error::InvalidParameter("a universe needs at least one stock".into()));
        }
        let (d0, d1) = self.drift_range;
        let (s0, s1) = self.noise_range;
        if !(d0.is_finite() && d1.is_finite() && d0 <= d1) {
            return Err(Error::InvalidParameter(format!("bad drift range {:?}", self.drift_range)));
        }
        if !(s0.is_finite() && s1.is_finite() && 0.0 < s0 && s0 <= s1) {
            return Err(Error::InvalidParameter(format!("bad noise range {:?}", self.noise_range)));
        }
        let mut role = vec![Role::Free; self.n_stocks];
        for p in &self.planted_pairs {
            if p.leader >= self.n_stocks || p.follower >= self.n_stocks {
                return Err(Error::InvalidParameter(format!("planted pair {p:?} references a missing stock")));
            }
            if p.leader == p.follower {
                return Err(Error::InvalidParameter(format!("planted pair {p:?} uses one stock twice")));
            }
            if !(p.sigma_spread.is_finite() && p.sigma_spread > 0.0) {
                return Err(Error::InvalidParameter(format!("planted pair {p:?} needs a positive spread")));
            }
            if role[p.follower] != Role::Free {
                return Err(Error::InvalidParameter(format!("stock {} already belongs to a planted pair", p.follower)));
            }
            match role[p.leader] {
                Role::Free => {}
                Role::Leader if self.allow_shared_leaders => {}
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "stock {} already belongs to a planted pair",
                        p.leader
                    )))
                }
            }
            role[p.leader] = Role::Leader;
            role[p.follower] = Role::Follower;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Free,
    Leader,
    Follower,
}

pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

/// `n` consecutive weekdays starting at (or after) `start`.
pub fn weekday_calendar(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Ticker symbol for stock `i` in a universe of `n` stocks.
pub fn ticker_name(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(3);
    format!("S{i:0width$}")
}

// Spread noise uses a second family of streams so it never overlaps a walk.
const SPREAD_SEED_MASK: u64 = 0x9E37_79B9_7F4A_7C15;

fn stock_rng(seed: u64, stock: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stock as u64);
    rng
}

fn random_walk(spec: &UniverseSpec, stock: usize) -> Vec<f64> {
    let mut rng = stock_rng(spec.seed, stock);
    let start = rng.random_range(10f64.ln()..=500f64.ln());
    let mu = uniform(&mut rng, spec.drift_range);
    let sigma = uniform(&mut rng, spec.noise_range);
    let mut logs = Vec::with_capacity(spec.n_days);
    let mut x = start;
    logs.push(x);
    for _ in 1..spec.n_days {
        let z: f64 = StandardNormal.sample(&mut rng);
        x += mu + sigma * z;
        logs.push(x);
    }
    logs
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Generate the panel described by `spec`. Deterministic in `spec.seed`.
pub fn generate(spec: &UniverseSpec) -> Result<PricePanel> {
    spec.validate()?;
    let mut logs: Vec<Vec<f64>> = (0..spec.n_stocks).into_par_iter().map(|s| random_walk(spec, s)).collect();
    for p in &spec.planted_pairs {
        let mut rng = stock_rng(spec.seed ^ SPREAD_SEED_MASK, p.follower);
        let follower: Vec<f64> = logs[p.leader]
            .iter()
            .map(|&x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x + p.sigma_spread * z
            })
            .collect();
        logs[p.follower] = follower;
    }
    let prices = logs.into_iter().map(|l| l.into_iter().map(f64::exp).collect()).collect();
    let tickers = (0..spec.n_stocks).map(|i| ticker_name(i, spec.n_stocks)).collect();
    PricePanel::new(weekday_calendar(spec.start_date, spec.n_days), tickers, prices)
}
