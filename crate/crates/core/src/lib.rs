//! Research engine for matching-based pairs trading.
//!
//! The crate is organized around the life of a pairs portfolio:
//!
//! * [`moments`] and [`portfolio_theory`] give closed-form return moments for
//!   threshold-traded pairs and compose them into theoretical portfolio
//!   Sharpe ratios.
//! * [`synthetic`] generates reproducible price panels under the same models.
//! * [`pair_stats`] fits log-price regressions, runs the single-lag ADF test,
//!   and scores spreads.
//! * [`selection`] builds the pairs graph and picks a portfolio either by
//!   maximum-weight matching or by ranking p-values.
//! * [`backtest`] trades a selection day by day; [`analytics`] measures it.

pub mod analytics;
pub mod backtest;
pub mod error;
pub mod moments;
pub mod pair_stats;
pub mod panel;
pub mod portfolio_theory;
pub mod selection;
pub mod synthetic;

pub use error::{Error, Result};
pub use panel::PricePanel;
