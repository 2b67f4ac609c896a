//! Log-price regressions, the single-lag ADF test, and spread scores.

mod adf;
mod ols;
mod scores;

pub use adf::{
    adf_critical_value, adf_single_lag, mackinnon_p_value, AdfResult, SignificanceLevel, P_VALUE_CEIL,
    P_VALUE_FLOOR,
};
pub use ols::{
    fit_log_series, fit_pair, fit_pair_indices, log_prices, ols_fit, DateWindow, FitSummary, RegressionFit,
    MIN_WINDOW,
};
pub use scores::{
    quantile_type7, qscore, score, score_series, winsorize, zscore, zscore_value, ResidualQuantiles, ScoreKind,
    ScoreSeries, Z_BOUND,
};
