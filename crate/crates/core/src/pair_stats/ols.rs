use crate::error::{Error, Result};
use crate::panel::PricePanel;
use serde::{Deserialize, Serialize};

/// Fewest observations a regression window may hold.
pub const MIN_WINDOW: usize = 30;

/// Half-open range of panel date indices `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: usize,
    pub end: usize,
}

impl DateWindow {
    pub fn new(start: usize, end: usize) -> Self {
        DateWindow { start, end }
    }

    /// The `len` observations ending at (and including) date index `last`.
    pub fn trailing(last: usize, len: usize) -> Option<Self> {
        (last + 1 >= len).then(|| DateWindow { start: last + 1 - len, end: last + 1 })
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, date: usize) -> bool {
        self.start <= date && date < self.end
    }
}

/// OLS fit of `log p_j = mu + beta * log p_i + eps` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub beta: f64,
    pub mu: f64,
    /// Residuals in date order, one per window observation.
    pub residuals: Vec<f64>,
    /// Residual standard deviation, `sqrt(SSR / (n - 2))`.
    pub residual_std: f64,
    pub window: DateWindow,
}

impl RegressionFit {
    /// Residual on panel date index `date`.
    pub fn residual_at(&self, date: usize) -> Result<f64> {
        if !self.window.contains(date) {
            return Err(Error::InvalidParameter(format!(
                "date index {date} is outside the fit window {:?}",
                self.window
            )));
        }
        Ok(self.residuals[date - self.window.start])
    }

    pub fn summary(&self) -> FitSummary {
        FitSummary { beta: self.beta, mu: self.mu, residual_std: self.residual_std, window: self.window }
    }
}

/// The coefficients of a [`RegressionFit`] without its residual series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub beta: f64,
    pub mu: f64,
    pub residual_std: f64,
    pub window: DateWindow,
}

/// Regress `y` on `x` with an intercept. Returns `(beta, mu, residuals, residual_std)`.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, Vec<f64>, f64)> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidParameter(format!("regressor has {n} points, response {}", y.len())));
    }
    if n < MIN_WINDOW {
        return Err(Error::InsufficientData(format!("{n} observations, need at least {MIN_WINDOW}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut sx2) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        sxx += dx * dx;
        sxy += dx * (b - my);
        sx2 += a * a;
    }
    if sxx <= 1e-14 * sx2 {
        return Err(Error::Degenerate("regressor has zero variance (constant price)".into()));
    }
    let beta = sxy / sxx;
    let mu = my - beta * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - mu - beta * a).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    Ok((beta, mu, residuals, (ssr / (nf - 2.0)).sqrt()))
}

/// Natural log of `ticker`'s prices over `window`, failing on any missing cell.
pub fn log_prices(panel: &PricePanel, ticker: usize, window: DateWindow) -> Result<Vec<f64>> {
    if window.end > panel.n_dates() || window.start >= window.end {
        return Err(Error::InvalidParameter(format!(
            "window {window:?} does not fit a panel of {} dates",
            panel.n_dates()
        )));
    }
    (window.start..window.end)
        .map(|d| {
            panel.price(ticker, d).map(f64::ln).ok_or_else(|| Error::MissingPrice {
                ticker: panel.tickers()[ticker].clone(),
                date: panel.dates()[d].to_string(),
            })
        })
        .collect()
}

/// Fit the pair `(i, j)` over `window`, regressing `log p_j` on `log p_i`.
pub fn fit_pair(panel: &PricePanel, i: &str, j: &str, window: DateWindow) -> Result<RegressionFit> {
    let ii = panel.ticker_index(i).ok_or_else(|| Error::UnknownTicker(i.to_string()))?;
    let jj = panel.ticker_index(j).ok_or_else(|| Error::UnknownTicker(j.to_string()))?;
    fit_pair_indices(panel, ii, jj, window)
}

pub fn fit_pair_indices(panel: &PricePanel, i: usize, j: usize, window: DateWindow) -> Result<RegressionFit> {
    if window.len() < MIN_WINDOW {
        return Err(Error::InsufficientData(format!(
            "window of {} observations, need at least {MIN_WINDOW}",
            window.len()
        )));
    }
    let x = log_prices(panel, i, window)?;
    let y = log_prices(panel, j, window)?;
    fit_log_series(&x, &y, window)
}

/// Fit from precomputed log-price slices that cover `window`.
pub fn fit_log_series(x: &[f64], y: &[f64], window: DateWindow) -> Result<RegressionFit> {
    let (beta, mu, residuals, residual_std) = ols_fit(x, y)?;
    Ok(RegressionFit { beta, mu, residuals, residual_std, window })
}
