use super::ols::MIN_WINDOW;
use crate::error::{Error, Result};
use crate::moments::std_normal_cdf;
use serde::{Deserialize, Serialize};

/// Bounds applied to every reported p-value.
pub const P_VALUE_FLOOR: f64 = 1e-6;
pub const P_VALUE_CEIL: f64 = 0.9999;

// MacKinnon (1994) response surface, no deterministic terms, one variable.
const TAU_STAR: f64 = -1.04;
const TAU_MIN: f64 = -19.04;
const SMALL_P: [f64; 3] = [0.6344, 1.2378, 0.032496];
const LARGE_P: [f64; 4] = [0.4797, 0.93557, -0.06999, 0.033066];

// MacKinnon (2010) finite-sample critical values, no deterministic terms.
const CRIT_1: [f64; 4] = [-2.56574, -2.2358, -3.627, 0.0];
const CRIT_5: [f64; 4] = [-1.94100, -0.2686, -3.365, 31.223];
const CRIT_10: [f64; 4] = [-1.61682, 0.2656, -2.714, 25.364];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignificanceLevel {
    One,
    Five,
    Ten,
}

impl SignificanceLevel {
    pub fn alpha(&self) -> f64 {
        match self {
            SignificanceLevel::One => 0.01,
            SignificanceLevel::Five => 0.05,
            SignificanceLevel::Ten => 0.10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub t_stat: f64,
    pub p_value: f64,
    /// Observations in the test regression (series length minus two).
    pub nobs: usize,
}

impl AdfResult {
    pub fn critical_value(&self, level: SignificanceLevel) -> f64 {
        adf_critical_value(level, self.nobs)
    }

    pub fn rejects_at(&self, level: SignificanceLevel) -> bool {
        self.t_stat < self.critical_value(level)
    }
}

fn horner(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Approximate p-value of a no-constant unit-root t-statistic, clamped to
/// `[P_VALUE_FLOOR, P_VALUE_CEIL]`.
pub fn mackinnon_p_value(t_stat: f64) -> f64 {
    let raw = if t_stat.is_nan() {
        1.0
    } else if t_stat < TAU_MIN {
        0.0
    } else if t_stat <= TAU_STAR {
        std_normal_cdf(horner(&SMALL_P, t_stat))
    } else {
        std_normal_cdf(horner(&LARGE_P, t_stat))
    };
    raw.clamp(P_VALUE_FLOOR, P_VALUE_CEIL)
}

/// Critical value of the no-constant test for a regression with `nobs` observations.
pub fn adf_critical_value(level: SignificanceLevel, nobs: usize) -> f64 {
    let c = match level {
        SignificanceLevel::One => &CRIT_1,
        SignificanceLevel::Five => &CRIT_5,
        SignificanceLevel::Ten => &CRIT_10,
    };
    horner(c, 1.0 / nobs as f64)
}

/// Single-lag augmented Dickey-Fuller test without deterministic terms:
/// `d e_t = gamma * e_{t-1} + phi * d e_{t-1} + u_t`.
pub fn adf_single_lag(series: &[f64]) -> Result<AdfResult> {
    let n = series.len();
    if n < MIN_WINDOW {
        return Err(Error::InsufficientData(format!("ADF needs at least {MIN_WINDOW} points, got {n}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("ADF input contains non-finite values".into()));
    }
    let nobs = n - 2;
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 2..n {
        let y = series[t] - series[t - 1];
        let x1 = series[t - 1];
        let x2 = series[t - 1] - series[t - 2];
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det > 1e-12 * a11 * a22) {
        return Err(Error::Degenerate("ADF regressors are collinear".into()));
    }
    let gamma = (a22 * b1 - a12 * b2) / det;
    let phi = (a11 * b2 - a12 * b1) / det;
    let mut ssr = 0.0;
    let mut sy2 = 0.0;
    for t in 2..n {
        let y = series[t] - series[t - 1];
        let u = y - gamma * series[t - 1] - phi * (series[t - 1] - series[t - 2]);
        ssr += u * u;
        sy2 += y * y;
    }
    if !(ssr > 1e-24 * sy2) {
        return Err(Error::Degenerate("ADF regression fits exactly (deterministic series)".into()));
    }
    let s2 = ssr / (nobs - 2) as f64;
    let se = (s2 * a22 / det).sqrt();
    let t_stat = gamma / se;
    Ok(AdfResult { t_stat, p_value: mackinnon_p_value(t_stat), nobs })
}
