use super::ols::RegressionFit;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Winsorization bound for z-scores.
pub const Z_BOUND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    ZScore,
    QScore,
}

impl ScoreKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScoreKind::ZScore => "z-score",
            ScoreKind::QScore => "q-score",
        }
    }
}

impl std::fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "zscore" | "z-score" => Ok(ScoreKind::ZScore),
            "q" | "qscore" | "q-score" => Ok(ScoreKind::QScore),
            other => Err(Error::InvalidParameter(format!("unknown signal kind '{other}' (expected z or q)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub kind: ScoreKind,
    pub values: Vec<f64>,
}

pub fn winsorize(z: f64) -> f64 {
    z.clamp(-Z_BOUND, Z_BOUND)
}

/// `residual / residual_std`, winsorized into `[-3, 3]`.
pub fn zscore_value(residual: f64, residual_std: f64) -> Result<f64> {
    if !(residual_std > 0.0) || !residual_std.is_finite() {
        return Err(Error::Degenerate(format!("residual standard deviation {residual_std} is not positive")));
    }
    Ok(winsorize(residual / residual_std))
}

pub fn zscore(fit: &RegressionFit, at: usize) -> Result<f64> {
    zscore_value(fit.residual_at(at)?, fit.residual_std)
}

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
/// `sorted` must be ascending and non-empty.
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualQuantiles {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

impl ResidualQuantiles {
    pub fn from_residuals(residuals: &[f64]) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::InsufficientData("no residuals to take quantiles of".into()));
        }
        let mut sorted = residuals.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(ResidualQuantiles {
            q25: quantile_type7(&sorted, 0.25),
            q50: quantile_type7(&sorted, 0.50),
            q75: quantile_type7(&sorted, 0.75),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }

    pub fn score(&self, residual: f64) -> Result<f64> {
        let iqr = self.iqr();
        if !(iqr > 0.0) {
            return Err(Error::Degenerate("residual interquartile range is zero".into()));
        }
        Ok((residual - self.q50) / iqr)
    }
}

/// `(e - median) / IQR` with quantiles taken over the fit window's residuals.
pub fn qscore(fit: &RegressionFit, at: usize) -> Result<f64> {
    let e = fit.residual_at(at)?;
    ResidualQuantiles::from_residuals(&fit.residuals)?.score(e)
}

pub fn score(fit: &RegressionFit, at: usize, kind: ScoreKind) -> Result<f64> {
    match kind {
        ScoreKind::ZScore => zscore(fit, at),
        ScoreKind::QScore => qscore(fit, at),
    }
}

/// Scores for every residual in the fit window.
pub fn score_series(fit: &RegressionFit, kind: ScoreKind) -> Result<ScoreSeries> {
    let values = match kind {
        ScoreKind::ZScore => fit
            .residuals
            .iter()
            .map(|&e| zscore_value(e, fit.residual_std))
            .collect::<Result<Vec<_>>>()?,
        ScoreKind::QScore => {
            let q = ResidualQuantiles::from_residuals(&fit.residuals)?;
            fit.residuals.iter().map(|&e| q.score(e)).collect::<Result<Vec<_>>>()?
        }
    };
    Ok(ScoreSeries { kind, values })
}
