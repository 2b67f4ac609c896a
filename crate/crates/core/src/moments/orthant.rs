//! Orthant probabilities of the standard bivariate normal.
//!
//! Conditioning on the first coordinate reduces each probability to a
//! one-dimensional integral of `phi(x) * Phi(.)`, which is evaluated with
//! adaptive Gauss-Kronrod (7/15) quadrature.

use super::normal::{std_normal_cdf, std_normal_pdf};
use crate::error::{Error, Result};

/// Which orthant of `(Z_a, Z_b)` to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    /// `P(Z_a >= k, Z_b >= k)`
    UpperUpper,
    /// `P(Z_a >= k, Z_b <= -k)`
    UpperLower,
}

const QUAD_TOL: f64 = 1e-13;
const MAX_INTERVALS: usize = 4096;
// Below this point the normal density underflows any tolerance we care about.
const TAIL_CUTOFF: f64 = 38.5;
const UPPER_SPAN: f64 = 12.0;

/// `P(Z_a >= k, Z_b >= k)` or `P(Z_a >= k, Z_b <= -k)` for a standard
/// bivariate normal with correlation `rho`.
pub fn bivariate_orthant(rho: f64, k: f64, quadrant: Quadrant) -> Result<f64> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "correlation must lie in (-1, 1), got {rho}"
        )));
    }
    if !k.is_finite() {
        return Err(Error::InvalidParameter(format!("threshold must be finite, got {k}")));
    }
    let s = (1.0 - rho * rho).sqrt();
    let lo = k.max(-TAIL_CUTOFF);
    let hi = k.max(0.0) + UPPER_SPAN;
    if lo >= TAIL_CUTOFF {
        return Ok(0.0);
    }
    let integrand = |x: f64| -> f64 {
        let z = match quadrant {
            Quadrant::UpperUpper => (rho * x - k) / s,
            Quadrant::UpperLower => (-k - rho * x) / s,
        };
        std_normal_pdf(x) * std_normal_cdf(z)
    };
    let p = adaptive_gk15(&integrand, lo, hi, QUAD_TOL, MAX_INTERVALS);
    Ok(p.clamp(0.0, 1.0))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive quadrature: repeatedly bisect the subinterval with
/// the largest error estimate until the summed estimate drops below `tol`.
pub(crate) fn adaptive_gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_intervals: usize) -> f64 {
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol || parts.len() >= max_intervals {
            break;
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (lv, le) = gk15(f, lo, mid);
        let (rv, re) = gk15(f, mid, hi);
        parts.push((lo, mid, lv, le));
        parts.push((mid, hi, rv, re));
    }
    // Sum in interval order so the result does not depend on refinement history.
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    parts.iter().map(|p| p.2).sum()
}
