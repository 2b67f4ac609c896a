//! Closed forms against Monte Carlo: one row per quantity per parameter set.

use super::closed_form::{
    cointegrated_pair_mean, cointegrated_pair_variance, cointegrated_shared_covariance, noncoint_pair_moments,
    noncoint_shared_covariance, PairModelParams, TripleModelParams,
};
use super::monte_carlo::{mc_pair_moments, Estimate, McModel};
use crate::error::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Rows pass when the closed form is within this many standard errors.
pub const Z_TOLERANCE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    CointMean,
    CointVariance,
    CointSharedCov,
    NoncointMean,
    NoncointVariance,
    NoncointSharedCov,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::CointMean,
        Quantity::CointVariance,
        Quantity::CointSharedCov,
        Quantity::NoncointMean,
        Quantity::NoncointVariance,
        Quantity::NoncointSharedCov,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Quantity::CointMean => "coint-mean",
            Quantity::CointVariance => "coint-variance",
            Quantity::CointSharedCov => "coint-shared-cov",
            Quantity::NoncointMean => "noncoint-mean",
            Quantity::NoncointVariance => "noncoint-variance",
            Quantity::NoncointSharedCov => "noncoint-shared-cov",
        }
    }
}

/// One parameter set: two cointegrated pairs sharing stock 1 and three
/// independent stocks for the non-cointegrated quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterSet {
    pub pair_a: PairModelParams,
    pub pair_b: PairModelParams,
    pub triple: TripleModelParams,
}

impl ParameterSet {
    /// Homogeneous stocks with drift 0.0005 and noise 0.018, spread 0.0711,
    /// threshold 2, one trading year elapsed.
    pub fn reference() -> Self {
        let pair = PairModelParams { mu1: 0.0005, sigma1: 0.018, sigma: 0.0711, k: 2.0 };
        ParameterSet {
            pair_a: pair,
            pair_b: pair,
            triple: TripleModelParams { mu: [0.0005; 3], sigma: [0.018; 3], k: 2.0, t: 252 },
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mu1 = rng.random_range(-0.001..0.001);
        let sigma1 = rng.random_range(0.01..0.03);
        let mut pair = || PairModelParams {
            mu1,
            sigma1,
            sigma: rng.random_range(0.02..0.1),
            k: rng.random_range(0.5..2.5),
        };
        let (pair_a, pair_b) = (pair(), pair());
        let mu = std::array::from_fn(|_| rng.random_range(-0.001..0.001));
        let sigma = std::array::from_fn(|_| rng.random_range(0.01..0.03));
        let k = rng.random_range(0.5..2.5);
        let t = [21, 63, 126, 252, 504][rng.random_range(0..5)];
        ParameterSet { pair_a, pair_b, triple: TripleModelParams { mu, sigma, k, t } }
    }
}

/// The closed forms under test. Swapping one out lets a test confirm the
/// harness notices.
#[derive(Clone, Copy)]
pub struct Formulas {
    pub coint_mean: fn(&PairModelParams) -> Result<f64>,
    pub coint_variance: fn(&PairModelParams) -> Result<f64>,
    pub coint_shared_cov: fn(&PairModelParams, &PairModelParams) -> Result<f64>,
    pub noncoint_mean: fn(&TripleModelParams) -> Result<f64>,
    pub noncoint_variance: fn(&TripleModelParams) -> Result<f64>,
    pub noncoint_shared_cov: fn(&TripleModelParams) -> Result<f64>,
}

impl Default for Formulas {
    fn default() -> Self {
        Formulas {
            coint_mean: cointegrated_pair_mean,
            coint_variance: cointegrated_pair_variance,
            coint_shared_cov: cointegrated_shared_covariance,
            noncoint_mean: |p| Ok(noncoint_pair_moments(p, (0, 1))?.mean),
            noncoint_variance: |p| Ok(noncoint_pair_moments(p, (0, 1))?.variance),
            noncoint_shared_cov: noncoint_shared_covariance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub set: String,
    pub quantity: Quantity,
    pub closed_form: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

fn row(set: &str, quantity: Quantity, closed_form: f64, est: Estimate) -> ValidationRow {
    let z = est.z_score(closed_form);
    ValidationRow {
        set: set.to_string(),
        quantity,
        closed_form,
        mc_estimate: est.value,
        std_error: est.std_error,
        z,
        pass: z.abs() <= Z_TOLERANCE,
    }
}

/// Seed of the `model`-th simulation for parameter set `set`.
fn sub_seed(seed: u64, set: usize, model: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((set as u64) << 8 | model as u64)
}

/// Rows for one parameter set, in `Quantity::ALL` order.
pub fn validate_set(
    name: &str,
    index: usize,
    set: &ParameterSet,
    formulas: &Formulas,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<ValidationRow>> {
    let coint = mc_pair_moments(&McModel::Cointegrated(set.pair_a), n_paths, sub_seed(seed, index, 0))?;
    let shared = mc_pair_moments(
        &McModel::SharedCointegrated { a: set.pair_a, b: set.pair_b },
        n_paths,
        sub_seed(seed, index, 1),
    )?;
    let nonc = mc_pair_moments(
        &McModel::NonCointegrated { params: set.triple, stocks: (0, 1) },
        n_paths,
        sub_seed(seed, index, 2),
    )?;
    let nonc_shared =
        mc_pair_moments(&McModel::SharedNonCointegrated(set.triple), n_paths, sub_seed(seed, index, 3))?;
    let cov = |m: &super::monte_carlo::McMoments| m.covariance.expect("shared model reports covariance");
    Ok(vec![
        row(name, Quantity::CointMean, (formulas.coint_mean)(&set.pair_a)?, coint.mean),
        row(name, Quantity::CointVariance, (formulas.coint_variance)(&set.pair_a)?, coint.variance),
        row(name, Quantity::CointSharedCov, (formulas.coint_shared_cov)(&set.pair_a, &set.pair_b)?, cov(&shared)),
        row(name, Quantity::NoncointMean, (formulas.noncoint_mean)(&set.triple)?, nonc.mean),
        row(name, Quantity::NoncointVariance, (formulas.noncoint_variance)(&set.triple)?, nonc.variance),
        row(name, Quantity::NoncointSharedCov, (formulas.noncoint_shared_cov)(&set.triple)?, cov(&nonc_shared)),
    ])
}

/// The reference set followed by `n_random` sets drawn from `seed`.
pub fn parameter_sets(n_random: usize, seed: u64) -> Vec<(String, ParameterSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = vec![("reference".to_string(), ParameterSet::reference())];
    for i in 0..n_random {
        sets.push((format!("random-{:02}", i + 1), ParameterSet::random(&mut rng)));
    }
    sets
}

/// Run the whole table. Deterministic in `seed`.
pub fn validate_theorems(
    n_random: usize,
    n_paths: usize,
    seed: u64,
    formulas: &Formulas,
) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    for (i, (name, set)) in parameter_sets(n_random, seed).iter().enumerate() {
        rows.extend(validate_set(name, i, set, formulas, n_paths, seed)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rows_pass() {
        let rows = validate_theorems(0, 400_000, 5, &Formulas::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn corrupted_formula_is_caught() {
        let bad = Formulas { coint_variance: |p| Ok(1.1 * cointegrated_pair_variance(p)?), ..Formulas::default() };
        let rows = validate_theorems(0, 400_000, 5, &bad).unwrap();
        for r in &rows {
            assert_eq!(r.pass, r.quantity != Quantity::CointVariance, "{r:?}");
        }
    }

    #[test]
    fn deterministic() {
        let a = validate_theorems(2, 20_000, 9, &Formulas::default()).unwrap();
        let b = validate_theorems(2, 20_000, 9, &Formulas::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 18);
    }

    #[test]
    fn random_sets_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = ParameterSet::random(&mut rng);
            s.pair_a.validate().unwrap();
            s.pair_b.validate().unwrap();
            s.triple.validate().unwrap();
        }
    }
}
