//! Return moments of threshold-traded pairs: normal primitives, closed
//! forms, and the Monte Carlo oracle that checks them.

mod closed_form;
mod monte_carlo;
mod normal;
mod orthant;
mod validation;

pub use closed_form::{
    cointegrated_pair_mean, cointegrated_pair_moments, cointegrated_pair_variance, cointegrated_shared_covariance,
    noncoint_pair_moments, noncoint_shared_covariance, BivariateCorrelation, PairModelParams, PairMoments,
    TripleModelParams, DEFAULT_ELAPSED_DAYS,
};
pub use monte_carlo::{mc_pair_moments, Estimate, McModel, McMoments, MIN_PATHS};
pub use normal::{std_normal_cdf, std_normal_interval, std_normal_pdf, std_normal_sf};
pub use orthant::{bivariate_orthant, Quadrant};
pub use validation::{
    parameter_sets, validate_set, validate_theorems, Formulas, ParameterSet, Quantity, ValidationRow, Z_TOLERANCE,
};
