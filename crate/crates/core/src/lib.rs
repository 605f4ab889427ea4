//! Multivariate binary logistic regression in a reduced Euclidean space.
//!
//! Subjects are placed at `u_i = x_iᵀB`; each binary response contributes two
//! category points, and a subject's probability of each category is governed
//! by its distances to those points. Parameters are estimated by an MM
//! algorithm that majorizes the deviance with a least-squares function and
//! solves each step with a generalized SVD.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biplot;
pub mod cli;
pub mod data;
pub mod document;
pub mod error;
pub mod model;
pub mod oracles;
pub mod selection;
pub mod solver;
pub mod validate;

pub use error::{MelodicError, Result};
pub use model::{
    category_coordinates, class_probabilities, count_representable_profiles, decompose_category_coordinates,
    deviance, half_sq_distance, implied_coefficients, log_odds, predict, subject_scores, Dataset,
    DatasetMeta, DimensionAssignment, ImpliedCoefficients, ModelParams, Prediction, Preprocessing,
};
pub use solver::{fit, fit_constrained, fit_unconstrained, FitConfig, FitResult, LocationRule};
