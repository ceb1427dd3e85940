//! Truncated lattice sums for `theta[a;b](z, tau)` and its derivatives.

pub(crate) mod enumerate;
mod sum;
pub mod truncation;

pub use sum::{
    directional_derivative, growth_factor, theta, theta_eval, theta_eval_batch,
    theta_eval_detailed, theta_gradient, theta_jet, theta_jet_char, ThetaEvaluation, ThetaJet,
};
pub use truncation::{
    truncation_for_point, truncation_radius, TailModel, TruncationSpec, MAX_DERIVATIVE_ORDER,
    MAX_EPSILON, MIN_EPSILON,
};
