//! Riemann theta functions in several variables, the divisor-valued function
//! `eta = grad^t (hess)^c grad`, and numerical checks of the identities it satisfies.
//!
//! ```
//! use num_complex::c64;
//! use theta_eta::{theta, SiegelMatrix};
//!
//! let tau = SiegelMatrix::scalar(c64(0.0, 1.0)).unwrap();
//! let value = theta(&[c64(0.0, 0.0)], &tau, 1e-12).unwrap();
//! assert!((value.re - 1.086434811213308).abs() < 1e-12);
//! ```

// `!(x < limit)` is deliberate: NaN must fail range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod characteristic;
pub mod divisor;
pub mod error;
pub mod eta;
pub mod exec;
pub mod fixtures;
pub mod identities;
pub mod lattice;
pub mod modular;
pub mod sampling;
pub mod siegel;
pub mod verify;

pub use characteristic::{Parity, ThetaCharacteristic};
pub use divisor::{
    divisor_solve, divisor_solve_with, gauss_map, gauss_ramification_residual, half_period,
    project_to_divisor, sample_divisor, DivisorOptions, DivisorSample, RamificationResidual,
};
pub use error::{Result, ThetaError};
pub use eta::{
    cofactor, decomposable_tau, determinant, eta_form, eta_form_pair, eta_point,
    eta_recursion_residual, ComplexMatrix, EtaValue,
};
pub use exec::Parallelism;
pub use fixtures::Fixtures;
pub use identities::{
    even_nullwerte_product, f_value, genus2_product_formula, is_decomposable,
    jacobi_derivative_residual, weierstrass_points, wronskian_identity_residual, wronskian_value,
    ChartValue, FValue, ProductFormula, WeierstrassPoint,
};
pub use lattice::{
    directional_derivative, growth_factor, theta, theta_eval, theta_eval_batch,
    theta_eval_detailed, theta_gradient, theta_jet, theta_jet_char, truncation_radius,
    ThetaEvaluation, ThetaJet, TruncationSpec,
};
pub use modular::{
    automorphy_q, gamma12_member, period_factor, symplectic_act, verify_eta_modular,
    verify_theta_modular, AutomorphyReport, RejectionThresholds, SymplecticInteger,
};
pub use siegel::{SiegelMatrix, MAX_DIMENSION};
pub use verify::{run_suite, CheckReport, Failure, Suite, SuiteConfig, SuiteReport};
