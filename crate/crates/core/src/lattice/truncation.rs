//! Truncation radii for the lattice sums.
//!
//! After factoring out the growth factor `exp(pi y^t Y^-1 y)`, the terms of the
//! (possibly differentiated) theta series at lattice points `m` are bounded by
//! `W(|w|) exp(-pi |U w|^2)` with `w = m - c`, `c` the real center of the
//! Gaussian and `W` the polynomial derivative weight. With `rho` the shortest
//! vector of `U Z^n`, the balls of radius `rho/2` around the points `U w` are
//! disjoint, which gives
//!
//! ```text
//! sum_{|U w| > R} g(|U w|) <= n (2/rho)^n  int_{R - rho}^inf g(t) (t + rho/2)^(n-1) dt
//! ```
//!
//! for `g` decreasing on `[R - rho, inf)`. The integral is evaluated in closed
//! form with upper incomplete gamma functions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ui};
use std::f64::consts::PI;

use crate::error::{Result, ThetaError};
use crate::siegel::SiegelMatrix;

/// Smallest accepted target error.
pub const MIN_EPSILON: f64 = 1e-13;
/// Largest accepted target error.
pub const MAX_EPSILON: f64 = 0.5;
/// Highest derivative order a truncation radius can be requested for.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

/// Where and how far a lattice sum is taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub epsilon: f64,
    /// Radius `R` of the ellipsoid `|U (m - center)| <= R`.
    pub radius: f64,
    /// Integer vector nearest to `center`.
    pub shift: Vec<i64>,
    /// Real center of the Gaussian, `-(Im tau)^-1 Im z - a`.
    pub center: Vec<f64>,
    pub deriv_order: usize,
    /// Certified bound on the omitted tail, relative to the growth factor. Never exceeds `epsilon`.
    pub tail_bound: f64,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(MIN_EPSILON..=MAX_EPSILON).contains(&epsilon) {
        return Err(ThetaError::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

/// Parameters of the tail inequality for one lattice.
#[derive(Clone, Copy, Debug)]
pub struct TailModel {
    pub dim: usize,
    /// Shortest vector length of `U Z^n`.
    pub shortest: f64,
    /// `|U^-1|_2 = 1 / sqrt(lambda_min(Y))`.
    pub inverse_norm: f64,
    pub deriv_order: usize,
    /// `|Y^-1 y|`: distance between the Gaussian center and the origin of the monomials.
    pub offset: f64,
    /// Extra factor on the monomial weight (e.g. the length of a direction vector).
    pub weight_scale: f64,
}

impl TailModel {
    pub fn new(tau: &SiegelMatrix, deriv_order: usize, offset: f64, weight_scale: f64) -> Self {
        Self {
            dim: tau.dim(),
            shortest: tau.shortest_vector(),
            inverse_norm: 1.0 / tau.min_eigenvalue().sqrt(),
            deriv_order,
            offset,
            weight_scale,
        }
    }

    /// The weight is `(1 + alpha (mu t + sigma))^d` with `alpha = 2 pi * weight_scale`.
    fn alpha(&self) -> f64 {
        2.0 * PI * self.weight_scale
    }

    /// Smallest radius for which the ball-packing argument applies.
    pub fn min_radius(&self) -> f64 {
        // g(t) = (1 + alpha (mu t + sigma))^d exp(-pi t^2) decreases once 2 pi t >= d alpha mu.
        self.shortest + self.deriv_order as f64 * self.alpha() * self.inverse_norm / (2.0 * PI)
    }

    /// Upper bound on the weighted tail outside radius `radius`.
    pub fn bound(&self, radius: f64) -> f64 {
        let rho = self.shortest;
        let lower = (radius - rho).max(0.0);
        let alpha = self.alpha();
        let a0 = 1.0 + alpha * self.offset;
        let a1 = alpha * self.inverse_norm;
        // Coefficients of (a0 + a1 t)^d (t + rho/2)^(n-1), all nonnegative.
        let left = binomial_expand(a0, a1, self.deriv_order);
        let right = binomial_expand(rho / 2.0, 1.0, self.dim - 1);
        let mut poly = vec![0.0; left.len() + right.len() - 1];
        for (i, l) in left.iter().enumerate() {
            for (j, r) in right.iter().enumerate() {
                poly[i + j] += l * r;
            }
        }
        let x = PI * lower * lower;
        let integral: f64 = poly
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let a = (j as f64 + 1.0) / 2.0;
                let upper = if x > 0.0 { gamma_ui(a, x) } else { gamma(a) };
                c * 0.5 * PI.powf(-a) * upper
            })
            .sum();
        self.dim as f64 * (2.0 / rho).powi(self.dim as i32) * integral
    }

    /// Smallest radius (to ~1e-10) whose tail bound is at most `epsilon`.
    pub fn solve(&self, epsilon: f64) -> (f64, f64) {
        let floor = self.min_radius();
        let mut hi = floor.max(1.0);
        while self.bound(hi) > epsilon {
            hi *= 1.5;
        }
        let mut lo = floor;
        if self.bound(lo) <= epsilon {
            return (lo, self.bound(lo));
        }
        while hi - lo > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if self.bound(mid) <= epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi, self.bound(hi))
    }
}

/// Coefficients of `(a + b t)^d` in increasing powers of `t`.
fn binomial_expand(a: f64, b: f64, d: usize) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for _ in 0..d {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] += a * c;
            next[k + 1] += b * c;
        }
        coeffs = next;
    }
    coeffs
}

/// Radius for sums centred at a lattice point (`Im z = 0`, zero characteristic).
///
/// Sums at other points use the same inequality with the distance between the
/// Gaussian center and the monomial origin folded into the weight; see
/// [`truncation_for_point`].
pub fn truncation_radius(
    tau: &SiegelMatrix,
    epsilon: f64,
    deriv_order: usize,
) -> Result<TruncationSpec> {
    check_epsilon(epsilon)?;
    if deriv_order > MAX_DERIVATIVE_ORDER {
        return Err(ThetaError::DerivativeOrder(deriv_order));
    }
    let (radius, tail_bound) = TailModel::new(tau, deriv_order, 0.0, 1.0).solve(epsilon);
    Ok(TruncationSpec {
        epsilon,
        radius,
        shift: vec![0; tau.dim()],
        center: vec![0.0; tau.dim()],
        deriv_order,
        tail_bound,
    })
}

/// Truncation for a sum at `z` with characteristic offset `a`.
pub fn truncation_for_point(
    tau: &SiegelMatrix,
    im_z: &[f64],
    char_a: &[f64],
    epsilon: f64,
    deriv_order: usize,
    weight_scale: f64,
) -> Result<TruncationSpec> {
    check_epsilon(epsilon)?;
    if deriv_order > MAX_DERIVATIVE_ORDER {
        return Err(ThetaError::DerivativeOrder(deriv_order));
    }
    let s = tau.solve_imag(im_z);
    let offset = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let center: Vec<f64> = s.iter().zip(char_a).map(|(x, a)| -x - a).collect();
    let shift = center.iter().map(|c| c.round() as i64).collect();
    let (radius, tail_bound) =
        TailModel::new(tau, deriv_order, offset, weight_scale).solve(epsilon);
    Ok(TruncationSpec {
        epsilon,
        radius,
        shift,
        center,
        deriv_order,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::c64;

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial_expand(2.0, 1.0, 3), vec![8.0, 12.0, 6.0, 1.0]);
        assert_eq!(binomial_expand(0.5, 1.0, 0), vec![1.0]);
    }

    #[test]
    fn radius_monotone_in_epsilon_and_order() {
        let tau = SiegelMatrix::from_rows(&[
            vec![c64(0.1, 1.1), c64(0.2, 0.1)],
            vec![c64(0.2, 0.1), c64(-0.1, 0.9)],
        ])
        .unwrap();
        let coarse = truncation_radius(&tau, 1e-6, 0).unwrap();
        let fine = truncation_radius(&tau, 1e-12, 0).unwrap();
        assert!(coarse.radius < fine.radius);
        let d2 = truncation_radius(&tau, 1e-12, 2).unwrap();
        assert!(d2.radius >= fine.radius);
        assert!(fine.tail_bound <= 1e-12);
        assert!(d2.tail_bound <= 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let tau = SiegelMatrix::scalar(c64(0.0, 1.0)).unwrap();
        assert!(matches!(
            truncation_radius(&tau, 0.0, 0),
            Err(ThetaError::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            truncation_radius(&tau, -1e-6, 0),
            Err(ThetaError::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            truncation_radius(&tau, 1e-14, 0),
            Err(ThetaError::EpsilonOutOfRange(_))
        ));
        assert_eq!(
            truncation_radius(&tau, 1e-8, 5).unwrap_err(),
            ThetaError::DerivativeOrder(5)
        );
    }

    #[test]
    fn bound_decreases_with_radius() {
        let tau = SiegelMatrix::imaginary_identity(3, 1.0).unwrap();
        let model = TailModel::new(&tau, 2, 0.7, 1.0);
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let b = model.bound(model.min_radius() + 0.25 * k as f64);
            assert!(b <= last);
            last = b;
        }
    }
}
