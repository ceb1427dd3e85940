//! Closed-form identities: Jacobi's derivative formula in genus one, and the
//! genus-two relations between `eta`, the Wronskian of the curve `Theta`, the
//! quadratic form `F`, and the even theta constants.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::characteristic::ThetaCharacteristic;
use crate::divisor::{argmax_norm, half_period, DivisorSample};
use crate::error::{Result, ThetaError};
use crate::eta::{eta_from_jet, eta_scale};
use crate::lattice::{growth_factor, theta, theta_eval, theta_gradient, theta_jet, ThetaJet};
use crate::siegel::SiegelMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn require_dim(tau: &SiegelMatrix, n: usize) -> Result<()> {
    if tau.dim() == n {
        Ok(())
    } else {
        Err(ThetaError::DimensionMismatch {
            expected: n,
            found: tau.dim(),
        })
    }
}

/// Both sides of `e^(pi i tau/4) theta'((1+tau)/2) = pi i theta[0;0] theta[0;1/2] theta[1/2;0]`
/// (constants at `z = 0`), as `(lhs, rhs)`.
pub fn jacobi_derivative_sides(tau: &SiegelMatrix, epsilon: f64) -> Result<(Complex64, Complex64)> {
    require_dim(tau, 1)?;
    let t = tau.get(0, 0);
    let (_, grad) = theta_gradient(&[(1.0 + t) / 2.0], tau, epsilon)?;
    let lhs = (I * PI * t / 4.0).exp() * grad[0];
    let zero = [Complex64::new(0.0, 0.0)];
    let nullwert = |a: f64, b: f64| -> Result<Complex64> {
        theta_eval(&zero, tau, &ThetaCharacteristic::new(&[a], &[b])?, epsilon)
    };
    let rhs = I * PI * nullwert(0.0, 0.0)? * nullwert(0.0, 0.5)? * nullwert(0.5, 0.0)?;
    Ok((lhs, rhs))
}

/// `|lhs - rhs| / (1 + |rhs|)` for Jacobi's derivative formula.
pub fn jacobi_derivative_residual(tau: &SiegelMatrix, epsilon: f64) -> Result<f64> {
    let (lhs, rhs) = jacobi_derivative_sides(tau, epsilon)?;
    Ok((lhs - rhs).norm() / (1.0 + rhs.norm()))
}

/// `theta[e](0, tau)` for every even characteristic `e`, in [`ThetaCharacteristic::even`] order.
pub fn even_nullwerte(tau: &SiegelMatrix, epsilon: f64) -> Result<Vec<Complex64>> {
    let zero = vec![Complex64::new(0.0, 0.0); tau.dim()];
    ThetaCharacteristic::even(tau.dim())
        .iter()
        .map(|ch| theta_eval(&zero, tau, ch, epsilon))
        .collect()
}

/// Relative size below which an even theta constant counts as zero.
pub const DECOMPOSABLE_THRESHOLD: f64 = 1e-8;

/// A genus-two `tau` is decomposable iff some even theta constant vanishes.
pub fn is_decomposable(tau: &SiegelMatrix, epsilon: f64) -> Result<bool> {
    require_dim(tau, 2)?;
    let values: Vec<f64> = even_nullwerte(tau, epsilon)?
        .iter()
        .map(|x| x.norm())
        .collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min < DECOMPOSABLE_THRESHOLD * max)
}

/// `prod_e theta[e](0, tau)^2` over the ten even characteristics.
pub fn even_nullwerte_product(tau: &SiegelMatrix, epsilon: f64) -> Result<Complex64> {
    require_dim(tau, 2)?;
    Ok(even_nullwerte(tau, epsilon)?
        .iter()
        .map(|x| x * x)
        .product())
}

/// A scalar attached to a local chart of the genus-two curve `Theta`.
///
/// `chart` is the index `j` of the gradient component in the denominator; the
/// local coordinate on the curve is the other coordinate `z_i`.
#[derive(Clone, Debug, Serialize)]
pub struct ChartValue {
    pub chart: usize,
    pub value: Complex64,
    pub at: DivisorSample,
}

/// `|theta_j|` must exceed this multiple of the jet scale for chart `j` to be usable.
pub const CHART_THRESHOLD: f64 = 1e-6;

fn chart_jet(sample: &DivisorSample, tau: &SiegelMatrix, epsilon: f64) -> Result<ThetaJet> {
    require_dim(tau, 2)?;
    if sample.dim() != 2 {
        return Err(ThetaError::DimensionMismatch {
            expected: 2,
            found: sample.dim(),
        });
    }
    theta_jet(&sample.z, tau, epsilon)
}

fn check_chart(jet: &ThetaJet, j: usize) -> Result<()> {
    if j > 1 {
        return Err(ThetaError::Precondition(format!(
            "chart index {j} out of range"
        )));
    }
    if jet.gradient[j].norm() <= CHART_THRESHOLD * jet.scale() {
        return Err(ThetaError::ChartFailure);
    }
    Ok(())
}

fn sign(j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wronskian of `(dz_1, dz_2)` on the curve: `-eta / theta_2^3` in the
/// coordinate `z_1` and `eta / theta_1^3` in `z_2`, using the chart with the
/// larger gradient component.
pub fn wronskian_value(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    epsilon: f64,
) -> Result<ChartValue> {
    let jet = chart_jet(sample, tau, epsilon)?;
    wronskian_from_jet(sample, &jet, argmax_norm(&jet.gradient))
}

/// [`wronskian_value`] in the chart with denominator index `j`.
pub fn wronskian_value_in_chart(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    j: usize,
    epsilon: f64,
) -> Result<ChartValue> {
    let jet = chart_jet(sample, tau, epsilon)?;
    wronskian_from_jet(sample, &jet, j)
}

fn wronskian_from_jet(sample: &DivisorSample, jet: &ThetaJet, j: usize) -> Result<ChartValue> {
    check_chart(jet, j)?;
    let denominator = jet.gradient[j] * sign(j);
    Ok(ChartValue {
        chart: j,
        value: eta_from_jet(jet) / (denominator * denominator * denominator),
        at: sample.clone(),
    })
}

/// Largest radius, and node count, of the contour used by
/// [`curve_second_derivative`].
pub const CONTOUR_RADIUS: f64 = 0.05;
pub const CONTOUR_NODES: usize = 16;
/// Contour radius as a fraction of the estimated distance to the nearest
/// branch point of the chart.
pub const CONTOUR_FRACTION: f64 = 0.2;

/// `z_j''(z_i)` for the curve `theta(z) = 0` written as a graph over `z_i`,
/// from a Cauchy integral over points of the curve itself.
///
/// Only theta values and first derivatives are used: each node solves
/// `theta(z_i + r e^(i phi), z_j) = 0` for `z_j` by Newton's method. The
/// radius is halved until successive contours stop getting closer.
pub fn curve_second_derivative(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    j: usize,
    epsilon: f64,
) -> Result<Complex64> {
    let jet = chart_jet(sample, tau, epsilon)?;
    check_chart(&jet, j)?;
    let i = 1 - j;
    let slope = -jet.gradient[i] / jet.gradient[j];
    // z_j stops being a graph over z_i where theta_j vanishes on the curve.
    let h = &jet.hessian;
    let drift = (h[(j, i)] + h[(j, j)] * slope).norm();
    let mut radius = CONTOUR_RADIUS.min(CONTOUR_FRACTION * jet.gradient[j].norm() / drift);
    // Aliasing shrinks by 2^16 per halving while rounding grows by 4, so keep
    // the larger contour of the closest successive pair. A contour whose
    // Newton solves fail just reaches too far.
    let mut best = None;
    let mut best_gap = f64::INFINITY;
    let mut previous = contour(sample, tau, j, slope, radius, epsilon).ok();
    for _ in 0..CONTOUR_HALVINGS {
        radius /= 2.0;
        let next = contour(sample, tau, j, slope, radius, epsilon).ok();
        if let (Some(a), Some(b)) = (previous, next) {
            let gap = (b - a).norm();
            if gap < best_gap {
                best = Some(a);
                best_gap = gap;
                if gap <= CONTOUR_AGREEMENT * (1.0 + b.norm()) {
                    break;
                }
            } else if best_gap <= CONTOUR_SETTLED * (1.0 + b.norm()) {
                break;
            }
        }
        previous = next;
    }
    best.ok_or(ThetaError::ProjectionFailed)
}

/// Halvings tried by [`curve_second_derivative`].
const CONTOUR_HALVINGS: usize = 8;
const CONTOUR_AGREEMENT: f64 = 1e-13;
/// Once a pair agrees this well, a growing gap means rounding has taken over.
const CONTOUR_SETTLED: f64 = 1e-8;

fn contour(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    j: usize,
    slope: Complex64,
    radius: f64,
    epsilon: f64,
) -> Result<Complex64> {
    let i = 1 - j;
    let tolerance = 1e-15 * growth_factor(&sample.z, tau).max(1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..CONTOUR_NODES {
        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / CONTOUR_NODES as f64);
        let ds = radius * e;
        let mut p = sample.z.clone();
        p[i] += ds;
        p[j] += slope * ds;
        let mut converged = false;
        for _ in 0..30 {
            let (value, grad) = theta_gradient(&p, tau, epsilon)?;
            if value.norm() <= tolerance {
                converged = true;
                break;
            }
            let step = value / grad[j];
            p[j] -= step;
            if step.norm() <= 1e-16 * (1.0 + p[j].norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(ThetaError::ProjectionFailed);
        }
        acc += (p[j] - sample.z[j]) / (ds * ds);
    }
    Ok(acc * (2.0 / CONTOUR_NODES as f64))
}

/// The Wronskian computed from the curve alone, `det((dz_k/ds, d^2 z_k/ds^2))`
/// in the local coordinate `s = z_i`.
pub fn wronskian_from_curve(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    j: usize,
    epsilon: f64,
) -> Result<ChartValue> {
    let second = curve_second_derivative(sample, tau, j, epsilon)?;
    Ok(ChartValue {
        chart: j,
        value: second * sign(1 - j),
        at: sample.clone(),
    })
}

/// The quadratic form `F` on a chart, computed two ways, with the second
/// derivative term `Q` of the curve.
#[derive(Clone, Debug, Serialize)]
pub struct FValue {
    pub chart: usize,
    /// `P = t^t (theta_kl) t` with `t_i = 1`, `t_j = -theta_i / theta_j`.
    pub p: Complex64,
    /// `eta / theta_j^2`.
    pub eta_form: Complex64,
    /// `Q = theta_j z_j''`, from the contour integral.
    pub q: Complex64,
    /// `|P - eta / theta_j^2| / (1 + max)`.
    pub f_residual: f64,
    /// `|P + Q| / (1 + |P|)`.
    pub pq_residual: f64,
    /// `|grad . t| / |grad|`: the first-order term `f_{m,1} / m` along the tangent.
    pub first_order: f64,
    pub at: DivisorSample,
}

impl FValue {
    pub fn chart_value(&self) -> ChartValue {
        ChartValue {
            chart: self.chart,
            value: self.p,
            at: self.at.clone(),
        }
    }
}

/// [`f_value_in_chart`] in the chart with the larger gradient component.
pub fn f_value(sample: &DivisorSample, tau: &SiegelMatrix, epsilon: f64) -> Result<FValue> {
    let jet = chart_jet(sample, tau, epsilon)?;
    f_value_in_chart(sample, tau, argmax_norm(&jet.gradient), epsilon)
}

pub fn f_value_in_chart(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    j: usize,
    epsilon: f64,
) -> Result<FValue> {
    let jet = chart_jet(sample, tau, epsilon)?;
    check_chart(&jet, j)?;
    let i = 1 - j;
    let g = &jet.gradient;
    let h = &jet.hessian;
    let mut t = [Complex64::new(0.0, 0.0); 2];
    t[i] = Complex64::new(1.0, 0.0);
    t[j] = -g[i] / g[j];
    let p = h[(i, i)] * t[i] * t[i] + 2.0 * h[(i, j)] * t[i] * t[j] + h[(j, j)] * t[j] * t[j];
    let eta_form = eta_from_jet(&jet) / (g[j] * g[j]);
    let q = g[j] * curve_second_derivative(sample, tau, j, epsilon)?;
    let first: Complex64 = g[0] * t[0] + g[1] * t[1];
    Ok(FValue {
        chart: j,
        p,
        eta_form,
        q,
        f_residual: (p - eta_form).norm() / (1.0 + p.norm().max(eta_form.norm())),
        pq_residual: (p + q).norm() / (1.0 + p.norm()),
        first_order: first.norm() / jet.gradient_norm(),
        at: sample.clone(),
    })
}

/// `|omega^2 eta - F^3| / (1 + |F^3|)` in chart `j`, with `omega` taken from
/// the curve and `F = P`.
pub fn wronskian_identity_residual_in_chart(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    j: usize,
    epsilon: f64,
) -> Result<f64> {
    let jet = chart_jet(sample, tau, epsilon)?;
    let omega = wronskian_from_curve(sample, tau, j, epsilon)?.value;
    let f = f_value_in_chart(sample, tau, j, epsilon)?.p;
    let eta = eta_from_jet(&jet);
    let f3 = f * f * f;
    Ok((omega * omega * eta - f3).norm() / (1.0 + f3.norm()))
}

/// [`wronskian_identity_residual_in_chart`] in the chart with the larger gradient component.
pub fn wronskian_identity_residual(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    epsilon: f64,
) -> Result<f64> {
    let jet = chart_jet(sample, tau, epsilon)?;
    wronskian_identity_residual_in_chart(sample, tau, argmax_norm(&jet.gradient), epsilon)
}

/// An odd half-period with the sizes of `theta` and `eta` there.
#[derive(Clone, Debug, Serialize)]
pub struct WeierstrassPoint {
    pub characteristic: String,
    pub z: Vec<Complex64>,
    pub theta_abs: f64,
    pub eta_abs: f64,
    pub eta_scale: f64,
}

/// The six odd half-periods `tau a + b` of an indecomposable genus-two `tau`.
pub fn weierstrass_points(tau: &SiegelMatrix, epsilon: f64) -> Result<Vec<WeierstrassPoint>> {
    require_dim(tau, 2)?;
    if is_decomposable(tau, epsilon)? {
        return Err(ThetaError::Decomposable);
    }
    ThetaCharacteristic::odd(2)
        .iter()
        .map(|ch| {
            let z = half_period(tau, ch);
            let jet = theta_jet(&z, tau, epsilon)?;
            Ok(WeierstrassPoint {
                characteristic: ch.to_string(),
                theta_abs: jet.value.norm(),
                eta_abs: eta_from_jet(&jet).norm(),
                eta_scale: eta_scale(&jet),
                z,
            })
        })
        .collect()
}

/// `eta^3 / (pi^12 prod_e theta[e](0)^2 theta(3z))` and its distance to `+-1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProductFormula {
    pub ratio: Complex64,
    pub sign: i8,
    pub residual: f64,
}

/// Samples with `|theta(3z)|` or `|eta(z)|` below this multiple of their scale are rejected.
pub const PRODUCT_REJECTION: f64 = 1e-8;

pub fn genus2_product_formula(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    epsilon: f64,
) -> Result<ProductFormula> {
    let nullwerte = even_nullwerte_product(tau, epsilon)?;
    genus2_product_formula_with(sample, tau, nullwerte, epsilon)
}

/// [`genus2_product_formula`] with a precomputed [`even_nullwerte_product`].
pub fn genus2_product_formula_with(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    nullwerte: Complex64,
    epsilon: f64,
) -> Result<ProductFormula> {
    let jet = chart_jet(sample, tau, epsilon)?;
    let eta = eta_from_jet(&jet);
    if eta.norm() < PRODUCT_REJECTION * eta_scale(&jet) {
        return Err(ThetaError::SampleRejected(format!(
            "|eta| = {:e} at a Weierstrass point",
            eta.norm()
        )));
    }
    let triple: Vec<Complex64> = sample.z.iter().map(|x| 3.0 * x).collect();
    let theta3 = theta(&triple, tau, epsilon)?;
    if theta3.norm() < PRODUCT_REJECTION * growth_factor(&triple, tau) {
        return Err(ThetaError::SampleRejected(format!(
            "|theta(3z)| = {:e} is too small",
            theta3.norm()
        )));
    }
    let ratio = eta * eta * eta / (PI.powi(12) * nullwerte * theta3);
    let sign: i8 = if ratio.re >= 0.0 { 1 } else { -1 };
    Ok(ProductFormula {
        ratio,
        sign,
        residual: (ratio - f64::from(sign)).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::c64;

    #[test]
    fn jacobi_at_i() {
        let tau = SiegelMatrix::scalar(c64(0.0, 1.0)).unwrap();
        assert!(jacobi_derivative_residual(&tau, 1e-12).unwrap() < 1e-10);
    }

    #[test]
    fn block_tau_is_decomposable() {
        let a = SiegelMatrix::scalar(c64(0.1, 1.2)).unwrap();
        let b = SiegelMatrix::scalar(c64(-0.2, 0.9)).unwrap();
        let block = a.block_diagonal(&b).unwrap();
        assert!(is_decomposable(&block, 1e-12).unwrap());
        assert_eq!(
            weierstrass_points(&block, 1e-12).unwrap_err(),
            ThetaError::Decomposable
        );
    }

    #[test]
    fn sign_convention() {
        assert_eq!(sign(0), 1.0);
        assert_eq!(sign(1), -1.0);
    }

    #[test]
    fn requires_genus_two() {
        let tau = SiegelMatrix::scalar(c64(0.0, 1.0)).unwrap();
        assert!(even_nullwerte_product(&tau, 1e-12).is_err());
        assert!(is_decomposable(&tau, 1e-12).is_err());
    }
}
