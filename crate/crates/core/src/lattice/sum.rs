use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::enumerate::ellipsoid_points;
use super::truncation::{truncation_for_point, TruncationSpec, MAX_DERIVATIVE_ORDER};
use crate::characteristic::ThetaCharacteristic;
use crate::error::{Result, ThetaError};
use crate::exec::{map_indexed, Parallelism};
use crate::siegel::SiegelMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A theta value with its certified error bound.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaEvaluation {
    pub value: Complex64,
    /// Absolute error bound: tail bound times the growth factor.
    pub error_bound: f64,
    pub terms_summed: usize,
    pub truncation: TruncationSpec,
}

/// Value, gradient and hessian in `z` from one differentiated lattice sum.
#[derive(Clone, Debug)]
pub struct ThetaJet {
    pub value: Complex64,
    pub gradient: Vec<Complex64>,
    /// Symmetric by construction: each unordered pair is accumulated once.
    pub hessian: DMatrix<Complex64>,
    pub error_bound: f64,
    /// `exp(pi y^t (Im tau)^-1 y)`.
    pub growth: f64,
    pub terms_summed: usize,
}

impl ThetaJet {
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn gradient_norm(&self) -> f64 {
        self.gradient
            .iter()
            .map(|g| g.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `1 + max(|theta|, max |theta_i|, max |theta_ij|)`.
    pub fn scale(&self) -> f64 {
        let g = self.gradient.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let h = self.hessian.iter().map(|x| x.norm()).fold(0.0, f64::max);
        1.0 + self.value.norm().max(g).max(h)
    }
}

/// How much of the jet a sum accumulates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Depth {
    Value = 0,
    Gradient = 1,
    Hessian = 2,
}

struct Prepared {
    spec: TruncationSpec,
    points: Vec<i64>,
    a: Vec<f64>,
    /// `z + b`
    shifted_z: Vec<Complex64>,
    growth: f64,
}

fn prepare(
    z: &[Complex64],
    tau: &SiegelMatrix,
    ch: &ThetaCharacteristic,
    epsilon: f64,
    deriv_order: usize,
    weight_scale: f64,
) -> Result<Prepared> {
    let n = tau.dim();
    if z.len() != n {
        return Err(ThetaError::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    if ch.dim() != n {
        return Err(ThetaError::DimensionMismatch {
            expected: n,
            found: ch.dim(),
        });
    }
    if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return Err(ThetaError::NonFinite);
    }
    let a = ch.a();
    let b = ch.b();
    let im_z: Vec<f64> = z.iter().map(|w| w.im).collect();
    let spec = truncation_for_point(tau, &im_z, &a, epsilon, deriv_order, weight_scale)?;
    let points = ellipsoid_points(tau.im_factor(), &spec.center, spec.radius);
    let growth = tau.growth_exponent(z).exp();
    let shifted_z = z.iter().zip(&b).map(|(w, bi)| w + bi).collect();
    Ok(Prepared {
        spec,
        points,
        a,
        shifted_z,
        growth,
    })
}

/// Exponent `pi i k^t tau k + 2 pi i k^t (z + b)` of one term, `k = m + a`.
#[inline]
fn term(tau: &SiegelMatrix, k: &[f64], shifted_z: &[Complex64]) -> Complex64 {
    let n = k.len();
    let mut quad = Complex64::new(0.0, 0.0);
    let mut lin = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = tau.get(i, i) * k[i];
        for j in i + 1..n {
            row += tau.get(i, j) * (2.0 * k[j]);
        }
        quad += row * k[i];
        lin += shifted_z[i] * k[i];
    }
    (I * PI * quad + I * (2.0 * PI) * lin).exp()
}

struct Accumulated {
    value: Complex64,
    gradient: Vec<Complex64>,
    hessian: DMatrix<Complex64>,
    terms: usize,
}

fn accumulate(tau: &SiegelMatrix, prep: &Prepared, depth: Depth) -> Accumulated {
    let n = tau.dim();
    let mut value = Complex64::new(0.0, 0.0);
    // Sums of k_i e and k_i k_j e; derivative constants are applied once at the end.
    let mut first = vec![Complex64::new(0.0, 0.0); n];
    let mut second = vec![Complex64::new(0.0, 0.0); n * (n + 1) / 2];
    let mut k = vec![0.0; n];
    let mut terms = 0;
    for m in prep.points.chunks(n) {
        for i in 0..n {
            k[i] = m[i] as f64 + prep.a[i];
        }
        let e = term(tau, &k, &prep.shifted_z);
        value += e;
        if depth >= Depth::Gradient {
            for i in 0..n {
                first[i] += e * k[i];
            }
        }
        if depth >= Depth::Hessian {
            let mut idx = 0;
            for i in 0..n {
                let ek = e * k[i];
                for j in i..n {
                    second[idx] += ek * k[j];
                    idx += 1;
                }
            }
        }
        terms += 1;
    }
    let two_pi_i = I * (2.0 * PI);
    let gradient = first.iter().map(|s| s * two_pi_i).collect();
    let mut hessian = DMatrix::zeros(n, n);
    if depth >= Depth::Hessian {
        let c = two_pi_i * two_pi_i;
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                let h = second[idx] * c;
                hessian[(i, j)] = h;
                hessian[(j, i)] = h;
                idx += 1;
            }
        }
    }
    Accumulated {
        value,
        gradient,
        hessian,
        terms,
    }
}

/// `exp(pi y^t (Im tau)^-1 y)`, the unavoidable size of theta at `z`.
pub fn growth_factor(z: &[Complex64], tau: &SiegelMatrix) -> f64 {
    tau.growth_exponent(z).exp()
}

/// `theta[a;b](z, tau)` with its error bound and term count.
pub fn theta_eval_detailed(
    z: &[Complex64],
    tau: &SiegelMatrix,
    ch: &ThetaCharacteristic,
    epsilon: f64,
) -> Result<ThetaEvaluation> {
    let prep = prepare(z, tau, ch, epsilon, 0, 1.0)?;
    let acc = accumulate(tau, &prep, Depth::Value);
    Ok(ThetaEvaluation {
        value: acc.value,
        error_bound: prep.spec.tail_bound * prep.growth,
        terms_summed: acc.terms,
        truncation: prep.spec,
    })
}

/// `theta[a;b](z, tau)`; absolute error at most `epsilon * growth_factor(z, tau)`.
pub fn theta_eval(
    z: &[Complex64],
    tau: &SiegelMatrix,
    ch: &ThetaCharacteristic,
    epsilon: f64,
) -> Result<Complex64> {
    Ok(theta_eval_detailed(z, tau, ch, epsilon)?.value)
}

/// Riemann theta function `theta(z, tau)`.
pub fn theta(z: &[Complex64], tau: &SiegelMatrix, epsilon: f64) -> Result<Complex64> {
    theta_eval(z, tau, &ThetaCharacteristic::zero(tau.dim()), epsilon)
}

/// Evaluates theta at many points; output order follows `points`.
pub fn theta_eval_batch(
    points: &[Vec<Complex64>],
    tau: &SiegelMatrix,
    ch: &ThetaCharacteristic,
    epsilon: f64,
    parallelism: Parallelism,
) -> Result<Vec<Complex64>> {
    map_indexed(parallelism, points.len(), |i| {
        theta_eval(&points[i], tau, ch, epsilon)
    })
    .into_iter()
    .collect()
}

/// Value and gradient of the Riemann theta function.
pub fn theta_gradient(
    z: &[Complex64],
    tau: &SiegelMatrix,
    epsilon: f64,
) -> Result<(Complex64, Vec<Complex64>)> {
    let prep = prepare(
        z,
        tau,
        &ThetaCharacteristic::zero(tau.dim()),
        epsilon,
        1,
        1.0,
    )?;
    let acc = accumulate(tau, &prep, Depth::Gradient);
    Ok((acc.value, acc.gradient))
}

/// Jet of the Riemann theta function.
pub fn theta_jet(z: &[Complex64], tau: &SiegelMatrix, epsilon: f64) -> Result<ThetaJet> {
    theta_jet_char(z, tau, &ThetaCharacteristic::zero(tau.dim()), epsilon)
}

/// Jet of `theta[a;b]`. Every entry has absolute error at most `epsilon` times the growth factor.
pub fn theta_jet_char(
    z: &[Complex64],
    tau: &SiegelMatrix,
    ch: &ThetaCharacteristic,
    epsilon: f64,
) -> Result<ThetaJet> {
    let prep = prepare(z, tau, ch, epsilon, 2, 1.0)?;
    let acc = accumulate(tau, &prep, Depth::Hessian);
    Ok(ThetaJet {
        value: acc.value,
        gradient: acc.gradient,
        hessian: acc.hessian,
        error_bound: prep.spec.tail_bound * prep.growth,
        growth: prep.growth,
        terms_summed: acc.terms,
    })
}

/// `order`-th derivative of `t -> theta(z + t v)` at `t = 0`.
///
/// The absolute error is at most `epsilon` times the growth factor at `z`.
pub fn directional_derivative(
    z: &[Complex64],
    tau: &SiegelMatrix,
    v: &[Complex64],
    order: usize,
    epsilon: f64,
) -> Result<Complex64> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(ThetaError::DerivativeOrder(order));
    }
    if v.len() != tau.dim() {
        return Err(ThetaError::DimensionMismatch {
            expected: tau.dim(),
            found: v.len(),
        });
    }
    let v_norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let ch = ThetaCharacteristic::zero(tau.dim());
    let prep = prepare(z, tau, &ch, epsilon, order, v_norm.max(1e-300))?;
    let n = tau.dim();
    let two_pi_i = I * (2.0 * PI);
    let mut total = Complex64::new(0.0, 0.0);
    let mut k = vec![0.0; n];
    for m in prep.points.chunks(n) {
        for i in 0..n {
            k[i] = m[i] as f64 + prep.a[i];
        }
        let e = term(tau, &k, &prep.shifted_z);
        let kv: Complex64 = k.iter().zip(v).map(|(ki, vi)| vi * *ki).sum();
        total += e * (two_pi_i * kv).powu(order as u32);
    }
    Ok(total)
}
