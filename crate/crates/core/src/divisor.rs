//! Points on the theta divisor, tangent frames, and the Gauss map.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::characteristic::ThetaCharacteristic;
use crate::error::{Result, ThetaError};
use crate::eta::{determinant, eta_from_jet, eta_scale};
use crate::exec::{map_indexed, Parallelism};
use crate::lattice::{growth_factor, theta_gradient, theta_jet, ThetaJet};
use crate::sampling::{random_cell_point, random_direction, sample_rng};
use crate::siegel::SiegelMatrix;

/// A smooth point of the theta divisor.
#[derive(Clone, Debug, Serialize)]
pub struct DivisorSample {
    pub z: Vec<Complex64>,
    /// `|theta(z, tau)|`
    pub residual: f64,
    /// `n - 1` unit vectors spanning the kernel of the gradient.
    pub tangent: Vec<Vec<Complex64>>,
    pub gradient: Vec<Complex64>,
    pub gradient_norm: f64,
    /// [`ThetaJet::scale`] at `z`.
    pub jet_scale: f64,
}

impl DivisorSample {
    /// Builds a sample from the jet at `z`, without checking `theta(z) = 0`.
    pub fn from_jet(z: Vec<Complex64>, jet: &ThetaJet) -> Self {
        Self {
            z,
            residual: jet.value.norm(),
            tangent: tangent_basis(&jet.gradient),
            gradient: jet.gradient.clone(),
            gradient_norm: jet.gradient_norm(),
            jet_scale: jet.scale(),
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn is_smooth(&self, threshold: f64) -> bool {
        self.gradient_norm > threshold * self.jet_scale
    }

    /// `|grad . t| / (|grad| |t|)` maximized over the tangent basis.
    pub fn orthogonality_defect(&self) -> f64 {
        self.tangent
            .iter()
            .map(|t| {
                let dot: Complex64 = self.gradient.iter().zip(t).map(|(g, x)| g * x).sum();
                dot.norm() / (self.gradient_norm * vec_norm(t))
            })
            .fold(0.0, f64::max)
    }

    /// Index of the largest gradient component.
    pub fn chart(&self) -> usize {
        argmax_norm(&self.gradient)
    }
}

/// Tuning for [`divisor_solve_with`].
#[derive(Clone, Debug, Serialize)]
pub struct DivisorOptions {
    /// Newton stops once `|theta| <= newton_tolerance` (relative to growth).
    pub newton_tolerance: f64,
    pub max_iterations: usize,
    /// Largest accepted `|theta|` at the returned point.
    pub accept_residual: f64,
    /// Starts form a `grid_size x grid_size` grid on `[-half_width, half_width]^2`.
    pub grid_size: usize,
    pub half_width: f64,
    /// A point is smooth when `|grad| > smooth_threshold * jet scale`.
    pub smooth_threshold: f64,
}

impl Default for DivisorOptions {
    fn default() -> Self {
        Self {
            newton_tolerance: 1e-12,
            max_iterations: 50,
            accept_residual: 1e-10,
            grid_size: 5,
            half_width: 2.0,
            smooth_threshold: 1e-6,
        }
    }
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn argmax_norm(v: &[Complex64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(z: &[Complex64], t: Complex64, v: &[Complex64]) -> Vec<Complex64> {
    z.iter().zip(v).map(|(a, b)| a + t * b).collect()
}

/// Kernel of the covector `g`: `(g_2, -g_1) / |g|` when `n = 2`, otherwise
/// `e_k - (g_k / g_j) e_j` normalized, with `j` the largest component.
pub fn tangent_basis(g: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = g.len();
    if n == 2 {
        let norm = vec_norm(g);
        return vec![vec![g[1] / norm, -g[0] / norm]];
    }
    let j = argmax_norm(g);
    (0..n)
        .filter(|&k| k != j)
        .map(|k| {
            let mut t = vec![Complex64::new(0.0, 0.0); n];
            t[k] = Complex64::new(1.0, 0.0);
            t[j] = -g[k] / g[j];
            let norm = vec_norm(&t);
            t.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

/// `tau a + b`.
pub fn half_period(tau: &SiegelMatrix, ch: &ThetaCharacteristic) -> Vec<Complex64> {
    let (a, b) = (ch.a(), ch.b());
    (0..tau.dim())
        .map(|i| {
            let mut acc = Complex64::new(b[i], 0.0);
            for (j, aj) in a.iter().enumerate() {
                acc += tau.get(i, j) * *aj;
            }
            acc
        })
        .collect()
}

fn grid_starts(opts: &DivisorOptions) -> Vec<Complex64> {
    let k = opts.grid_size.max(1);
    let step = if k > 1 {
        2.0 * opts.half_width / (k - 1) as f64
    } else {
        0.0
    };
    let offset = if k > 1 { -opts.half_width } else { 0.0 };
    let mut starts: Vec<Complex64> = (0..k)
        .flat_map(|i| {
            (0..k).map(move |j| Complex64::new(offset + step * i as f64, offset + step * j as f64))
        })
        .collect();
    starts.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    starts
}

/// Newton iteration for `theta(z + t v) = 0` in `t`; returns the final point.
fn newton_along(
    z: &[Complex64],
    v: &[Complex64],
    t0: Complex64,
    tau: &SiegelMatrix,
    epsilon: f64,
    opts: &DivisorOptions,
) -> Result<Option<Vec<Complex64>>> {
    let mut t = t0;
    for _ in 0..opts.max_iterations {
        let p = axpy(z, t, v);
        let (value, grad) = theta_gradient(&p, tau, epsilon)?;
        if value.norm() <= opts.newton_tolerance * growth_factor(&p, tau).max(1.0) {
            return Ok(Some(p));
        }
        let slope = dot(&grad, v);
        if slope.norm() == 0.0 {
            return Ok(None);
        }
        let delta = value / slope;
        t -= delta;
        if !t.is_finite() || t.norm() > 10.0 * (1.0 + opts.half_width) {
            return Ok(None);
        }
        if delta.norm() <= 1e-15 * (1.0 + t.norm()) {
            return Ok(Some(axpy(z, t, v)));
        }
    }
    Ok(None)
}

/// [`divisor_solve_with`] using default options.
pub fn divisor_solve(
    tau: &SiegelMatrix,
    anchor: &[Complex64],
    direction: &[Complex64],
    epsilon: f64,
) -> Result<DivisorSample> {
    divisor_solve_with(tau, anchor, direction, epsilon, &DivisorOptions::default())
}

/// Finds a smooth zero of `theta` on the complex line `anchor + t direction`.
///
/// Starts are tried in order of increasing `|t|`. A converged point is reduced
/// into the fundamental cell and polished along the same line.
pub fn divisor_solve_with(
    tau: &SiegelMatrix,
    anchor: &[Complex64],
    direction: &[Complex64],
    epsilon: f64,
    opts: &DivisorOptions,
) -> Result<DivisorSample> {
    let n = tau.dim();
    for v in [anchor, direction] {
        if v.len() != n {
            return Err(ThetaError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    if vec_norm(direction) == 0.0 || !direction.iter().all(|x| x.is_finite()) {
        return Err(ThetaError::Precondition("direction must be nonzero".into()));
    }
    let mut singular = None;
    let starts = grid_starts(opts);
    for &t0 in &starts {
        let Some(found) = newton_along(anchor, direction, t0, tau, epsilon, opts)? else {
            continue;
        };
        let (reduced, _, _) = tau.reduce(&found);
        let polished = newton_along(
            &reduced,
            direction,
            Complex64::new(0.0, 0.0),
            tau,
            epsilon,
            opts,
        )?
        .unwrap_or(reduced);
        let jet = theta_jet(&polished, tau, epsilon)?;
        if jet.value.norm() >= opts.accept_residual {
            continue;
        }
        let sample = DivisorSample::from_jet(polished, &jet);
        if !sample.is_smooth(opts.smooth_threshold) {
            singular = Some(sample.gradient_norm);
            continue;
        }
        return Ok(sample);
    }
    Err(match singular {
        Some(g) => ThetaError::SingularPoint(g),
        None => ThetaError::NoConvergence {
            starts: starts.len(),
        },
    })
}

/// Divisor sample from a random anchor in the fundamental cell and a random
/// direction, retrying with fresh draws up to `attempts` times.
pub fn random_divisor_sample<R: rand::Rng>(
    rng: &mut R,
    tau: &SiegelMatrix,
    epsilon: f64,
    attempts: usize,
) -> Result<DivisorSample> {
    let mut last = ThetaError::NoConvergence { starts: 0 };
    for _ in 0..attempts.max(1) {
        let anchor = random_cell_point(rng, tau);
        let direction = random_direction(rng, tau.dim());
        match divisor_solve(tau, &anchor, &direction, epsilon) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// `count` independent random samples; sample `i` uses stream `i` of `seed`.
pub fn sample_divisor(
    tau: &SiegelMatrix,
    count: usize,
    seed: u64,
    epsilon: f64,
    parallelism: Parallelism,
) -> Vec<Result<DivisorSample>> {
    map_indexed(parallelism, count, |i| {
        let mut rng = sample_rng(seed, i as u64);
        random_divisor_sample(&mut rng, tau, epsilon, 8)
    })
}

/// Gradient covector scaled so that its largest coordinate is exactly 1.
pub fn gauss_map(sample: &DivisorSample) -> Result<Vec<Complex64>> {
    if !sample.is_smooth(DivisorOptions::default().smooth_threshold) {
        return Err(ThetaError::SingularPoint(sample.gradient_norm));
    }
    let j = sample.chart();
    let pivot = sample.gradient[j];
    Ok(sample
        .gradient
        .iter()
        .enumerate()
        .map(|(k, g)| {
            if k == j {
                Complex64::new(1.0, 0.0)
            } else {
                g / pivot
            }
        })
        .collect())
}

/// Pulls `z` back onto the divisor by Newton steps along the fixed direction
/// `conj(grad) / |grad|^2` taken at `z`.
pub fn project_to_divisor(
    z: &[Complex64],
    tau: &SiegelMatrix,
    epsilon: f64,
) -> Result<Vec<Complex64>> {
    let (mut value, grad) = theta_gradient(z, tau, epsilon)?;
    let norm2 = grad.iter().map(|g| g.norm_sqr()).sum::<f64>();
    if norm2 == 0.0 {
        return Err(ThetaError::ProjectionFailed);
    }
    let w: Vec<Complex64> = grad.iter().map(|g| g.conj() / norm2).collect();
    let mut p = z.to_vec();
    let tolerance = 1e-14 * growth_factor(z, tau).max(1.0);
    for _ in 0..20 {
        if value.norm() <= tolerance {
            return Ok(p);
        }
        let (_, g) = theta_gradient(&p, tau, epsilon)?;
        let slope = dot(&g, &w);
        if slope.norm() < 1e-3 {
            return Err(ThetaError::ProjectionFailed);
        }
        let delta = value / slope;
        p = axpy(&p, -delta, &w);
        let previous = value.norm();
        value = theta_gradient(&p, tau, epsilon)?.0;
        if value.norm() > previous && value.norm() > 1e3 * tolerance {
            return Err(ThetaError::ProjectionFailed);
        }
    }
    if value.norm() <= 1e3 * tolerance {
        Ok(p)
    } else {
        Err(ThetaError::ProjectionFailed)
    }
}

/// `|eta|` and `|det dGamma|` at a divisor sample, each with its natural scale.
#[derive(Clone, Debug, Serialize)]
pub struct RamificationResidual {
    pub eta_abs: f64,
    /// [`eta_scale`] at the sample.
    pub eta_scale: f64,
    pub dgamma_det_abs: f64,
    /// `1 + (|hess|_max / |theta_chart|)^(n-1)`, the size of the entries of `dGamma` to the `n-1`.
    pub dgamma_scale: f64,
    pub chart: usize,
}

impl RamificationResidual {
    pub fn eta_relative(&self) -> f64 {
        self.eta_abs / self.eta_scale
    }

    pub fn dgamma_relative(&self) -> f64 {
        self.dgamma_det_abs / self.dgamma_scale
    }
}

/// Default finite-difference step for the Gauss map differential.
pub const GAUSS_STEP: f64 = 1e-4;

/// Numerical `det dGamma` in the affine chart `theta_k / theta_j` of the
/// target, differentiated along the sample's tangent basis.
///
/// Central differences at `step` and `step / 2` are combined by Richardson
/// extrapolation. Each displaced point is projected back onto the divisor.
pub fn gauss_ramification_residual(
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    step: f64,
    epsilon: f64,
) -> Result<RamificationResidual> {
    let n = tau.dim();
    if !(n == 2 || n == 3) {
        return Err(ThetaError::UnsupportedDimension(n));
    }
    if !(step > 0.0 && step < 0.1) {
        return Err(ThetaError::Precondition(format!(
            "step {step} out of range"
        )));
    }
    let jet = theta_jet(&sample.z, tau, epsilon)?;
    let base = DivisorSample::from_jet(sample.z.clone(), &jet);
    if !base.is_smooth(DivisorOptions::default().smooth_threshold) {
        return Err(ThetaError::SingularPoint(base.gradient_norm));
    }
    let j = base.chart();
    let chart = |z: &[Complex64]| -> Result<Vec<Complex64>> {
        let (_, g) = theta_gradient(z, tau, epsilon)?;
        if g[j].norm() == 0.0 {
            return Err(ThetaError::ChartFailure);
        }
        Ok((0..n).filter(|&k| k != j).map(|k| g[k] / g[j]).collect())
    };
    let difference = |t: &[Complex64], h: f64| -> Result<Vec<Complex64>> {
        let plus = project_to_divisor(&axpy(&base.z, Complex64::new(h, 0.0), t), tau, epsilon)?;
        let minus = project_to_divisor(&axpy(&base.z, Complex64::new(-h, 0.0), t), tau, epsilon)?;
        let (gp, gm) = (chart(&plus)?, chart(&minus)?);
        Ok(gp
            .iter()
            .zip(&gm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    };
    let m = n - 1;
    let mut d = DMatrix::<Complex64>::zeros(m, m);
    for (col, t) in base.tangent.iter().enumerate() {
        let coarse = difference(t, step)?;
        let fine = difference(t, step / 2.0)?;
        for row in 0..m {
            d[(row, col)] = (4.0 * fine[row] - coarse[row]) / 3.0;
        }
    }
    let hmax = jet.hessian.iter().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(RamificationResidual {
        eta_abs: eta_from_jet(&jet).norm(),
        eta_scale: eta_scale(&jet),
        dgamma_det_abs: determinant(&d)?.norm(),
        dgamma_scale: 1.0 + (hmax / jet.gradient[j].norm()).powi(m as i32),
        chart: j,
    })
}
