//! Sampled verification sweeps.
//!
//! Every sample draws its inputs from its own random stream and results are
//! folded in sample order, so a report depends only on its configuration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::characteristic::ThetaCharacteristic;
use crate::divisor::{
    gauss_ramification_residual, half_period, project_to_divisor, random_divisor_sample, vec_norm,
    DivisorSample, GAUSS_STEP,
};
use crate::error::{Result, ThetaError};
use crate::eta::{
    cofactor, decomposable_tau, eta_form, eta_from_jet, eta_recursion_sides, eta_scale,
};
use crate::exec::{map_indexed, Parallelism};
use crate::identities::{
    even_nullwerte_product, f_value_in_chart, genus2_product_formula_with, is_decomposable,
    jacobi_derivative_residual, wronskian_from_curve, wronskian_identity_residual_in_chart,
    CHART_THRESHOLD,
};
use crate::lattice::truncation::{check_epsilon, MIN_EPSILON};
use crate::lattice::{theta, theta_eval, theta_jet};
use crate::modular::{
    labeled_reference_elements, period_factor, random_word, reference_elements, verify_eta_modular,
    verify_theta_modular, RejectionThresholds,
};
use crate::sampling::{
    random_complex_matrix, random_complex_vector, random_genus_one_tau, random_integer_vector,
    random_tau, random_z, sample_rng,
};
use crate::siegel::SiegelMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Quasiperiod,
    ModularTheta,
    ModularEta,
    EtaLemmas,
    Decomposable,
    Gauss,
    Genus2,
    Jacobi,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Quasiperiod,
        Suite::ModularTheta,
        Suite::ModularEta,
        Suite::EtaLemmas,
        Suite::Decomposable,
        Suite::Gauss,
        Suite::Genus2,
        Suite::Jacobi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Quasiperiod => "quasiperiod",
            Suite::ModularTheta => "modular-theta",
            Suite::ModularEta => "modular-eta",
            Suite::EtaLemmas => "eta-lemmas",
            Suite::Decomposable => "decomposable",
            Suite::Gauss => "gauss",
            Suite::Genus2 => "genus2",
            Suite::Jacobi => "jacobi",
        }
    }

    /// Samples per dimension (per group element for `modular-eta`).
    pub fn default_samples(self) -> usize {
        match self {
            Suite::Quasiperiod | Suite::EtaLemmas => 1000,
            Suite::ModularTheta | Suite::Decomposable => 200,
            Suite::ModularEta => 60,
            Suite::Gauss => 10_000,
            Suite::Genus2 | Suite::Jacobi => 100,
        }
    }

    /// Dimensions swept when none is requested.
    pub fn default_dims(self) -> &'static [usize] {
        match self {
            Suite::Quasiperiod => &[1, 2, 3, 4],
            Suite::ModularTheta | Suite::ModularEta => &[1, 2],
            Suite::EtaLemmas => &[2, 3, 4, 5, 6],
            Suite::Decomposable => &[2, 3],
            Suite::Gauss | Suite::Genus2 => &[2],
            Suite::Jacobi => &[1],
        }
    }

    fn supports(self, n: usize) -> bool {
        match self {
            Suite::Quasiperiod | Suite::ModularTheta => (1..=4).contains(&n),
            Suite::ModularEta => (1..=3).contains(&n),
            Suite::EtaLemmas => (2..=6).contains(&n),
            Suite::Decomposable => (2..=4).contains(&n),
            Suite::Gauss | Suite::Genus2 => n == 2,
            Suite::Jacobi => n == 1,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                format!("unknown suite `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Dimension (matrix size for `eta-lemmas`); `None` sweeps the suite's defaults.
    pub n: Option<usize>,
    /// Fixed period matrix; `None` draws a random one per sample (or per seed).
    pub tau: Option<SiegelMatrix>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub epsilon: f64,
    pub parallelism: Parallelism,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: None,
            tau: None,
            samples: None,
            seed: 0,
            epsilon: 1e-12,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub tolerance: f64,
    pub evaluated: usize,
    pub rejected: usize,
    pub max_residual: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub index: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub epsilon: f64,
    pub samples: usize,
    /// Largest residual over the suite's primary checks.
    pub max_residual: f64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    /// The first [`MAX_LISTED_FAILURES`] failures in sample order.
    pub failures: Vec<Failure>,
    pub failure_count: usize,
}

pub const MAX_LISTED_FAILURES: usize = 50;

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Checks whose name starts with `prefix`.
    pub fn checks_with_prefix<'a>(
        &'a self,
        prefix: &'a str,
    ) -> impl Iterator<Item = &'a CheckReport> {
        self.checks
            .iter()
            .filter(move |c| c.name.starts_with(prefix))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Obs {
    Value(f64),
    Rejected,
    Failed(String),
}

type Row = (usize, Obs);

fn observe(id: usize, r: Result<f64>) -> Row {
    match r {
        Ok(v) => (id, Obs::Value(v)),
        Err(ThetaError::SampleRejected(_)) => (id, Obs::Rejected),
        Err(e) => (id, Obs::Failed(e.to_string())),
    }
}

struct Tally {
    checks: Vec<CheckReport>,
    primary: Vec<bool>,
    failures: Vec<Failure>,
    failure_count: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            primary: Vec::new(),
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn add(&mut self, name: String, tolerance: f64, primary: bool) -> usize {
        self.checks.push(CheckReport {
            name,
            tolerance,
            evaluated: 0,
            rejected: 0,
            max_residual: 0.0,
            failures: 0,
        });
        self.primary.push(primary);
        self.checks.len() - 1
    }

    fn fail(&mut self, id: usize, index: usize, detail: String) {
        self.checks[id].failures += 1;
        self.failure_count += 1;
        if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(Failure {
                check: self.checks[id].name.clone(),
                index,
                detail,
            });
        }
    }

    fn record(&mut self, index: usize, (id, obs): Row) {
        match obs {
            Obs::Value(v) => {
                let check = &mut self.checks[id];
                check.evaluated += 1;
                if v.is_nan() || v > check.max_residual {
                    check.max_residual = if v.is_nan() { f64::NAN } else { v };
                }
                let tolerance = check.tolerance;
                if !(v <= tolerance) {
                    self.fail(id, index, format!("residual {v:e} exceeds {tolerance:e}"));
                }
            }
            Obs::Rejected => self.checks[id].rejected += 1,
            Obs::Failed(m) => {
                self.checks[id].evaluated += 1;
                self.fail(id, index, m);
            }
        }
    }

    fn finish(self, suite: Suite, config: &SuiteConfig, samples: usize) -> SuiteReport {
        let max_residual = self
            .checks
            .iter()
            .zip(&self.primary)
            .filter(|(_, p)| **p)
            .map(|(c, _)| c.max_residual)
            .fold(0.0, |a: f64, b| {
                if b.is_nan() || a.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            });
        SuiteReport {
            suite,
            seed: config.seed,
            epsilon: config.epsilon,
            samples,
            max_residual,
            passed: self.failure_count == 0,
            checks: self.checks,
            failures: self.failures,
            failure_count: self.failure_count,
        }
    }
}

/// `|a - b| / (max(|a|, |b|) + 1)`.
pub fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (a.norm().max(b.norm()) + 1.0)
}

fn stream(block: usize, index: usize) -> u64 {
    ((block as u64) << 32) | index as u64
}

/// Stream reserved for a per-seed period matrix.
const TAU_STREAM: u64 = u64::MAX;

fn seed_tau(config: &SuiteConfig, n: usize) -> SiegelMatrix {
    config
        .tau
        .clone()
        .unwrap_or_else(|| random_tau(&mut sample_rng(config.seed, TAU_STREAM), n))
}

fn shifted(z: &[Complex64], tau: &SiegelMatrix, u: &[i64], v: &[i64]) -> Vec<Complex64> {
    z.iter()
        .zip(tau.lattice_point(u, v))
        .map(|(a, b)| a + b)
        .collect()
}

/// Runs `suite` under `config`.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<SuiteReport> {
    check_epsilon(config.epsilon)?;
    let dims: Vec<usize> = match (config.n, &config.tau) {
        (Some(n), Some(tau)) if n != tau.dim() => {
            return Err(ThetaError::DimensionMismatch {
                expected: n,
                found: tau.dim(),
            })
        }
        (_, Some(tau)) => vec![tau.dim()],
        (Some(n), None) => vec![n],
        (None, None) => suite.default_dims().to_vec(),
    };
    if let Some(&n) = dims.iter().find(|&&n| !suite.supports(n)) {
        return Err(ThetaError::UnsupportedDimension(n));
    }
    let samples = config.samples.unwrap_or(suite.default_samples());
    let mut tally = Tally::new();
    match suite {
        Suite::Quasiperiod => quasiperiod(&mut tally, config, &dims, samples),
        Suite::ModularTheta => modular_theta(&mut tally, config, &dims, samples),
        Suite::ModularEta => modular_eta(&mut tally, config, &dims, samples),
        Suite::EtaLemmas => eta_lemmas(&mut tally, config, &dims, samples),
        Suite::Decomposable => decomposable(&mut tally, config, &dims, samples),
        Suite::Gauss => gauss(&mut tally, config, samples)?,
        Suite::Genus2 => genus2(&mut tally, config, samples)?,
        Suite::Jacobi => jacobi(&mut tally, config, samples),
    }
    Ok(tally.finish(suite, config, samples))
}

fn fold(tally: &mut Tally, rows: Vec<Vec<Row>>, offset: usize) {
    for (i, sample_rows) in rows.into_iter().enumerate() {
        for row in sample_rows {
            tally.record(offset + i, row);
        }
    }
}

fn quasiperiod(tally: &mut Tally, config: &SuiteConfig, dims: &[usize], samples: usize) {
    let eps = config.epsilon;
    for (block, &n) in dims.iter().enumerate() {
        let qp = tally.add(format!("theta-quasiperiod[n={n}]"), 1e-9, true);
        let sym = tally.add(format!("symmetry[n={n}]"), 1e-12, true);
        let odd = tally.add(format!("odd-vanishing[n={n}]"), 1e-12, true);
        let order = (2..=3)
            .contains(&n)
            .then(|| tally.add(format!("eta-order[n={n}]"), 1e-7, true));
        let odd_chars = ThetaCharacteristic::odd(n);
        let rows = map_indexed(config.parallelism, samples, |i| {
            let mut rng = sample_rng(config.seed, stream(block, i));
            let tau = config
                .tau
                .clone()
                .unwrap_or_else(|| random_tau(&mut rng, n));
            let z = random_z(&mut rng, n, 2.0);
            let u = random_integer_vector(&mut rng, n, 2);
            let v = random_integer_vector(&mut rng, n, 2);
            let mut rows = Vec::new();
            rows.push(observe(
                qp,
                (|| {
                    let base = theta(&z, &tau, eps)?;
                    let moved = theta(&shifted(&z, &tau, &u, &v), &tau, eps)?;
                    Ok(relative_gap(moved, period_factor(&z, &tau, &u) * base))
                })(),
            ));
            rows.push(observe(
                sym,
                (|| {
                    let minus: Vec<Complex64> = z.iter().map(|x| -x).collect();
                    Ok(relative_gap(
                        theta(&minus, &tau, eps)?,
                        theta(&z, &tau, eps)?,
                    ))
                })(),
            ));
            if let Some(ch) = odd_chars.get(i % odd_chars.len().max(1)) {
                rows.push(observe(
                    odd,
                    (|| {
                        let zero = vec![Complex64::new(0.0, 0.0); n];
                        let value = theta_eval(&zero, &tau, ch, eps)?;
                        Ok(value.norm() / (1.0 + theta(&zero, &tau, eps)?.norm()))
                    })(),
                ));
            }
            if let Some(order) = order {
                match random_divisor_sample(&mut rng, &tau, eps, 8) {
                    Ok(s) => {
                        let eta = theta_jet(&s.z, &tau, eps).map(|j| eta_from_jet(&j));
                        for _ in 0..9 {
                            let u = random_integer_vector(&mut rng, n, 1);
                            let v = random_integer_vector(&mut rng, n, 1);
                            rows.push(observe(
                                order,
                                (|| {
                                    let base = *eta.as_ref().map_err(Clone::clone)?;
                                    let moved = eta_from_jet(&theta_jet(
                                        &shifted(&s.z, &tau, &u, &v),
                                        &tau,
                                        eps,
                                    )?);
                                    let p = period_factor(&s.z, &tau, &u).powu(n as u32 + 1);
                                    Ok(relative_gap(moved, p * base))
                                })(),
                            ));
                        }
                    }
                    Err(e) => rows.push((order, Obs::Failed(e.to_string()))),
                }
            }
            rows
        });
        fold(tally, rows, 0);
    }
}

fn modular_theta(tally: &mut Tally, config: &SuiteConfig, dims: &[usize], samples: usize) {
    let eps = config.epsilon;
    let thresholds = RejectionThresholds::default();
    for (block, &n) in dims.iter().enumerate() {
        let id = tally.add(format!("theta-modular[n={n}]"), 1e-8, true);
        let refs = reference_elements(n);
        let rows = map_indexed(config.parallelism, samples, |i| {
            let mut rng = sample_rng(config.seed, stream(block, i));
            let gamma = if i % 2 == 0 {
                refs[(i / 2) % refs.len()].clone()
            } else {
                random_word(&mut rng, n, 3)
            };
            let tau = config
                .tau
                .clone()
                .unwrap_or_else(|| random_tau(&mut rng, n));
            let z = random_z(&mut rng, n, 1.0);
            vec![observe(
                id,
                verify_theta_modular(&gamma, &z, &tau, eps, &thresholds).map(|r| r.max_deviation()),
            )]
        });
        fold(tally, rows, 0);
    }
}

fn modular_eta(tally: &mut Tally, config: &SuiteConfig, dims: &[usize], samples: usize) {
    let eps = config.epsilon;
    let thresholds = RejectionThresholds::default();
    let mut block = 0;
    for &n in dims {
        for (g, gamma) in labeled_reference_elements(n) {
            let id = tally.add(format!("eta-modular[n={n},gamma={g}]"), 1e-6, true);
            let rows = map_indexed(config.parallelism, samples, |i| {
                let mut rng = sample_rng(config.seed, stream(block, i));
                let tau = config
                    .tau
                    .clone()
                    .unwrap_or_else(|| random_tau(&mut rng, n));
                let result = random_divisor_sample(&mut rng, &tau, eps, 8).and_then(|s| {
                    verify_eta_modular(&gamma, &s, &tau, eps, &thresholds)
                        .map(|r| r.max_deviation())
                });
                vec![observe(id, result)]
            });
            fold(tally, rows, 0);
            block += 1;
        }
    }
}

fn eta_lemmas(tally: &mut Tally, config: &SuiteConfig, dims: &[usize], samples: usize) {
    let adj = tally.add("adjugate".into(), 1e-10, true);
    let bordered = tally.add("bordered-determinant".into(), 1e-10, true);
    let recursion = tally.add("recursion".into(), 1e-10, true);
    let rank = tally.add("rank-structured-vanishing".into(), 1e-10, true);
    let rows = map_indexed(config.parallelism, samples, |i| {
        let mut rng = sample_rng(config.seed, stream(0, i));
        let m = dims[i % dims.len()];
        let g = random_complex_vector(&mut rng, m);
        let h = random_complex_matrix(&mut rng, m, m);
        let p = random_complex_vector(&mut rng, m);
        vec![
            observe(
                adj,
                (|| {
                    let product = &h * cofactor(&h)?.transpose();
                    let det = h.determinant();
                    let gap = (&product - DMatrix::identity(m, m) * det).camax();
                    Ok(gap / (1.0 + det.norm().max(product.camax())))
                })(),
            ),
            observe(
                bordered,
                (|| {
                    let mut b = DMatrix::zeros(m + 1, m + 1);
                    b.view_mut((0, 0), (m, m)).copy_from(&h);
                    for k in 0..m {
                        b[(k, m)] = g[k];
                        b[(m, k)] = g[k];
                    }
                    Ok(relative_gap(eta_form(&g, &h)?, -b.determinant()))
                })(),
            ),
            observe(
                recursion,
                (|| {
                    let (lhs, rhs) = eta_recursion_sides(&g, &h)?;
                    Ok(relative_gap(lhs, rhs))
                })(),
            ),
            observe(
                rank,
                (|| {
                    let structured = DMatrix::from_fn(m, m, |a, b| p[a] * g[b] + p[b] * g[a]);
                    let gmax = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    let scale = 1.0 + gmax * gmax * structured.camax().powi(m as i32 - 1);
                    Ok(eta_form(&g, &structured)?.norm() / scale)
                })(),
            ),
        ]
    });
    fold(tally, rows, 0);
}

fn decomposable(tally: &mut Tally, config: &SuiteConfig, dims: &[usize], samples: usize) {
    let eps = config.epsilon;
    let mut block = 0;
    for &n in dims {
        for k in 1..n {
            let id = tally.add(format!("eta-vanishing[k={k},n={n}]"), 1e-8, true);
            let rows = map_indexed(config.parallelism, samples, |i| {
                let mut rng = sample_rng(config.seed, stream(block, i));
                let tau = config.tau.clone().unwrap_or_else(|| {
                    let t1 = random_tau(&mut rng, k);
                    let t2 = random_tau(&mut rng, n - k);
                    decomposable_tau(&t1, &t2).expect("blocks are valid")
                });
                vec![observe(
                    id,
                    (|| {
                        let s = random_divisor_sample(&mut rng, &tau, eps, 8)?;
                        let jet = theta_jet(&s.z, &tau, eps)?;
                        Ok(eta_from_jet(&jet).norm() / eta_scale(&jet))
                    })(),
                )]
            });
            fold(tally, rows, 0);
            block += 1;
        }
    }
}

/// `|eta| / scale` below which `eta` counts as zero.
pub const ETA_ZERO: f64 = 1e-8;
/// `|det dGamma| / scale` below which the Gauss map counts as ramified.
pub const DGAMMA_ZERO: f64 = 1e-4;

fn lattice_distance(tau: &SiegelMatrix, a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    vec_norm(&tau.reduce(&diff).0)
}

fn require_indecomposable(tau: &SiegelMatrix, eps: f64) -> Result<()> {
    if is_decomposable(tau, eps)? {
        Err(ThetaError::Decomposable)
    } else {
        Ok(())
    }
}

fn gauss(tally: &mut Tally, config: &SuiteConfig, samples: usize) -> Result<()> {
    let eps = config.epsilon;
    let tau = seed_tau(config, 2);
    require_indecomposable(&tau, eps)?;
    let sampled = tally.add("divisor-samples".into(), 0.0, false);
    let at_eta_zero = tally.add("dgamma-where-eta-vanishes".into(), DGAMMA_ZERO, true);
    let at_dgamma_zero = tally.add("eta-where-dgamma-vanishes".into(), ETA_ZERO, true);
    let zero_set = tally.add("eta-zeros-at-odd-half-periods".into(), 1e-6, true);
    let half_periods = tally.add("eta-at-odd-half-periods".into(), ETA_ZERO, true);
    let approach = tally.add("approach-decreasing".into(), 0.0, false);
    let odd: Vec<Vec<Complex64>> = ThetaCharacteristic::odd(2)
        .iter()
        .map(|ch| half_period(&tau, ch))
        .collect();

    let classify = |s: &DivisorSample, rows: &mut Vec<Row>| -> Result<(f64, f64)> {
        let r = gauss_ramification_residual(s, &tau, GAUSS_STEP, eps)?;
        let (e, d) = (r.eta_relative(), r.dgamma_relative());
        if e < ETA_ZERO {
            rows.push((at_eta_zero, Obs::Value(d)));
            let nearest = odd
                .iter()
                .map(|w| lattice_distance(&tau, &s.z, w))
                .fold(f64::INFINITY, f64::min);
            rows.push((zero_set, Obs::Value(nearest)));
        }
        if d < DGAMMA_ZERO {
            rows.push((at_dgamma_zero, Obs::Value(e)));
        }
        Ok((e, d))
    };

    let rows = map_indexed(config.parallelism, samples, |i| {
        let mut rng = sample_rng(config.seed, stream(0, i));
        let mut rows = Vec::new();
        let outcome =
            random_divisor_sample(&mut rng, &tau, eps, 8).and_then(|s| classify(&s, &mut rows));
        match outcome {
            Ok(_) => rows.push((sampled, Obs::Value(0.0))),
            Err(e) => rows.push((sampled, Obs::Failed(e.to_string()))),
        }
        rows
    });
    fold(tally, rows, 0);

    let rows = map_indexed(config.parallelism, odd.len(), |k| {
        let mut rows = Vec::new();
        let w = &odd[k];
        let result = (|| -> Result<()> {
            let jet = theta_jet(w, &tau, eps)?;
            let s = DivisorSample::from_jet(w.clone(), &jet);
            let (e, _) = classify(&s, &mut rows)?;
            rows.push((half_periods, Obs::Value(e)));
            // Walk towards the half-period along the curve.
            let mut previous = (f64::INFINITY, f64::INFINITY);
            let mut worst: f64 = 0.0;
            for delta in [1e-1, 1e-2, 1e-3] {
                let start: Vec<Complex64> = w
                    .iter()
                    .zip(&s.tangent[0])
                    .map(|(a, t)| a + t * delta)
                    .collect();
                let p = project_to_divisor(&start, &tau, eps)?;
                let near = DivisorSample::from_jet(p.clone(), &theta_jet(&p, &tau, eps)?);
                let (e, d) = classify(&near, &mut rows)?;
                if !(e < previous.0 && d < previous.1) {
                    worst = 1.0;
                }
                previous = (e, d);
            }
            rows.push((approach, Obs::Value(worst)));
            Ok(())
        })();
        if let Err(e) = result {
            rows.push((half_periods, Obs::Failed(e.to_string())));
        }
        rows
    });
    fold(tally, rows, samples);
    Ok(())
}

fn genus2(tally: &mut Tally, config: &SuiteConfig, samples: usize) -> Result<()> {
    let eps = config.epsilon;
    let fine = (eps / 10.0).max(MIN_EPSILON);
    let tau = seed_tau(config, 2);
    require_indecomposable(&tau, eps)?;
    let nullwerte = even_nullwerte_product(&tau, eps)?;
    let nullwerte_fine = even_nullwerte_product(&tau, fine)?;
    let product = tally.add("product-formula".into(), 1e-6, true);
    let refinement = tally.add("product-refinement".into(), 1e-8, true);
    let sign_check = tally.add("product-sign-constant".into(), 0.0, true);
    let f_two_ways = tally.add("f-two-ways".into(), 1e-9, true);
    let p_plus_q = tally.add("p-plus-q".into(), 1e-8, true);
    let first_order = tally.add("first-order-term".into(), 1e-9, true);
    let cubed = tally.add("wronskian-squared-eta-equals-f-cubed".into(), 1e-7, true);
    let covariance = tally.add("chart-covariance".into(), 1e-8, true);

    let results = map_indexed(config.parallelism, samples, |i| {
        let mut rng = sample_rng(config.seed, stream(0, i));
        let mut rows = Vec::new();
        let s = match random_divisor_sample(&mut rng, &tau, eps, 8) {
            Ok(s) => s,
            Err(e) => {
                rows.push((product, Obs::Failed(e.to_string())));
                return (rows, None);
            }
        };
        let mut sign = None;
        match genus2_product_formula_with(&s, &tau, nullwerte, eps) {
            Ok(pf) => {
                sign = Some(pf.sign);
                rows.push((product, Obs::Value(pf.residual)));
                rows.push(observe(
                    refinement,
                    genus2_product_formula_with(&s, &tau, nullwerte_fine, fine)
                        .map(|g| (g.ratio - pf.ratio).norm()),
                ));
            }
            Err(e) => rows.push(observe(product, Err(e))),
        }
        match f_value_in_chart(&s, &tau, s.chart(), eps) {
            Ok(f) => {
                rows.push((f_two_ways, Obs::Value(f.f_residual)));
                rows.push((p_plus_q, Obs::Value(f.pq_residual)));
                rows.push((first_order, Obs::Value(f.first_order)));
            }
            Err(e) => rows.push((f_two_ways, Obs::Failed(e.to_string()))),
        }
        rows.push(observe(
            cubed,
            wronskian_identity_residual_in_chart(&s, &tau, s.chart(), eps),
        ));
        let both_charts = s
            .gradient
            .iter()
            .all(|g| g.norm() > CHART_THRESHOLD * s.jet_scale)
            && s.gradient[0].norm().min(s.gradient[1].norm())
                > 1e-3 * s.gradient[0].norm().max(s.gradient[1].norm());
        if both_charts {
            rows.push(observe(
                covariance,
                (|| {
                    let w0 = wronskian_from_curve(&s, &tau, 0, eps)?.value;
                    let w1 = wronskian_from_curve(&s, &tau, 1, eps)?.value;
                    let change = -s.gradient[0] / s.gradient[1];
                    let r0 = wronskian_identity_residual_in_chart(&s, &tau, 0, eps)?;
                    let r1 = wronskian_identity_residual_in_chart(&s, &tau, 1, eps)?;
                    Ok(relative_gap(w1, w0 * change * change * change).max((r0 - r1).abs()))
                })(),
            ));
        }
        (rows, sign)
    });
    let mut signs = Vec::new();
    let mut rows = Vec::new();
    for (r, sign) in results {
        rows.push(r);
        signs.extend(sign);
    }
    fold(tally, rows, 0);
    let constant = signs.windows(2).all(|w| w[0] == w[1]);
    tally.record(
        0,
        (sign_check, Obs::Value(if constant { 0.0 } else { 1.0 })),
    );
    Ok(())
}

fn jacobi(tally: &mut Tally, config: &SuiteConfig, samples: usize) {
    let id = tally.add("jacobi-derivative".into(), 1e-10, true);
    let rows = map_indexed(config.parallelism, samples, |i| {
        let mut rng = sample_rng(config.seed, stream(0, i));
        let tau = config
            .tau
            .clone()
            .unwrap_or_else(|| random_genus_one_tau(&mut rng));
        vec![observe(
            id,
            jacobi_derivative_residual(&tau, config.epsilon),
        )]
    });
    fold(tally, rows, 0);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_jacobi_sweep_passes() {
        let config = SuiteConfig {
            samples: Some(5),
            ..SuiteConfig::default()
        };
        let report = run_suite(Suite::Jacobi, &config).unwrap();
        assert!(report.passed);
        assert_eq!(report.checks[0].evaluated, 5);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        let config = SuiteConfig {
            n: Some(3),
            ..SuiteConfig::default()
        };
        assert_eq!(
            run_suite(Suite::Genus2, &config).unwrap_err(),
            ThetaError::UnsupportedDimension(3)
        );
    }
}
