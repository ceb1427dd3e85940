//! Integer symplectic matrices, the theta group `Gamma_{1,2}`, and residual
//! checks of the transformation laws of `theta` and `eta`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::divisor::DivisorSample;
use crate::error::{Result, ThetaError};
use crate::eta::{eta_from_jet, eta_scale};
use crate::lattice::{growth_factor, theta, theta_jet};
use crate::siegel::SiegelMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `gamma = (a b; c d)` in `Sp(2n, Z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticInteger {
    n: usize,
    a: DMatrix<i64>,
    b: DMatrix<i64>,
    c: DMatrix<i64>,
    d: DMatrix<i64>,
}

impl SymplecticInteger {
    /// Checks `a^t c = c^t a`, `b^t d = d^t b` and `a^t d - c^t b = I` exactly.
    pub fn new(a: DMatrix<i64>, b: DMatrix<i64>, c: DMatrix<i64>, d: DMatrix<i64>) -> Result<Self> {
        let n = a.nrows();
        if [&a, &b, &c, &d].iter().any(|m| m.shape() != (n, n)) || n == 0 {
            return Err(ThetaError::NotSymplectic);
        }
        let at = a.transpose();
        let bt = b.transpose();
        let ct = c.transpose();
        let dt = d.transpose();
        let ok = &at * &c == &ct * &a
            && &bt * &d == &dt * &b
            && &at * &d - &ct * &b == DMatrix::identity(n, n);
        if !ok {
            return Err(ThetaError::NotSymplectic);
        }
        Ok(Self { n, a, b, c, d })
    }

    pub fn identity(n: usize) -> Self {
        let id = DMatrix::identity(n, n);
        let zero = DMatrix::zeros(n, n);
        Self::new(id.clone(), zero.clone(), zero, id).expect("identity is symplectic")
    }

    /// `J = (0 -I; I 0)`, acting as `tau -> -tau^-1`.
    pub fn j(n: usize) -> Self {
        let id = DMatrix::<i64>::identity(n, n);
        let zero = DMatrix::zeros(n, n);
        Self::new(zero.clone(), -&id, id, zero).expect("J is symplectic")
    }

    /// `(I s; 0 I)` for symmetric `s`, acting as `tau -> tau + s`.
    pub fn translation(s: DMatrix<i64>) -> Result<Self> {
        let n = s.nrows();
        let id = DMatrix::identity(n, n);
        Self::new(id.clone(), s, DMatrix::zeros(n, n), id)
    }

    /// `tau -> tau + 2 E_jj` when `j == k`, else `tau -> tau + E_jk + E_kj`.
    pub fn shear(n: usize, j: usize, k: usize) -> Result<Self> {
        if j >= n || k >= n {
            return Err(ThetaError::Precondition("shear index out of range".into()));
        }
        let mut s = DMatrix::zeros(n, n);
        if j == k {
            s[(j, j)] = 2;
        } else {
            s[(j, k)] = 1;
            s[(k, j)] = 1;
        }
        Self::translation(s)
    }

    /// `(U^-t 0; 0 U)` for unimodular `U`, acting as `tau -> U^-t tau U^-1`.
    pub fn unimodular(u: DMatrix<i64>) -> Result<Self> {
        let n = u.nrows();
        let det = int_det(&u);
        if det.abs() != 1 {
            return Err(ThetaError::Precondition(format!(
                "matrix has determinant {det}, not +-1"
            )));
        }
        let inverse = int_adjugate(&u) * det;
        Self::new(
            inverse.transpose(),
            DMatrix::zeros(n, n),
            DMatrix::zeros(n, n),
            u,
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn a(&self) -> &DMatrix<i64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<i64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<i64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<i64> {
        &self.d
    }

    /// Matrix product `self * other`; its action is `other` followed by `self`.
    pub fn compose(&self, other: &Self) -> Self {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (e, f, g, h) = (&other.a, &other.b, &other.c, &other.d);
        Self {
            n: self.n,
            a: a * e + b * g,
            b: a * f + b * h,
            c: c * e + d * g,
            d: c * f + d * h,
        }
    }

    /// `(d^t -b^t; -c^t a^t)`.
    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            a: self.d.transpose(),
            b: -self.b.transpose(),
            c: -self.c.transpose(),
            d: self.a.transpose(),
        }
    }

    /// Re-checks the symplectic relations (always true for values built through this API).
    pub fn is_symplectic(&self) -> bool {
        Self::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        )
        .is_ok()
    }

    fn complex(m: &DMatrix<i64>) -> DMatrix<Complex64> {
        m.map(|x| Complex64::new(x as f64, 0.0))
    }
}

impl std::fmt::Display for SymplecticInteger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows = |m: &DMatrix<i64>| {
            (0..self.n)
                .map(|i| {
                    (0..self.n)
                        .map(|j| m[(i, j)].to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect::<Vec<_>>()
                .join("; ")
        };
        write!(
            f,
            "(a=[{}], b=[{}], c=[{}], d=[{}])",
            rows(&self.a),
            rows(&self.b),
            rows(&self.c),
            rows(&self.d)
        )
    }
}

fn int_det(m: &DMatrix<i64>) -> i64 {
    let n = m.nrows();
    match n {
        0 => 1,
        1 => m[(0, 0)],
        _ => (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[(0, j)] * int_det(&m.clone().remove_row(0).remove_column(j))
            })
            .sum(),
    }
}

/// Transposed cofactor matrix, so that `m * adj = det * I`.
fn int_adjugate(m: &DMatrix<i64>) -> DMatrix<i64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1);
    }
    DMatrix::from_fn(n, n, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
        sign * int_det(&m.clone().remove_row(j).remove_column(i))
    })
}

/// True iff the diagonals of `a^t c` and `b^t d` are all even.
pub fn gamma12_member(gamma: &SymplecticInteger) -> bool {
    let ac = gamma.a.transpose() * &gamma.c;
    let bd = gamma.b.transpose() * &gamma.d;
    (0..gamma.n).all(|i| ac[(i, i)] % 2 == 0 && bd[(i, i)] % 2 == 0)
}

/// Condition number above which `c tau + d` is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// `c tau + d`.
pub fn automorphy_matrix(
    gamma: &SymplecticInteger,
    tau: &SiegelMatrix,
) -> Result<DMatrix<Complex64>> {
    if gamma.dim() != tau.dim() {
        return Err(ThetaError::DimensionMismatch {
            expected: tau.dim(),
            found: gamma.dim(),
        });
    }
    Ok(SymplecticInteger::complex(&gamma.c) * tau.entries() + SymplecticInteger::complex(&gamma.d))
}

fn checked_inverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let sv = m.clone().singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < MAX_CONDITION) {
        return Err(ThetaError::SingularTransform(condition));
    }
    m.clone()
        .try_inverse()
        .ok_or(ThetaError::SingularTransform(condition))
}

/// `(z, tau) -> ((c tau + d)^-t z, (a tau + b)(c tau + d)^-1)`.
pub fn symplectic_act(
    gamma: &SymplecticInteger,
    z: &[Complex64],
    tau: &SiegelMatrix,
) -> Result<(Vec<Complex64>, SiegelMatrix)> {
    let m = automorphy_matrix(gamma, tau)?;
    if z.len() != tau.dim() {
        return Err(ThetaError::DimensionMismatch {
            expected: tau.dim(),
            found: z.len(),
        });
    }
    let m_inv = checked_inverse(&m)?;
    let image = (SymplecticInteger::complex(&gamma.a) * tau.entries()
        + SymplecticInteger::complex(&gamma.b))
        * &m_inv;
    let sym = (&image + image.transpose()) * Complex64::new(0.5, 0.0);
    let asym = (&image - &sym).camax();
    if asym > 1e-8 * (1.0 + sym.camax()) {
        return Err(ThetaError::NotSymplectic);
    }
    let tau_image = SiegelMatrix::new(sym)?;
    let z_image = m_inv.transpose() * nalgebra::DVector::from_column_slice(z);
    Ok((z_image.iter().copied().collect(), tau_image))
}

/// `p(z, u) = exp(-pi i u^t tau u - 2 pi i u^t z)`.
pub fn period_factor(z: &[Complex64], tau: &SiegelMatrix, u: &[i64]) -> Complex64 {
    let n = tau.dim();
    let mut quad = Complex64::new(0.0, 0.0);
    let mut lin = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            quad += tau.get(i, j) * (u[i] * u[j]) as f64;
        }
        lin += z[i] * u[i] as f64;
    }
    (-I * PI * quad - I * (2.0 * PI) * lin).exp()
}

/// `q(z, gamma, tau) = exp(pi i z^t (c tau + d)^-1 c z)`.
pub fn automorphy_q(
    z: &[Complex64],
    gamma: &SymplecticInteger,
    tau: &SiegelMatrix,
) -> Result<Complex64> {
    let m_inv = checked_inverse(&automorphy_matrix(gamma, tau)?)?;
    let zv = nalgebra::DVector::from_column_slice(z);
    let cz = SymplecticInteger::complex(&gamma.c) * &zv;
    let quad = zv.transpose() * (m_inv * cz);
    Ok((I * PI * quad[(0, 0)]).exp())
}

/// `det(m)^(twice_weight / 2)` on the principal branch of the logarithm.
pub fn principal_det_power(det: Complex64, twice_weight: i32) -> Complex64 {
    (det.ln() * (twice_weight as f64 / 2.0)).exp()
}

/// Observed over predicted value of a transformation law, up to a root of unity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AutomorphyReport {
    pub ratio: Complex64,
    /// `||ratio| - 1|`
    pub modulus_deviation: f64,
    /// `|ratio^8 - 1|`
    pub root8_deviation: f64,
}

impl AutomorphyReport {
    pub fn from_ratio(ratio: Complex64) -> Self {
        Self {
            ratio,
            modulus_deviation: (ratio.norm() - 1.0).abs(),
            root8_deviation: (ratio.powu(8) - 1.0).norm(),
        }
    }

    pub fn max_deviation(&self) -> f64 {
        self.modulus_deviation.max(self.root8_deviation)
    }
}

/// Thresholds below which a ratio would divide by (nearly) zero.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RejectionThresholds {
    /// Minimum `|theta(z)| / growth` for the theta law.
    pub theta_floor: f64,
    /// Minimum `|eta(z)| / eta_scale` for the eta law.
    pub eta_floor: f64,
    /// Maximum `|theta(z, tau)|` accepted as a divisor point.
    pub divisor_residual: f64,
    /// Maximum `|theta(z', tau')| / growth` after transforming.
    pub transformed_residual: f64,
}

impl Default for RejectionThresholds {
    fn default() -> Self {
        Self {
            theta_floor: 1e-6,
            eta_floor: 1e-6,
            divisor_residual: 1e-9,
            transformed_residual: 1e-7,
        }
    }
}

/// Checks `theta(z', tau') = zeta det(c tau + d)^(1/2) q theta(z, tau)` up to the
/// eighth root of unity `zeta`.
pub fn verify_theta_modular(
    gamma: &SymplecticInteger,
    z: &[Complex64],
    tau: &SiegelMatrix,
    epsilon: f64,
    thresholds: &RejectionThresholds,
) -> Result<AutomorphyReport> {
    if !gamma12_member(gamma) {
        return Err(ThetaError::NotInThetaGroup);
    }
    let before = theta(z, tau, epsilon)?;
    if before.norm() < thresholds.theta_floor * growth_factor(z, tau) {
        return Err(ThetaError::SampleRejected(format!(
            "|theta(z)| = {:e} is too close to the divisor",
            before.norm()
        )));
    }
    let (z_image, tau_image) = symplectic_act(gamma, z, tau)?;
    let after = theta(&z_image, &tau_image, epsilon)?;
    let m = automorphy_matrix(gamma, tau)?;
    let predicted = principal_det_power(m.determinant(), 1) * automorphy_q(z, gamma, tau)? * before;
    Ok(AutomorphyReport::from_ratio(after / predicted))
}

/// Checks `eta(z', tau') = det(c tau + d)^((n+5)/2) zeta^(n+1) q^(n+1) eta(z, tau)`
/// on the divisor, up to the eighth root of unity `zeta^(n+1)`.
pub fn verify_eta_modular(
    gamma: &SymplecticInteger,
    sample: &DivisorSample,
    tau: &SiegelMatrix,
    epsilon: f64,
    thresholds: &RejectionThresholds,
) -> Result<AutomorphyReport> {
    if !gamma12_member(gamma) {
        return Err(ThetaError::NotInThetaGroup);
    }
    if sample.residual >= thresholds.divisor_residual {
        return Err(ThetaError::Precondition(format!(
            "divisor residual {:e} exceeds {:e}",
            sample.residual, thresholds.divisor_residual
        )));
    }
    let n = tau.dim();
    let jet = theta_jet(&sample.z, tau, epsilon)?;
    let eta_before = eta_from_jet(&jet);
    if eta_before.norm() < thresholds.eta_floor * eta_scale(&jet) {
        return Err(ThetaError::SampleRejected(format!(
            "|eta(z)| = {:e} is too close to a ramification point",
            eta_before.norm()
        )));
    }
    let (z_image, tau_image) = symplectic_act(gamma, &sample.z, tau)?;
    let jet_image = theta_jet(&z_image, &tau_image, epsilon)?;
    if jet_image.value.norm() >= thresholds.transformed_residual * jet_image.growth {
        return Err(ThetaError::SampleRejected(format!(
            "transformed point is off the divisor (|theta| = {:e})",
            jet_image.value.norm()
        )));
    }
    let eta_after = eta_from_jet(&jet_image);
    let m = automorphy_matrix(gamma, tau)?;
    let q = automorphy_q(&sample.z, gamma, tau)?;
    let weight_twice = n as i32 + 5;
    let predicted =
        principal_det_power(m.determinant(), weight_twice) * q.powu(n as u32 + 1) * eta_before;
    Ok(AutomorphyReport::from_ratio(eta_after / predicted))
}

/// Generators used for sampling the theta group: `J`, the shears, and
/// elementary unimodular changes of basis (or `-I` when `n = 1`), each
/// checked for membership.
pub fn theta_group_generators(n: usize) -> Vec<SymplecticInteger> {
    let mut gens = vec![SymplecticInteger::j(n)];
    for j in 0..n {
        for k in j..n {
            gens.push(SymplecticInteger::shear(n, j, k).expect("valid shear"));
        }
    }
    if n == 1 {
        gens.push(
            SymplecticInteger::unimodular(DMatrix::from_element(1, 1, -1)).expect("unimodular"),
        );
    } else {
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    let mut u = DMatrix::<i64>::identity(n, n);
                    u[(j, k)] = 1;
                    gens.push(SymplecticInteger::unimodular(u).expect("unimodular"));
                }
            }
        }
    }
    let mut with_inverses: Vec<_> = gens.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
    with_inverses.dedup();
    with_inverses.retain(gamma12_member);
    with_inverses
}

/// A product of `1..=max_len` random generators.
pub fn random_word<R: Rng>(rng: &mut R, n: usize, max_len: usize) -> SymplecticInteger {
    let gens = theta_group_generators(n);
    let len = rng.random_range(1..=max_len.max(1));
    (0..len).fold(SymplecticInteger::identity(n), |acc, _| {
        acc.compose(&gens[rng.random_range(0..gens.len())])
    })
}

/// A fixed list of distinct theta-group elements including `J` and a shear.
pub fn reference_elements(n: usize) -> Vec<SymplecticInteger> {
    labeled_reference_elements(n)
        .into_iter()
        .map(|(_, g)| g)
        .collect()
}

/// [`reference_elements`] with short names; `T[j,k]` is
/// [`SymplecticInteger::shear`] and `U[0,1]` the unimodular change `1 + E_01`.
pub fn labeled_reference_elements(n: usize) -> Vec<(&'static str, SymplecticInteger)> {
    let j = SymplecticInteger::j(n);
    let t = SymplecticInteger::shear(n, 0, 0).expect("valid shear");
    let mut out = vec![
        ("J", j.clone()),
        ("T[0,0]", t.clone()),
        ("J*T[0,0]", j.compose(&t)),
        ("T[0,0]*J", t.compose(&j)),
        ("J*T[0,0]*J", j.compose(&t).compose(&j)),
        ("T[0,0]*J*T[0,0]^-1", t.compose(&j).compose(&t.inverse())),
    ];
    if n >= 2 {
        out.push((
            "T[0,1]",
            SymplecticInteger::shear(n, 0, 1).expect("valid shear"),
        ));
        let mut u = DMatrix::<i64>::identity(n, n);
        u[(0, 1)] = 1;
        out.push((
            "U[0,1]*J",
            SymplecticInteger::unimodular(u)
                .expect("unimodular")
                .compose(&j),
        ));
    }
    out.retain(|(_, g)| gamma12_member(g));
    out
}
