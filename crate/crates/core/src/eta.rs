//! Cofactor matrices and the gradient/hessian form
//! `eta = grad^t (hess)^c grad`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, ThetaError};
use crate::lattice::{theta_jet, ThetaJet};
use crate::siegel::SiegelMatrix;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest matrix size accepted by [`cofactor`].
pub const MAX_COFACTOR_SIZE: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn require_square(h: &ComplexMatrix) -> Result<usize> {
    let (rows, cols) = h.shape();
    if rows != cols {
        return Err(ThetaError::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// Determinant: Laplace expansion up to size 4, partial-pivoting LU beyond.
pub fn determinant(h: &ComplexMatrix) -> Result<Complex64> {
    let m = require_square(h)?;
    Ok(if m <= 4 { laplace_det(h) } else { lu_det(h) })
}

fn laplace_det(h: &ComplexMatrix) -> Complex64 {
    match h.nrows() {
        0 => ONE,
        1 => h[(0, 0)],
        2 => h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)],
        m => {
            let mut det = ZERO;
            for col in 0..m {
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                let minor = h.clone().remove_row(0).remove_column(col);
                det += h[(0, col)] * laplace_det(&minor) * sign;
            }
            det
        }
    }
}

fn lu_det(h: &ComplexMatrix) -> Complex64 {
    let m = h.nrows();
    let mut a = h.clone();
    let mut det = ONE;
    for k in 0..m {
        let pivot = (k..m)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .unwrap();
        if a[(pivot, k)] == ZERO {
            return ZERO;
        }
        if pivot != k {
            a.swap_rows(pivot, k);
            det = -det;
        }
        let p = a[(k, k)];
        det *= p;
        for i in k + 1..m {
            let factor = a[(i, k)] / p;
            if factor != ZERO {
                for j in k + 1..m {
                    let update = a[(k, j)] * factor;
                    a[(i, j)] -= update;
                }
            }
        }
    }
    det
}

/// `h` with row `row` and column `col` deleted.
pub fn minor_matrix(h: &ComplexMatrix, row: usize, col: usize) -> ComplexMatrix {
    h.clone().remove_row(row).remove_column(col)
}

/// Cofactor matrix `h^c_ij = (-1)^(i+j) det(h without row i, column j)`.
///
/// The cofactor of a `1 x 1` matrix is `[1]`.
pub fn cofactor(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = require_square(h)?;
    if m == 0 {
        return Err(ThetaError::Precondition("empty matrix".into()));
    }
    if m > MAX_COFACTOR_SIZE {
        return Err(ThetaError::MatrixTooLarge(m));
    }
    if m == 1 {
        return Ok(DMatrix::from_element(1, 1, ONE));
    }
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out[(i, j)] = determinant(&minor_matrix(h, i, j))? * sign;
        }
    }
    Ok(out)
}

/// `left^t h^c right` for row and column index vectors that may differ.
pub fn eta_form_pair(
    left: &[Complex64],
    h: &ComplexMatrix,
    right: &[Complex64],
) -> Result<Complex64> {
    let m = require_square(h)?;
    for v in [left, right] {
        if v.len() != m {
            return Err(ThetaError::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
    }
    let hc = cofactor(h)?;
    let mut acc = ZERO;
    for i in 0..m {
        let mut row = ZERO;
        for j in 0..m {
            row += hc[(i, j)] * right[j];
        }
        acc += left[i] * row;
    }
    Ok(acc)
}

/// `g^t h^c g`.
pub fn eta_form(g: &[Complex64], h: &ComplexMatrix) -> Result<Complex64> {
    eta_form_pair(g, h, g)
}

/// Both sides of `(m-1) eta(h) = sum_{k,l} (-1)^(k+l) h_kl eta(h^{k}_{l})`, where
/// `eta(h^{k}_{l})` pairs `g` without entry `k` on the left with `g` without
/// entry `l` on the right.
pub fn eta_recursion_sides(g: &[Complex64], h: &ComplexMatrix) -> Result<(Complex64, Complex64)> {
    let m = require_square(h)?;
    if m < 2 {
        return Err(ThetaError::Precondition(
            "the eta recursion needs size at least 2".into(),
        ));
    }
    if g.len() != m {
        return Err(ThetaError::DimensionMismatch {
            expected: m,
            found: g.len(),
        });
    }
    let lhs = eta_form(g, h)? * (m as f64 - 1.0);
    let drop = |skip: usize| -> Vec<Complex64> {
        g.iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, x)| *x)
            .collect()
    };
    let mut rhs = ZERO;
    for k in 0..m {
        let left = drop(k);
        for l in 0..m {
            if h[(k, l)] == ZERO {
                continue;
            }
            let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
            let sub = eta_form_pair(&left, &minor_matrix(h, k, l), &drop(l))?;
            rhs += h[(k, l)] * sub * sign;
        }
    }
    Ok((lhs, rhs))
}

/// `|(m-1) eta(h) - sum_{k,l} (-1)^(k+l) h_kl eta(h^{k}_{l})|`.
pub fn eta_recursion_residual(g: &[Complex64], h: &ComplexMatrix) -> Result<f64> {
    let (lhs, rhs) = eta_recursion_sides(g, h)?;
    Ok((lhs - rhs).norm())
}

/// `eta` at a point, with the divisor residual `|theta(z)|` recorded alongside.
#[derive(Clone, Debug, Serialize)]
pub struct EtaValue {
    pub value: Complex64,
    pub at: Vec<Complex64>,
    pub divisor_residual: f64,
    /// Natural magnitude of the terms of `eta`; see [`eta_scale`].
    pub scale: f64,
}

/// `1 + |grad|_max^2 |hess|_max^(n-1)`: the size of the individual terms in `eta`.
pub fn eta_scale(jet: &ThetaJet) -> f64 {
    let g = jet.gradient.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let h = jet.hessian.iter().map(|x| x.norm()).fold(0.0, f64::max);
    1.0 + g * g * h.powi(jet.dim() as i32 - 1)
}

/// `eta` assembled from an already computed jet.
pub fn eta_from_jet(jet: &ThetaJet) -> Complex64 {
    eta_form(&jet.gradient, &jet.hessian).expect("jet hessian is square and matches the gradient")
}

pub fn eta_point(z: &[Complex64], tau: &SiegelMatrix, epsilon: f64) -> Result<EtaValue> {
    let jet = theta_jet(z, tau, epsilon)?;
    Ok(EtaValue {
        value: eta_from_jet(&jet),
        at: z.to_vec(),
        divisor_residual: jet.value.norm(),
        scale: eta_scale(&jet),
    })
}

/// `diag(tau1, tau2)`: the period matrix of a product of two abelian varieties.
pub fn decomposable_tau(tau1: &SiegelMatrix, tau2: &SiegelMatrix) -> Result<SiegelMatrix> {
    tau1.block_diagonal(tau2)
}
