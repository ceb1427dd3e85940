//! Points of the Siegel upper half space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, ThetaError};
use crate::lattice::enumerate;

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 6;

/// A complex symmetric `n x n` matrix with positive-definite imaginary part.
///
/// Construction caches an upper-triangular factor `U` of `Y = Im tau`
/// (`U^t U = Y`), the inverse of `Y`, its smallest eigenvalue and the length of
/// the shortest nonzero vector of `U Z^n`. These drive the truncation radii.
#[derive(Clone, Debug)]
pub struct SiegelMatrix {
    entries: DMatrix<Complex64>,
    im_factor: DMatrix<f64>,
    im_inverse: DMatrix<f64>,
    min_eigenvalue: f64,
    shortest_vector: f64,
}

impl SiegelMatrix {
    /// Validates and symmetrizes `entries`.
    ///
    /// Off-diagonal pairs that differ by more than `1e-12 * (1 + max |tau_ij|)`
    /// are rejected; smaller gaps are averaged away so the stored matrix is
    /// exactly symmetric.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(ThetaError::NotSquare { rows, cols });
        }
        let n = rows;
        if n == 0 || n > MAX_DIMENSION {
            return Err(ThetaError::UnsupportedDimension(n));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(ThetaError::NonFinite);
        }
        let magnitude = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut entries = entries;
        for i in 0..n {
            for j in i + 1..n {
                let gap = (entries[(i, j)] - entries[(j, i)]).norm();
                if gap > 1e-12 * (1.0 + magnitude) {
                    return Err(ThetaError::NotSymmetric {
                        row: i,
                        col: j,
                        gap,
                    });
                }
                let mean = (entries[(i, j)] + entries[(j, i)]) * 0.5;
                entries[(i, j)] = mean;
                entries[(j, i)] = mean;
            }
        }

        let im = entries.map(|z| z.im);
        let min_eigenvalue = im.clone().symmetric_eigenvalues().min();
        if !(min_eigenvalue > 0.0) {
            return Err(ThetaError::NotPositiveDefinite);
        }
        let chol = im
            .clone()
            .cholesky()
            .ok_or(ThetaError::NotPositiveDefinite)?;
        let im_factor = chol.l().transpose();
        if (0..n).any(|i| !(im_factor[(i, i)] > 0.0)) {
            return Err(ThetaError::NotPositiveDefinite);
        }
        let im_inverse = chol.inverse();
        let shortest_vector = enumerate::shortest_vector(&im_factor);
        Ok(Self {
            entries,
            im_factor,
            im_inverse,
            min_eigenvalue,
            shortest_vector,
        })
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(ThetaError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// One-dimensional `tau` in the upper half plane.
    pub fn scalar(tau: Complex64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, tau))
    }

    /// `scale * i * I_n`.
    pub fn imaginary_identity(n: usize, scale: f64) -> Result<Self> {
        Self::new(DMatrix::from_diagonal_element(
            n,
            n,
            Complex64::new(0.0, scale),
        ))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn imag(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.im)
    }

    /// Upper-triangular `U` with `U^t U = Im tau`.
    pub fn im_factor(&self) -> &DMatrix<f64> {
        &self.im_factor
    }

    pub fn im_inverse(&self) -> &DMatrix<f64> {
        &self.im_inverse
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn shortest_vector(&self) -> f64 {
        self.shortest_vector
    }

    /// `(Im tau)^-1 y`.
    pub fn solve_imag(&self, y: &[f64]) -> Vec<f64> {
        let v = &self.im_inverse * DVector::from_column_slice(y);
        v.iter().copied().collect()
    }

    /// Exponent of the growth factor, `pi y^t (Im tau)^-1 y` with `y = Im z`.
    pub fn growth_exponent(&self, z: &[Complex64]) -> f64 {
        let y: Vec<f64> = z.iter().map(|w| w.im).collect();
        let s = self.solve_imag(&y);
        std::f64::consts::PI * y.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `tau u + v`.
    pub fn lattice_point(&self, u: &[i64], v: &[i64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(v[i] as f64, 0.0);
                for (j, &uj) in u.iter().enumerate() {
                    acc += self.entries[(i, j)] * uj as f64;
                }
                acc
            })
            .collect()
    }

    /// Coordinates `(p, q)` with `z = tau p + q`, `p, q` real.
    pub fn lattice_coordinates(&self, z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let y: Vec<f64> = z.iter().map(|w| w.im).collect();
        let p = self.solve_imag(&y);
        let n = self.dim();
        let q = (0..n)
            .map(|i| z[i].re - (0..n).map(|j| self.entries[(i, j)].re * p[j]).sum::<f64>())
            .collect();
        (p, q)
    }

    /// Reduces `z` into the fundamental cell by subtracting `tau u + v`, where
    /// `u, v` are the lattice coordinates rounded half-to-even. Returns the
    /// reduced point together with `(u, v)`.
    pub fn reduce(&self, z: &[Complex64]) -> (Vec<Complex64>, Vec<i64>, Vec<i64>) {
        let (p, q) = self.lattice_coordinates(z);
        let u: Vec<i64> = p.iter().map(|x| x.round_ties_even() as i64).collect();
        let v: Vec<i64> = q.iter().map(|x| x.round_ties_even() as i64).collect();
        let shift = self.lattice_point(&u, &v);
        let reduced = z.iter().zip(&shift).map(|(a, b)| a - b).collect();
        (reduced, u, v)
    }

    /// Block-diagonal matrix `diag(self, other)`.
    pub fn block_diagonal(&self, other: &SiegelMatrix) -> Result<SiegelMatrix> {
        let (k, l) = (self.dim(), other.dim());
        let mut entries = DMatrix::zeros(k + l, k + l);
        entries.view_mut((0, 0), (k, k)).copy_from(&self.entries);
        entries.view_mut((k, k), (l, l)).copy_from(&other.entries);
        SiegelMatrix::new(entries)
    }
}
