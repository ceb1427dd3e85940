//! Integer points inside a real ellipsoid `|U (m - c)| <= R`, `U` upper triangular.

use nalgebra::DMatrix;

/// Integer points of the ellipsoid, flattened row-major (`dim` entries per point).
///
/// The traversal depends only on `(factor, center, radius)`, and negating the
/// center yields exactly the negated point set.
pub(crate) fn ellipsoid_points(factor: &DMatrix<f64>, center: &[f64], radius: f64) -> Vec<i64> {
    let dim = center.len();
    let mut out = Vec::new();
    let mut m = vec![0i64; dim];
    descend(factor, center, radius * radius, dim - 1, &mut m, &mut out);
    out
}

fn descend(
    factor: &DMatrix<f64>,
    center: &[f64],
    budget: f64,
    level: usize,
    m: &mut [i64],
    out: &mut Vec<i64>,
) {
    let dim = center.len();
    let diag = factor[(level, level)];
    let mut shift = 0.0;
    for j in level + 1..dim {
        shift += factor[(level, j)] * (m[j] as f64 - center[j]);
    }
    let reach = budget.max(0.0).sqrt();
    let lo = (center[level] + (-shift - reach) / diag).ceil() as i64;
    let hi = (center[level] + (-shift + reach) / diag).floor() as i64;
    for value in lo..=hi {
        let t = diag * (value as f64 - center[level]) + shift;
        let rest = budget - t * t;
        if rest < 0.0 {
            continue;
        }
        m[level] = value;
        if level == 0 {
            out.extend_from_slice(m);
        } else {
            descend(factor, center, rest, level - 1, m, out);
        }
    }
}

/// Length of the shortest nonzero vector of the lattice `U Z^n`.
pub(crate) fn shortest_vector(factor: &DMatrix<f64>) -> f64 {
    let dim = factor.nrows();
    // Every basis vector is a candidate, so the minimum lies within this radius.
    let mut radius = f64::INFINITY;
    for i in 0..dim {
        radius = radius.min(factor.column(i).norm());
    }
    let points = ellipsoid_points(factor, &vec![0.0; dim], radius * (1.0 + 1e-9));
    points
        .chunks(dim)
        .filter(|p| p.iter().any(|&x| x != 0))
        .map(|p| {
            let v = nalgebra::DVector::from_iterator(dim, p.iter().map(|&x| x as f64));
            (factor * v).norm()
        })
        .fold(radius, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(factor: &DMatrix<f64>, center: &[f64], radius: f64, box_size: i64) -> Vec<Vec<i64>> {
        let dim = center.len();
        let mut found = Vec::new();
        let span = (2 * box_size + 1) as usize;
        for idx in 0..span.pow(dim as u32) {
            let mut rem = idx;
            let m: Vec<i64> = (0..dim)
                .map(|_| {
                    let v = (rem % span) as i64 - box_size;
                    rem /= span;
                    v
                })
                .collect();
            let w = nalgebra::DVector::from_iterator(
                dim,
                m.iter().zip(center).map(|(&a, &c)| a as f64 - c),
            );
            if (factor * w).norm() <= radius {
                found.push(m);
            }
        }
        found.sort();
        found
    }

    #[test]
    fn matches_brute_force_enumeration() {
        let factor = DMatrix::from_row_slice(3, 3, &[1.1, 0.3, -0.2, 0.0, 0.9, 0.4, 0.0, 0.0, 1.3]);
        let center = [0.3, -0.7, 0.45];
        let mut got: Vec<Vec<i64>> = ellipsoid_points(&factor, &center, 2.6)
            .chunks(3)
            .map(|c| c.to_vec())
            .collect();
        got.sort();
        assert_eq!(got, brute(&factor, &center, 2.6, 6));
    }

    #[test]
    fn negated_center_mirrors_points() {
        let factor = DMatrix::from_row_slice(2, 2, &[1.0, 0.35, 0.0, 0.8]);
        let mut plus: Vec<Vec<i64>> = ellipsoid_points(&factor, &[0.31, -1.2], 3.1)
            .chunks(2)
            .map(|c| c.iter().map(|x| -x).collect())
            .collect();
        let mut minus: Vec<Vec<i64>> = ellipsoid_points(&factor, &[-0.31, 1.2], 3.1)
            .chunks(2)
            .map(|c| c.to_vec())
            .collect();
        plus.sort();
        minus.sort();
        assert_eq!(plus, minus);
    }

    #[test]
    fn shortest_vector_of_skewed_lattice() {
        // Gram matrix [[1, 0.9], [0.9, 1]]: shortest vector is (1, -1) with length sqrt(0.2).
        let gram = DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        let factor = gram.cholesky().unwrap().l().transpose();
        assert!((shortest_vector(&factor) - 0.2f64.sqrt()).abs() < 1e-12);
    }
}
