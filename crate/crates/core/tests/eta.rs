use nalgebra::DMatrix;
use num_complex::{c64, Complex64};
use theta_eta::eta::eta_recursion_sides;
use theta_eta::sampling::{
    random_complex_matrix, random_complex_vector, random_tau, random_z, sample_rng,
};
use theta_eta::*;

const EPS: f64 = 1e-12;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (a.norm().max(b.norm()) + 1.0)
}

#[test]
fn adjugate_identity_on_random_four_by_four() {
    let mut rng = sample_rng(21, 0);
    for _ in 0..50 {
        let h = random_complex_matrix(&mut rng, 4, 4);
        let product = &h * cofactor(&h).unwrap().transpose();
        let det = h.determinant();
        let gap = (&product - DMatrix::identity(4, 4) * det).camax();
        assert!(gap < 1e-10 * (1.0 + det.norm()));
        assert!(rel(determinant(&h).unwrap(), det) < 1e-12);
    }
}

#[test]
fn large_determinants_agree_with_nalgebra() {
    let mut rng = sample_rng(22, 0);
    for m in 5..=8 {
        let h = random_complex_matrix(&mut rng, m, m);
        assert!(rel(determinant(&h).unwrap(), h.determinant()) < 1e-12);
    }
}

#[test]
fn eta_form_is_minus_the_bordered_determinant() {
    let mut rng = sample_rng(23, 0);
    for m in 1..=6 {
        for _ in 0..20 {
            let g = random_complex_vector(&mut rng, m);
            let h = random_complex_matrix(&mut rng, m, m);
            let mut b = DMatrix::zeros(m + 1, m + 1);
            b.view_mut((0, 0), (m, m)).copy_from(&h);
            for k in 0..m {
                b[(k, m)] = g[k];
                b[(m, k)] = g[k];
            }
            assert!(rel(eta_form(&g, &h).unwrap(), -b.determinant()) < 1e-10);
        }
    }
}

#[test]
fn eta_form_vanishes_on_symmetric_rank_two_updates() {
    let mut rng = sample_rng(24, 0);
    for m in 2..=6 {
        for _ in 0..20 {
            let g = random_complex_vector(&mut rng, m);
            let p = random_complex_vector(&mut rng, m);
            let h = DMatrix::from_fn(m, m, |i, j| p[i] * g[j] + p[j] * g[i]);
            let scale = 1.0 + h.camax().powi(m as i32 - 1);
            assert!(eta_form(&g, &h).unwrap().norm() < 1e-10 * scale);
        }
    }
}

#[test]
fn recursion_holds() {
    let mut rng = sample_rng(25, 0);
    for m in [2, 5] {
        for _ in 0..20 {
            let g = random_complex_vector(&mut rng, m);
            let h = random_complex_matrix(&mut rng, m, m);
            let (lhs, rhs) = eta_recursion_sides(&g, &h).unwrap();
            assert!(rel(lhs, rhs) < 1e-10);
            let residual = eta_recursion_residual(&g, &h).unwrap();
            assert!(residual < 1e-10 * (1.0 + lhs.norm().max(rhs.norm())));
        }
    }
    let g = random_complex_vector(&mut rng, 3);
    let zero = DMatrix::<Complex64>::zeros(3, 3);
    assert_eq!(eta_recursion_residual(&g, &zero).unwrap(), 0.0);
    let h1 = DMatrix::from_element(1, 1, c64(1.0, 0.0));
    assert!(eta_recursion_residual(&g[..1], &h1).is_err());
}

#[test]
fn eta_form_reports_bad_shapes() {
    let h = DMatrix::<Complex64>::zeros(2, 3);
    assert!(matches!(cofactor(&h), Err(ThetaError::NotSquare { .. })));
    let h = DMatrix::<Complex64>::zeros(3, 3);
    assert!(matches!(
        eta_form(&[c64(1.0, 0.0); 2], &h),
        Err(ThetaError::DimensionMismatch { .. })
    ));
    let big = DMatrix::<Complex64>::zeros(9, 9);
    assert_eq!(cofactor(&big).unwrap_err(), ThetaError::MatrixTooLarge(9));
}

#[test]
fn genus_one_eta_is_the_squared_derivative() {
    let mut rng = sample_rng(26, 0);
    let tau = random_tau(&mut rng, 1);
    let z = random_z(&mut rng, 1, 0.8);
    let jet = theta_jet(&z, &tau, EPS).unwrap();
    let eta = eta_point(&z, &tau, EPS).unwrap();
    assert_eq!(eta.value, jet.gradient[0] * jet.gradient[0]);
    assert_eq!(eta.divisor_residual, jet.value.norm());
}

#[test]
fn genus_two_eta_matches_the_expanded_formula() {
    let mut rng = sample_rng(27, 0);
    for _ in 0..10 {
        let tau = random_tau(&mut rng, 2);
        let z = random_z(&mut rng, 2, 0.8);
        let jet = theta_jet(&z, &tau, EPS).unwrap();
        let (g, h) = (&jet.gradient, &jet.hessian);
        let expanded =
            h[(0, 0)] * g[1] * g[1] - 2.0 * h[(0, 1)] * g[0] * g[1] + h[(1, 1)] * g[0] * g[0];
        let eta = eta_point(&z, &tau, EPS).unwrap().value;
        assert!((eta - expanded).norm() < 1e-12 * (eta.norm().max(expanded.norm()) + 1.0));
    }
}

/// Where the hessian is invertible, `eta = det(H) g^t H^-1 g`.
#[test]
fn inverse_formula_cross_check() {
    let mut rng = sample_rng(28, 0);
    for n in 2..=4 {
        let tau = random_tau(&mut rng, n);
        let z = random_z(&mut rng, n, 0.8);
        let jet = theta_jet(&z, &tau, EPS).unwrap();
        let h = jet.hessian.clone();
        let sv = h.clone().singular_values();
        if sv.max() / sv.min() > 1e6 {
            continue;
        }
        let g = nalgebra::DVector::from_column_slice(&jet.gradient);
        let alt = h.determinant() * (g.transpose() * h.try_inverse().unwrap() * &g)[(0, 0)];
        let eta = eta_point(&z, &tau, EPS).unwrap().value;
        assert!(rel(eta, alt) < 1e-9);
    }
}

#[test]
fn eta_vanishes_on_the_divisor_of_a_product() {
    let mut rng = sample_rng(29, 0);
    let t1 = random_tau(&mut rng, 2);
    let t2 = random_tau(&mut rng, 1);
    let block = decomposable_tau(&t1, &t2).unwrap();
    // Points where the genus-two factor vanishes: its odd half-periods, any last coordinate.
    for ch in ThetaCharacteristic::odd(2) {
        let mut z = half_period(&t1, &ch);
        z.push(random_z(&mut rng, 1, 0.5)[0]);
        let value = eta_point(&z, &block, EPS).unwrap();
        assert!(value.divisor_residual < 1e-10);
        assert!(value.value.norm() < 1e-8 * value.scale);
    }
}
