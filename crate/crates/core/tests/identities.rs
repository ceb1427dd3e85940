use num_complex::{c64, Complex64};
use theta_eta::divisor::random_divisor_sample;
use theta_eta::identities::*;
use theta_eta::sampling::{random_genus_one_tau, sample_rng};
use theta_eta::*;

const EPS: f64 = 1e-12;

fn generic_tau() -> SiegelMatrix {
    Fixtures::builtin().get("generic2").unwrap()
}

fn samples(tau: &SiegelMatrix, seed: u64, count: usize) -> Vec<DivisorSample> {
    let mut rng = sample_rng(seed, 0);
    (0..count)
        .map(|_| random_divisor_sample(&mut rng, tau, EPS, 8).unwrap())
        .collect()
}

fn near(tau: &SiegelMatrix, point: &[Complex64], delta: f64) -> DivisorSample {
    let jet = theta_jet(point, tau, EPS).unwrap();
    let s = DivisorSample::from_jet(point.to_vec(), &jet);
    let start: Vec<Complex64> = point
        .iter()
        .zip(&s.tangent[0])
        .map(|(a, t)| a + t * delta)
        .collect();
    let p = project_to_divisor(&start, tau, EPS).unwrap();
    let jet = theta_jet(&p, tau, EPS).unwrap();
    DivisorSample::from_jet(p, &jet)
}

#[test]
fn jacobi_derivative_formula() {
    for t in [c64(0.0, 1.0), c64(0.5, 2.0), c64(-0.3, 0.7)] {
        let tau = SiegelMatrix::scalar(t).unwrap();
        assert!(jacobi_derivative_residual(&tau, EPS).unwrap() < 1e-10);
        let shifted = SiegelMatrix::scalar(t + 2.0).unwrap();
        assert!(jacobi_derivative_residual(&shifted, EPS).unwrap() < 1e-10);
    }
    let mut rng = sample_rng(51, 0);
    for _ in 0..20 {
        let tau = random_genus_one_tau(&mut rng);
        assert!(jacobi_derivative_residual(&tau, EPS).unwrap() < 1e-10);
    }
    assert_eq!(
        jacobi_derivative_residual(&generic_tau(), EPS).unwrap_err(),
        ThetaError::DimensionMismatch {
            expected: 1,
            found: 2
        }
    );
}

#[test]
fn even_nullwerte_product_values() {
    let tau = Fixtures::builtin().get("iI2+0.1S").unwrap();
    let product = even_nullwerte_product(&tau, EPS).unwrap();
    assert!(
        (product - c64(-0.005022481694130298, 0.0)).norm() < 1e-12,
        "{product}"
    );
    let block = Fixtures::builtin().get("block").unwrap();
    assert!(even_nullwerte_product(&block, EPS).unwrap().norm() < 1e-12);
    assert!(is_decomposable(&block, EPS).unwrap());
    assert!(!is_decomposable(&tau, EPS).unwrap());
    // Integer translations only permute the even constants up to eighth roots of unity.
    let generic = generic_tau();
    let zero = [c64(0.0, 0.0); 2];
    let (_, moved) =
        symplectic_act(&SymplecticInteger::shear(2, 0, 1).unwrap(), &zero, &generic).unwrap();
    let a = even_nullwerte_product(&generic, EPS).unwrap().norm();
    let b = even_nullwerte_product(&moved, EPS).unwrap().norm();
    assert!((a - b).abs() < 1e-10 * a.max(1.0));
}

#[test]
fn weierstrass_points_are_the_odd_half_periods() {
    let tau = generic_tau();
    let points = weierstrass_points(&tau, EPS).unwrap();
    assert_eq!(points.len(), 6);
    for p in &points {
        assert!(p.theta_abs < 1e-10 && p.eta_abs < 1e-8 * p.eta_scale);
        // -z is congruent to z.
        let minus: Vec<Complex64> = p.z.iter().map(|x| -x).collect();
        let diff: Vec<Complex64> = p.z.iter().zip(&minus).map(|(a, b)| a - b).collect();
        assert!(tau.reduce(&diff).0.iter().all(|x| x.norm() < 1e-12));
    }
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let diff: Vec<Complex64> = p.z.iter().zip(&q.z).map(|(a, b)| a - b).collect();
            assert!(tau.reduce(&diff).0.iter().map(|x| x.norm()).sum::<f64>() > 1e-3);
        }
    }
    let block = Fixtures::builtin().get("block").unwrap();
    assert_eq!(
        weierstrass_points(&block, EPS).unwrap_err(),
        ThetaError::Decomposable
    );
}

#[test]
fn wronskian_vanishes_only_at_weierstrass_points() {
    let tau = generic_tau();
    for s in samples(&tau, 52, 20) {
        assert!(wronskian_value(&s, &tau, EPS).unwrap().value.norm() > 1e-6);
    }
    let hp = half_period(&tau, &ThetaCharacteristic::odd(2)[0]);
    let mut last = f64::INFINITY;
    for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
        let w = wronskian_value(&near(&tau, &hp, delta), &tau, EPS)
            .unwrap()
            .value
            .norm();
        assert!(w < last);
        last = w;
    }
    assert!(last < 1e-3);
}

#[test]
fn wronskian_chart_agreement() {
    let tau = generic_tau();
    for s in samples(&tau, 53, 20) {
        let jet = theta_jet(&s.z, &tau, EPS).unwrap();
        let j = if jet.gradient[0].norm() >= jet.gradient[1].norm() {
            0
        } else {
            1
        };
        let chosen = wronskian_value(&s, &tau, EPS).unwrap();
        assert_eq!(chosen.chart, j);
        let from_curve = wronskian_from_curve(&s, &tau, j, EPS).unwrap();
        let gap = (chosen.value - from_curve.value).norm() / (1.0 + chosen.value.norm());
        assert!(gap < 1e-8, "{gap:e}");
    }
}

#[test]
fn f_values_agree() {
    let tau = generic_tau();
    for s in samples(&tau, 54, 30) {
        let f = f_value(&s, &tau, EPS).unwrap();
        assert!(f.f_residual < 1e-9, "{f:?}");
        assert!(f.pq_residual < 1e-8, "{f:?}");
        assert!(f.first_order < 1e-9, "{f:?}");
    }
}

#[test]
fn wronskian_squared_eta_is_f_cubed_in_both_charts() {
    let tau = generic_tau();
    for s in samples(&tau, 55, 100) {
        assert!(wronskian_identity_residual(&s, &tau, EPS).unwrap() < 1e-7);
        let jet = theta_jet(&s.z, &tau, EPS).unwrap();
        for j in 0..2 {
            if jet.gradient[j].norm() > 0.1 * jet.gradient_norm() {
                assert!(wronskian_identity_residual_in_chart(&s, &tau, j, EPS).unwrap() < 1e-7);
            }
        }
    }
}

#[test]
fn chart_failure_when_denominator_vanishes() {
    // On a product, the component {z_0 = odd half-period} has d/dz_1 theta = 0.
    let block = Fixtures::builtin().get("block").unwrap();
    let t0 = block.get(0, 0);
    let z = [(1.0 + t0) / 2.0, c64(0.17, 0.05)];
    let jet = theta_jet(&z, &block, EPS).unwrap();
    let s = DivisorSample::from_jet(z.to_vec(), &jet);
    assert_eq!(
        wronskian_value_in_chart(&s, &block, 1, EPS).unwrap_err(),
        ThetaError::ChartFailure
    );
    assert!(wronskian_value_in_chart(&s, &block, 0, EPS).is_ok());
    assert!(matches!(
        wronskian_value_in_chart(&s, &block, 2, EPS).unwrap_err(),
        ThetaError::Precondition(_)
    ));
}

#[test]
fn product_formula_has_constant_sign() {
    let tau = generic_tau();
    let nullwerte = even_nullwerte_product(&tau, EPS).unwrap();
    let mut signs = Vec::new();
    for s in samples(&tau, 57, 50) {
        match genus2_product_formula_with(&s, &tau, nullwerte, EPS) {
            Ok(p) => {
                assert!(p.residual < 1e-6, "{p:?}");
                signs.push(p.sign);
            }
            Err(ThetaError::SampleRejected(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(signs.len() >= 45);
    assert!(signs.iter().all(|&x| x == signs[0]));
}

#[test]
fn product_formula_near_a_product() {
    let block = Fixtures::builtin().get("block").unwrap();
    let mut rows = block.entries().clone();
    rows[(0, 1)] = c64(0.0, 1e-3);
    rows[(1, 0)] = c64(0.0, 1e-3);
    let tau = SiegelMatrix::new(rows).unwrap();
    assert!(!is_decomposable(&tau, EPS).unwrap());
    for s in samples(&tau, 58, 10) {
        if let Ok(p) = genus2_product_formula(&s, &tau, EPS) {
            assert!(p.residual < 1e-5, "{p:?}");
        }
    }
}
