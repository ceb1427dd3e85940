use num_complex::{c64, Complex64};
use theta_eta::divisor::{random_divisor_sample, tangent_basis};
use theta_eta::sampling::{random_direction, random_tau, sample_rng};
use theta_eta::*;

const EPS: f64 = 1e-12;

fn generic_tau() -> SiegelMatrix {
    Fixtures::builtin().get("generic2").unwrap()
}

fn lattice_gap(tau: &SiegelMatrix, a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    tau.reduce(&diff)
        .0
        .iter()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[test]
fn genus_one_divisor_is_the_odd_half_period() {
    let mut rng = sample_rng(41, 0);
    for _ in 0..10 {
        let tau = random_tau(&mut rng, 1);
        let t = tau.get(0, 0);
        let s = divisor_solve(&tau, &[c64(0.0, 0.0)], &[c64(1.0, 0.0)], EPS).unwrap();
        assert!(s.residual < 1e-10);
        assert!(lattice_gap(&tau, &s.z, &[(1.0 + t) / 2.0]) < 1e-9);
    }
}

#[test]
fn half_periods() {
    let tau = generic_tau();
    assert_eq!(
        half_period(&tau, &ThetaCharacteristic::zero(2)),
        vec![c64(0.0, 0.0); 2]
    );
    let t = c64(0.3, 1.7);
    let tau1 = SiegelMatrix::scalar(t).unwrap();
    let ch = ThetaCharacteristic::new(&[0.5], &[0.5]).unwrap();
    assert!((half_period(&tau1, &ch)[0] - (t + 1.0) / 2.0).norm() < 1e-15);
    for ch in ThetaCharacteristic::odd(2) {
        assert!(theta(&half_period(&tau, &ch), &tau, EPS).unwrap().norm() < 1e-10);
    }
}

#[test]
fn solving_from_an_odd_half_period_stays_there() {
    let tau = generic_tau();
    let mut rng = sample_rng(42, 0);
    for ch in ThetaCharacteristic::odd(2) {
        let hp = half_period(&tau, &ch);
        let s = divisor_solve(&tau, &hp, &random_direction(&mut rng, 2), EPS).unwrap();
        assert!(lattice_gap(&tau, &s.z, &hp) < 1e-10);
    }
}

#[test]
fn samples_satisfy_their_invariants() {
    let mut rng = sample_rng(43, 0);
    for n in 2..=4 {
        let tau = random_tau(&mut rng, n);
        for _ in 0..10 {
            let s = random_divisor_sample(&mut rng, &tau, EPS, 8).unwrap();
            assert!(s.residual < 1e-10);
            assert_eq!(s.tangent.len(), n - 1);
            assert!(s.orthogonality_defect() < 1e-9);
            assert!(s.is_smooth(1e-6));
        }
    }
}

#[test]
fn solve_is_deterministic() {
    let tau = generic_tau();
    let anchor = [c64(0.3, 0.2), c64(0.1, -0.4)];
    let dir = [c64(0.6, 0.0), c64(0.0, 0.8)];
    let a = divisor_solve(&tau, &anchor, &dir, EPS).unwrap();
    let b = divisor_solve(&tau, &anchor, &dir, EPS).unwrap();
    assert_eq!(a.z, b.z);
}

#[test]
fn reports_failure_when_no_start_converges() {
    let tau = generic_tau();
    let opts = DivisorOptions {
        max_iterations: 1,
        newton_tolerance: 1e-30,
        ..DivisorOptions::default()
    };
    let err = divisor_solve_with(
        &tau,
        &[c64(0.1, 0.1), c64(0.2, 0.0)],
        &[c64(1.0, 0.0), c64(0.0, 0.0)],
        EPS,
        &opts,
    )
    .unwrap_err();
    assert!(matches!(err, ThetaError::NoConvergence { starts: 25 }));
}

#[test]
fn gauss_map_is_stable_and_even() {
    let tau = generic_tau();
    let mut rng = sample_rng(44, 0);
    for _ in 0..10 {
        let s = random_divisor_sample(&mut rng, &tau, EPS, 8).unwrap();
        let g = gauss_map(&s).unwrap();
        assert!(g.iter().any(|x| *x == c64(1.0, 0.0)));
        // Recompute with a tighter epsilon.
        let jet = theta_jet(&s.z, &tau, EPS / 10.0).unwrap();
        let fine = gauss_map(&DivisorSample::from_jet(s.z.clone(), &jet)).unwrap();
        assert!(g.iter().zip(&fine).all(|(a, b)| (a - b).norm() < 1e-8));
        // The gradient is odd, so -z gives the same projective point.
        let minus: Vec<Complex64> = s.z.iter().map(|x| -x).collect();
        let jet = theta_jet(&minus, &tau, EPS).unwrap();
        let opposite = gauss_map(&DivisorSample::from_jet(minus, &jet)).unwrap();
        assert!(g.iter().zip(&opposite).all(|(a, b)| (a - b).norm() < 1e-8));
    }
}

#[test]
fn projection_preserves_tangent_orthogonality() {
    let tau = generic_tau();
    let mut rng = sample_rng(45, 0);
    for _ in 0..10 {
        let s = random_divisor_sample(&mut rng, &tau, EPS, 8).unwrap();
        let moved: Vec<Complex64> =
            s.z.iter()
                .zip(&s.tangent[0])
                .map(|(a, t)| a + t * 1e-3)
                .collect();
        let p = project_to_divisor(&moved, &tau, EPS).unwrap();
        let jet = theta_jet(&p, &tau, EPS).unwrap();
        let projected = DivisorSample::from_jet(p, &jet);
        assert!(projected.residual < 1e-12);
        assert!(projected.orthogonality_defect() < 1e-8);
    }
}

#[test]
fn ramification_vanishes_at_half_periods_and_not_elsewhere() {
    let tau = generic_tau();
    let mut rng = sample_rng(46, 0);
    for _ in 0..20 {
        let s = random_divisor_sample(&mut rng, &tau, EPS, 8).unwrap();
        let r = gauss_ramification_residual(&s, &tau, 1e-4, EPS).unwrap();
        assert!(
            r.eta_relative() > 1e-6 && r.dgamma_relative() > 1e-6,
            "{r:?}"
        );
    }
    for ch in ThetaCharacteristic::odd(2) {
        let hp = half_period(&tau, &ch);
        let jet = theta_jet(&hp, &tau, EPS).unwrap();
        let s = DivisorSample::from_jet(hp.clone(), &jet);
        let r = gauss_ramification_residual(&s, &tau, 1e-4, EPS).unwrap();
        assert!(
            r.eta_relative() < 1e-8 && r.dgamma_relative() < 1e-4,
            "{ch}: {r:?}"
        );
        // Approaching along the curve, both shrink together.
        let mut last = (f64::INFINITY, f64::INFINITY);
        for delta in [1e-1, 1e-2, 1e-3] {
            let start: Vec<Complex64> = hp
                .iter()
                .zip(&s.tangent[0])
                .map(|(a, t)| a + t * delta)
                .collect();
            let p = project_to_divisor(&start, &tau, EPS).unwrap();
            let jet = theta_jet(&p, &tau, EPS).unwrap();
            let r = gauss_ramification_residual(&DivisorSample::from_jet(p, &jet), &tau, 1e-4, EPS)
                .unwrap();
            assert!(r.eta_relative() < last.0 && r.dgamma_relative() < last.1);
            last = (r.eta_relative(), r.dgamma_relative());
        }
    }
}

#[test]
fn ramification_everywhere_on_a_product() {
    let a = SiegelMatrix::scalar(c64(0.1, 1.2)).unwrap();
    let b = SiegelMatrix::scalar(c64(-0.2, 0.9)).unwrap();
    let tau = decomposable_tau(&a, &b).unwrap();
    let mut rng = sample_rng(47, 0);
    for _ in 0..10 {
        let s = random_divisor_sample(&mut rng, &tau, EPS, 8).unwrap();
        let r = gauss_ramification_residual(&s, &tau, 1e-4, EPS).unwrap();
        assert!(r.eta_relative() < 1e-8, "{r:?}");
    }
}

#[test]
fn ramification_needs_genus_two_or_three() {
    let tau = random_tau(&mut sample_rng(48, 0), 4);
    let s = random_divisor_sample(&mut sample_rng(48, 1), &tau, EPS, 8).unwrap();
    assert_eq!(
        gauss_ramification_residual(&s, &tau, 1e-4, EPS).unwrap_err(),
        ThetaError::UnsupportedDimension(4)
    );
    let tau3 = random_tau(&mut sample_rng(48, 2), 3);
    let s3 = random_divisor_sample(&mut sample_rng(48, 3), &tau3, EPS, 8).unwrap();
    assert!(gauss_ramification_residual(&s3, &tau3, 1e-4, EPS).is_ok());
}

#[test]
fn tangent_basis_spans_the_kernel() {
    let g = [c64(0.3, 0.1), c64(-1.2, 0.4), c64(0.5, 0.5)];
    let basis = tangent_basis(&g);
    assert_eq!(basis.len(), 2);
    for t in &basis {
        let dot: Complex64 = g.iter().zip(t).map(|(a, b)| a * b).sum();
        assert!(dot.norm() < 1e-15);
    }
}
