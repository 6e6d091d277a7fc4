use drem_track::estimator::{clamp_s, ie_threshold, reconstruct, s0_rhs};
use drem_track::linalg::{adjugate, determinant, lyapunov_residual, solve_lyapunov};
use drem_track::model::build_augmented;
use drem_track::regressor::mix;
use drem_track::{Exosystem, LtiPlant};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn mat(r: usize, c: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-scale..scale, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

fn square(max: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max).prop_flat_map(move |n| mat(n, n, scale))
}

/// Random Hurwitz matrix: a random matrix shifted left of its spectral abscissa.
fn hurwitz(max: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (square(max, 1.0), 0.1..2.0f64).prop_map(|(m, margin)| {
        let n = m.nrows();
        let abscissa = m.clone().complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        m - DMatrix::identity(n, n) * (abscissa + margin)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjugate_times_matrix_is_det_identity(f in square(8, 2.0)) {
        let k = f.nrows();
        let (adj, delta) = adjugate(&f);
        prop_assert!((delta - determinant(&f)).abs() <= 1e-12 * (1.0 + f.norm().powi(k as i32)));
        let scale = 1.0 + f.norm().powi(k as i32);
        prop_assert!((&f * &adj - DMatrix::identity(k, k) * delta).amax() <= 1e-12 * scale);
        prop_assert!((&adj * &f - DMatrix::identity(k, k) * delta).amax() <= 1e-12 * scale);
    }

    #[test]
    fn mixing_recovers_parameters_times_delta(f in mat(5, 5, 2.0), psi in mat(5, 3, 2.0)) {
        let hy = &f * &psi;
        let sig = mix(&f, &hy);
        let want = &psi * sig.delta;
        let (adj, _) = adjugate(&f);
        prop_assert!((&sig.mixed - &want).norm() <= 1e-10 * (want.norm() + adj.norm() * hy.norm()));
    }

    #[test]
    fn lyapunov_residual_is_small(m in hurwitz(6), g in square(6, 1.0)) {
        let n = m.nrows();
        let g = g.resize(n, n, 0.0);
        let w = &g * g.transpose() + DMatrix::identity(n, n);
        let x = solve_lyapunov(&m, &w).unwrap();
        prop_assert!(lyapunov_residual(&m, &x, &w) <= 1e-10 * (m.norm() * x.norm() + w.norm()));
        prop_assert!((&x - x.transpose()).amax() == 0.0);
        prop_assert!(x.clone().symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn augmented_blocks_round_trip(
        (a, b, c, d) in (1..=3usize, 1..=2usize).prop_flat_map(|(n, m)| (mat(n, n, 2.0), mat(n, m, 2.0), mat(n, n, 2.0), mat(n, n, 2.0)))
    ) {
        let n = a.nrows();
        let plant = LtiPlant::new(a.clone(), b.clone(), c.clone()).unwrap();
        let exo = Exosystem::autonomous(d.clone()).unwrap();
        let m = b.ncols();
        let aug = build_augmented(&plant, &exo, &DMatrix::identity(n, n), &DMatrix::identity(m, m), 0.0, None).unwrap();
        let blk = aug.blocks();
        prop_assert_eq!(&blk.a, &a);
        prop_assert_eq!(&blk.b, &b);
        prop_assert_eq!(&blk.d, &d);
        prop_assert!((&blk.c - &c).amax() <= 1e-14 * (1.0 + a.amax() + c.amax() + d.amax()));
        prop_assert!(aug.a.view((n, 0), (n, n)).iter().all(|v| *v == 0.0));
        prop_assert!(aug.b.rows(n, n).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn augmented_matrix_is_linear_in_a_c_d(
        (a1, c1, d1, a2, c2, d2, b) in (1..=3usize).prop_flat_map(|n| (
            mat(n, n, 2.0), mat(n, n, 2.0), mat(n, n, 2.0),
            mat(n, n, 2.0), mat(n, n, 2.0), mat(n, n, 2.0), mat(n, 1, 2.0),
        ))
    ) {
        let n = a1.nrows();
        let build = |a: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>| {
            let plant = LtiPlant::new(a.clone(), b.clone(), c.clone()).unwrap();
            let exo = Exosystem::autonomous(d.clone()).unwrap();
            build_augmented(&plant, &exo, &DMatrix::identity(n, n), &DMatrix::identity(1, 1), 0.0, None).unwrap().a
        };
        let sum = build(&(&a1 + &a2), &(&c1 + &c2), &(&d1 + &d2));
        let parts = build(&a1, &c1, &d1) + build(&a2, &c2, &d2);
        prop_assert!((sum - parts).amax() <= 1e-13);
    }

    #[test]
    fn stacked_transpose_round_trip(
        (a, b, c) in (1..=3usize, 1..=2usize).prop_flat_map(|(n, m)| (mat(n, n, 5.0), mat(n, m, 5.0), mat(n, n, 5.0)))
    ) {
        let (n, m) = (a.nrows(), b.ncols());
        let plant = LtiPlant::new(a, b, c).unwrap();
        for with_c in [false, true] {
            let stacked = plant.stacked_transpose(with_c);
            prop_assert_eq!(stacked.nrows(), if with_c { 2 * n + m } else { n + m });
            let back = LtiPlant::from_stacked_transpose(&stacked, n, m).unwrap();
            prop_assert_eq!(back.a(), plant.a());
            prop_assert_eq!(back.b(), plant.b());
        }
    }

    /// Along the exact estimator path `Theta = s0 Theta0 + (1 - s0) Theta*`,
    /// reconstruction is exact once `s0 <= 1 - sigma`; before that the clamp
    /// holds `s` at `1 - sigma`.
    #[test]
    fn reconstruction_is_exact_after_switch(
        (theta_star, theta0) in (1..=5usize, 1..=3usize).prop_flat_map(|(k, n)| (mat(k, n, 5.0), mat(k, n, 5.0))),
        s0 in 1e-6..1.0f64,
        sigma in 0.05..0.95f64,
    ) {
        let theta = &theta0 * s0 + &theta_star * (1.0 - s0);
        let s = clamp_s(s0, sigma).unwrap();
        prop_assert!(s <= 1.0 - sigma && s <= s0);
        let tf = reconstruct(&theta, &theta0, s);
        if s0 <= 1.0 - sigma {
            let scale = 1.0 + theta_star.amax() + theta0.amax();
            prop_assert!((&tf - &theta_star).amax() <= 1e-12 * scale / sigma);
        } else {
            prop_assert_eq!(s, 1.0 - sigma);
        }
    }

    #[test]
    fn threshold_matches_closed_form_s0(alpha in 1e-3..1e3f64, sigma in 0.01..0.99f64) {
        let th = ie_threshold(alpha, sigma).unwrap();
        prop_assert!(((-alpha * th).exp() - (1.0 - sigma)).abs() <= 1e-12);
    }

    #[test]
    fn s0_derivative_is_nonpositive(alpha in 1e-3..1e3f64, s0 in 0.0..1.0f64, delta in -10.0..10.0f64) {
        let d = s0_rhs(alpha, s0, delta);
        prop_assert!(d <= 0.0);
        prop_assert!((d + alpha * delta * delta * s0).abs() <= 1e-12 * (1.0 + d.abs()));
    }
}
