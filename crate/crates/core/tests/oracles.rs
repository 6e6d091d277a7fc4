//! Independent numerical oracles for the closed-form routines.

mod common;

use common::random_matrix;
use drem_track::linalg::{max_real_part, solve_lyapunov, spectrum};
use drem_track::regressor::filtered_derivative;
use drem_track::sim::{rk4_step, FnField};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `int_0^T e^{M^T t} W e^{M t} dt` by composite Simpson on a uniform grid,
/// with `T` long enough that the tail is below round-off.
fn gramian_by_quadrature(m: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let decay = -max_real_part(&spectrum(m));
    let t_end = 40.0 / decay;
    let steps = 8000;
    let h = t_end / steps as f64;
    let step_exp = (m * h).exp();
    let mut e = DMatrix::identity(m.nrows(), m.nrows());
    let mut acc = DMatrix::zeros(m.nrows(), m.nrows());
    for i in 0..=steps {
        let weight = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += e.transpose() * w * &e * weight;
        e = &e * &step_exp;
    }
    acc * (h / 3.0)
}

#[test]
fn lyapunov_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let n = rng.random_range(2..=5);
        let raw = random_matrix(&mut rng, n, n, 1.0);
        let shift = max_real_part(&spectrum(&raw)) + 0.5;
        let m = raw - DMatrix::identity(n, n) * shift;
        let g = random_matrix(&mut rng, n, n, 1.0);
        let w = &g * g.transpose() + DMatrix::identity(n, n);
        let x = solve_lyapunov(&m, &w).unwrap();
        let oracle = gramian_by_quadrature(&m, &w);
        let rel = (&x - &oracle).norm() / oracle.norm();
        assert!(rel <= 1e-6, "n = {n}: relative gap {rel:e}");
    }
}

/// Filtering a signal's known derivative through `1 / (p + lambda0)`,
/// integrated directly, matches the derivative-free reconstruction.
#[test]
fn filtered_derivative_tracks_filtered_true_derivative() {
    let lambda0 = 0.7;
    let v = |t: f64| DVector::from_vec(vec![(2.0 * t).sin() + 0.5, t * t * (-0.3 * t).exp()]);
    let dv = |t: f64| {
        DVector::from_vec(vec![
            2.0 * (2.0 * t).cos(),
            (2.0 * t - 0.3 * t * t) * (-0.3 * t).exp(),
        ])
    };
    // state: [v_l (2), filtered dv (2)], both from zero
    let field = FnField::new(4, move |t: f64, y: &[f64], dy: &mut [f64]| {
        let (vt, dvt) = (v(t), dv(t));
        for i in 0..2 {
            dy[i] = -lambda0 * y[i] + vt[i];
            dy[2 + i] = -lambda0 * y[2 + i] + dvt[i];
        }
    });
    let h = 1e-3;
    let mut y = vec![0.0; 4];
    let v0 = v(0.0);
    let mut worst = 0.0f64;
    for i in 0..20_000 {
        let t = i as f64 * h;
        y = rk4_step(&field, t, &y, h).unwrap();
        let t = (i + 1) as f64 * h;
        let recon = filtered_derivative(&v(t), &v0, &DVector::from_column_slice(&y[..2]), lambda0, t);
        worst = worst.max((recon - DVector::from_column_slice(&y[2..])).amax());
    }
    assert!(worst <= 1e-6, "worst gap {worst:e}");
}
