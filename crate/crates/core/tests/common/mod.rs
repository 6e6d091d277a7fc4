//! Shared generators for the integration tests.
#![allow(dead_code)]

use drem_track::identification::SyntheticRegression;
use drem_track::linalg::spectrum;
use drem_track::lqr::{cost, find_stabilizing_gain, is_stabilizing, DiscountedLqrProblem};
use drem_track::model::{build_augmented, ExcitationChannel, ExcitationSpec, Sinusoid};
use drem_track::regressor::FilterBank;
use drem_track::sim::{TimeSeries, Trajectory};
use drem_track::{Exosystem, LtiPlant, ScenarioConfig};
use nalgebra::DMatrix;
use rand::Rng;

pub fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_path(format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale))
}

pub struct SyntheticCase {
    pub reg: SyntheticRegression,
    pub theta0: DMatrix<f64>,
    pub sigma: f64,
    pub traj: Trajectory,
}

/// A random regression with `k <= 5` whose learning rate is tuned so that
/// `s0` reaches `exp(-10)` by mid-horizon, which guarantees interval
/// excitation for `sigma = 0.9`.
pub fn random_synthetic(rng: &mut impl Rng) -> SyntheticCase {
    loop {
        if let Some(case) = try_synthetic(rng) {
            return case;
        }
    }
}

/// One draw; `None` when the excitation is so weak that reaching IE would
/// need `alpha > 1e6`, where round-off in `mixed - delta Theta*` dominates.
fn try_synthetic(rng: &mut impl Rng) -> Option<SyntheticCase> {
    let k = rng.random_range(1..=5);
    let n = rng.random_range(1..=3);
    let theta_star = random_matrix(rng, k, n, 2.0);
    let theta0 = random_matrix(rng, k, n, 5.0);
    let psi_z = ExcitationSpec {
        channels: (0..k)
            .map(|_| ExcitationChannel {
                offset: rng.random_range(-1.0..1.0),
                terms: vec![Sinusoid {
                    amplitude: rng.random_range(0.5..2.0),
                    omega: rng.random_range(0.3..3.0),
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                }],
            })
            .collect(),
    };
    let mut lambdas: Vec<f64> = Vec::new();
    while lambdas.len() < k {
        let l: f64 = rng.random_range(0.2..3.0);
        if lambdas.iter().all(|x| (x - l).abs() > 0.05) {
            lambdas.push(l);
        }
    }
    let bank = FilterBank::new(1.0, lambdas).unwrap();
    let (t_end, h, every) = (20.0, 0.01, 10);

    let probe = SyntheticRegression::new(theta_star.clone(), psi_z.clone(), bank.clone(), 1.0).unwrap();
    let series = probe.run(&theta0, t_end / 2.0, h, 1000).unwrap().series;
    let half = series.last("int_delta_sq").unwrap();
    let alpha = 10.0 / half;
    if !(alpha <= 1e6) {
        return None;
    }

    let reg = SyntheticRegression::new(theta_star, psi_z, bank, alpha).unwrap();
    let traj = reg.run(&theta0, t_end, h, every).unwrap();
    Some(SyntheticCase {
        reg,
        theta0,
        sigma: 0.9,
        traj,
    })
}

/// Counts logged samples where `|err_i_j|` grew by more than `tol`; `None`
/// if the series has no error columns with this prefix.
pub fn monotone_violations(series: &TimeSeries, prefix: &str, tol: f64) -> Option<usize> {
    let pat = format!("{prefix}err_");
    let cols: Vec<&str> = series.names().iter().filter(|n| n.starts_with(&pat)).map(String::as_str).collect();
    if cols.is_empty() {
        return None;
    }
    Some(
        cols.iter()
            .map(|c| {
                series
                    .column(c)
                    .unwrap()
                    .windows(2)
                    .filter(|w| w[1].abs() > w[0].abs() + tol)
                    .count()
            })
            .sum(),
    )
}

/// Random discounted tracking problem with augmented dimension `2n <= 6`,
/// `m <= 2`, a Hurwitz-after-discount exosystem, and a stabilizing `K0`.
pub fn random_problem(rng: &mut impl Rng, gamma: f64) -> (DiscountedLqrProblem, DMatrix<f64>) {
    loop {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=2);
        let plant = LtiPlant::new(
            random_matrix(rng, n, n, 1.5),
            random_matrix(rng, n, m, 1.0),
            random_matrix(rng, n, n, 0.5),
        )
        .unwrap();
        let mut d = random_matrix(rng, n, n, 1.0);
        let top = spectrum(&d).iter().map(|e| e.0).fold(f64::MIN, f64::max);
        let shift = (top - (0.5 * gamma - 0.2)).max(0.0);
        d -= DMatrix::identity(n, n) * shift;
        let exo = Exosystem::autonomous(d).unwrap();
        let mq = random_matrix(rng, n, n, 1.0);
        let q = &mq * mq.transpose() + DMatrix::identity(n, n) * 0.1;
        let r = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| rng.random_range(0.5..2.0)));
        let aug = build_augmented(&plant, &exo, &q, &r, gamma, None).unwrap();
        let problem = DiscountedLqrProblem::from_augmented(&aug).unwrap();
        let Ok(k) = find_stabilizing_gain(&problem) else { continue };
        let k0 = &k + random_matrix(rng, m, 2 * n, 0.3);
        if is_stabilizing(&problem, &k0).unwrap().stabilizing {
            return (problem, k0);
        }
    }
}

/// Random gain on a ray from `k_star` inside the sublevel set `{f <= f0}`.
pub fn sample_sublevel_gain(rng: &mut impl Rng, problem: &DiscountedLqrProblem, k_star: &DMatrix<f64>, f0: f64) -> DMatrix<f64> {
    let dir = random_matrix(rng, k_star.nrows(), k_star.ncols(), 1.0);
    let dir = &dir / dir.norm();
    let mut r = rng.random_range(0.0..2.0) * (1.0 + k_star.norm());
    loop {
        let k = k_star + &dir * r;
        if cost(problem, &k) <= f0 {
            return k;
        }
        r *= 0.5;
    }
}
