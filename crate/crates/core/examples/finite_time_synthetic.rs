//! A synthetic 3x2 regression with known truth: the plain gradient estimate
//! only converges asymptotically, while the reconstruction is exact as soon
//! as the excitation integral crosses the threshold.
//!
//!     cargo run --example finite_time_synthetic

use drem_track::estimator::{clamp_s, ie_threshold, reconstruct};
use drem_track::identification::SyntheticRegression;
use drem_track::model::{ExcitationChannel, ExcitationSpec, Sinusoid};
use drem_track::regressor::FilterBank;
use nalgebra::dmatrix;

fn main() -> drem_track::Result<()> {
    let theta_star = dmatrix![1.0, -2.0; 0.5, 3.0; -1.5, 0.25];
    let theta0 = dmatrix![4.0, 4.0; -4.0, 0.0; 2.0, -3.0];
    let tone = |offset, omega, phase| ExcitationChannel {
        offset,
        terms: vec![Sinusoid { amplitude: 1.0, omega, phase }],
    };
    let psi_z = ExcitationSpec {
        channels: vec![tone(1.0, 0.7, 0.0), tone(0.0, 1.9, 0.3), tone(-0.5, 3.1, 1.0)],
    };
    let bank = FilterBank::new(1.0, vec![0.5, 1.0, 2.0])?;
    let alpha = 2000.0;
    let sigma = 0.9;
    let reg = SyntheticRegression::new(theta_star.clone(), psi_z, bank, alpha)?;
    let traj = reg.run(&theta0, 20.0, 1e-3, 1000)?;
    println!("threshold on int delta^2: {:.4e}", ie_threshold(alpha, sigma)?);
    println!("{:>5} {:>12} {:>12} {:>12}", "t", "s0", "|Theta-*|", "|ThetaF-*|");
    for (t, theta, s0) in reg.history(&traj.series) {
        let tf = reconstruct(&theta, &theta0, clamp_s(s0, sigma)?);
        println!(
            "{t:5.1} {s0:12.4e} {:12.4e} {:12.4e}",
            (&theta - &theta_star).norm(),
            (&tf - &theta_star).norm()
        );
    }
    Ok(())
}
