//! Finite-time estimation of the oscillator plant (A, B, C) and the
//! exosystem D from one open-loop experiment.
//!
//!     cargo run --example drem_estimation [scenario.json]

use drem_track::pipeline::run_estimate;
use drem_track::ScenarioConfig;

fn main() -> drem_track::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example2.json").to_string());
    let cfg = ScenarioConfig::from_path(path)?;
    let est = run_estimate(&cfg)?;

    for p in std::iter::once(&est.summary.abc).chain(est.summary.d.as_ref()) {
        println!(
            "[{}] k = {}, int delta^2 = {:.4e} (need {:.4}), s0 = {:.3e}, IE: {}",
            p.name,
            p.k,
            p.int_delta_sq,
            p.threshold.unwrap_or(f64::NAN),
            p.s0,
            p.ie_satisfied
        );
        if let Some(tf) = &p.theta_f {
            println!("  reconstruction = {tf:.6}  relative error {:.2e}", p.rel_error.unwrap_or(f64::NAN));
        }
    }
    est.require_ie()?;
    if let Some(plant) = &est.summary.plant_estimate {
        println!("A_hat = {:.6}B_hat = {:.6}C_hat = {:.6}", plant.a(), plant.b(), plant.c());
    }
    if let Some(exo) = &est.summary.exo_estimate {
        println!("D_hat = {:.6}", exo.d());
    }
    Ok(())
}
