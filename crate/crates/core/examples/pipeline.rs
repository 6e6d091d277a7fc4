//! Estimation, gain search on the estimated matrices, and closed-loop
//! rollout in one go; writes CSVs, report.json and a gnuplot script.
//!
//!     cargo run --example pipeline [scenario.json] [out_dir]

use drem_track::pipeline::run_pipeline;
use drem_track::ScenarioConfig;
use std::path::PathBuf;

fn main() -> drem_track::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg_path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example2.json").to_string());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("drem-track-pipeline"));
    let cfg = ScenarioConfig::from_path(cfg_path)?;
    let report = run_pipeline(&cfg, &out)?;

    let est = report.estimation.as_ref().expect("estimation ran");
    println!("estimation at t_c = {} s, relative error {:.2e}", est.t_c, est.abc.rel_error.unwrap_or(f64::NAN));
    let syn = report.synthesis.as_ref().expect("synthesis ran");
    println!("K = {:.7}  ({} steps, |grad| = {:.1e})", syn.k, syn.iterations, syn.grad_norm);
    let tr = report.tracking.as_ref().expect("tracking ran");
    println!("|x - v|: {:.4} -> {:.4e} at t = {}", tr.initial_error, tr.terminal_error, tr.t_end);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
