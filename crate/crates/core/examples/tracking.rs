//! Closed-loop tracking with the optimal gain against the zero gain.
//!
//!     cargo run --example tracking

use drem_track::lqr::{kleinman, DiscountedLqrProblem};
use drem_track::pipeline::run_track;
use drem_track::ScenarioConfig;

fn main() -> drem_track::Result<()> {
    let cfg = ScenarioConfig::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example2.json"))?;
    let problem = DiscountedLqrProblem::from_augmented(&cfg.augmented()?)?;
    let k_opt = kleinman(&problem, &cfg.k0(), 100)?.k;

    let with = run_track(&cfg, &k_opt)?;
    let without = run_track(&cfg, &cfg.k0())?;
    let e1 = with.series.column("err_norm").unwrap();
    let e0 = without.series.column("err_norm").unwrap();
    println!("{:>6} {:>12} {:>12}", "t", "|x-v| K*", "|x-v| K=0");
    for i in (0..with.series.len()).step_by(with.series.len() / 20) {
        println!("{:6.1} {:12.4e} {:12.4e}", with.series.t[i], e1[i], e0[i]);
    }
    println!("terminal: {:.4e} vs {:.4e}", with.summary.terminal_error, without.summary.terminal_error);
    Ok(())
}
