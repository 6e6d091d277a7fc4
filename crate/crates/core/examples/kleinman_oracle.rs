//! Kleinman's iteration as an independent check of the gain search: the
//! iterates converge quadratically to the discounted Riccati solution.
//!
//!     cargo run --example kleinman_oracle

use drem_track::lqr::{are_residual, gradient, kleinman, DiscountedLqrProblem};
use drem_track::ScenarioConfig;

fn main() -> drem_track::Result<()> {
    let cfg = ScenarioConfig::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example2.json"))?;
    let problem = DiscountedLqrProblem::from_augmented(&cfg.augmented()?)?;
    let res = kleinman(&problem, &cfg.k0(), 50)?;
    for (i, w) in res.gains.windows(2).enumerate() {
        println!("iter {:2}: |K_(k+1) - K_k| = {:.3e}", i + 1, (&w[1] - &w[0]).norm());
    }
    println!("K* = {:.7}", res.k);
    println!("P* = {:.5}", res.p);
    println!("ARE residual {:.2e}", are_residual(&problem, &res.p));
    println!("|grad f(K*)| = {:.2e}", gradient(&problem, &res.k, &res.p)?.norm());
    Ok(())
}
