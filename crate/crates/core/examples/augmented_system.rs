//! Builds the augmented tracking system for the two-state oscillator and
//! checks that the zero gain lies in the stabilizing set.
//!
//!     cargo run --example augmented_system

use drem_track::linalg::spectrum;
use drem_track::lqr::{is_stabilizing, DiscountedLqrProblem};
use drem_track::ScenarioConfig;
use nalgebra::DMatrix;

fn main() -> drem_track::Result<()> {
    let cfg = ScenarioConfig::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example2.json"))?;
    let aug = cfg.augmented()?;
    println!("calA = {:.4}", aug.a);
    println!("calB = {:.4}", aug.b);
    println!("Qhat = {:.1}", aug.q_hat);

    let blocks = aug.blocks();
    println!("recovered C block = {:.4}", blocks.c);

    let problem = DiscountedLqrProblem::from_augmented(&aug)?;
    let k0 = DMatrix::zeros(aug.m(), 2 * aug.n());
    let st = is_stabilizing(&problem, &k0)?;
    println!("K0 = 0 stabilizing: {}", st.stabilizing);
    for (re, im) in &st.spectrum {
        println!("  {re:+.4} {im:+.4}i");
    }
    // without the discount the open loop is only marginally stable
    let open = spectrum(&aug.a);
    println!("max Re eig(calA) = {:.4}", open.iter().map(|e| e.0).fold(f64::MIN, f64::max));
    Ok(())
}
