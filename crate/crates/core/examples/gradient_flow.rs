//! Gradient-flow gain search on the oscillator tracking problem from K0 = 0,
//! with the smoothness/PL diagnostics and the fitted exponential rate.
//!
//!     cargo run --example gradient_flow

use drem_track::lqr::{evaluate, gradient_flow, kleinman, smoothness_constants, DiscountedLqrProblem, GradientFlowOptions};
use drem_track::ScenarioConfig;

fn main() -> drem_track::Result<()> {
    let cfg = ScenarioConfig::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example2.json"))?;
    let problem = DiscountedLqrProblem::from_augmented(&cfg.augmented()?)?;
    let k0 = cfg.k0();

    let trace = gradient_flow(&problem, &k0, &GradientFlowOptions::default())?;
    let f_star = evaluate(&problem, &kleinman(&problem, &k0, 100)?.k, 0.0)?.cost;
    let stride = (trace.iterates.len() / 15).max(1);
    println!("{:>9} {:>14} {:>12}", "t", "f - f*", "|grad|");
    for it in trace.iterates.iter().step_by(stride).chain(std::iter::once(trace.terminal())) {
        println!("{:9.3} {:14.6e} {:12.4e}", it.t, it.cost - f_star, it.grad_norm());
    }
    let last = trace.terminal();
    println!("K = {:.7}", last.k);
    println!("accepted steps {}, rejected {}", trace.iterations(), trace.rejections);

    let c = smoothness_constants(&problem, &k0)?;
    println!("mu = {:.3e}, L = {:.3e}, zeta = {:.3e}", c.mu, c.lipschitz, c.zeta);
    if let Some(fit) = trace.fit_rate(f_star) {
        println!("fitted log-rate {:.4} (R^2 = {:.6}, {} samples); 2 mu = {:.3e}", fit.slope, fit.r_squared, fit.samples, 2.0 * c.mu);
    }
    Ok(())
}
