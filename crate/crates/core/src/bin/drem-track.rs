use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drem_track::lqr::{are_residual, kleinman, DiscountedLqrProblem};
use drem_track::pipeline::{
    exit_code, lqr_problem, run_estimate_to, run_pipeline, run_solve_to, run_track_to, Overrides, RunReport,
};
use drem_track::{Error, Result, ScenarioConfig};

#[derive(Parser)]
#[command(version, about = "Finite-time identification and gradient-flow LQR tracking design")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate plant and exosystem matrices over [0, t_c].
    Estimate(Common),
    /// Gradient-flow gain search (true matrices, or estimates from a report).
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from_report: Option<PathBuf>,
    },
    /// Closed-loop rollout (gain from a report, else the optimal gain for the true matrices).
    Track {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from_report: Option<PathBuf>,
    },
    /// Estimation, gain search and rollout in sequence.
    Pipeline(Common),
    /// Kleinman iteration on the true matrices (oracle).
    Kleinman(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    tc: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::from_path(&self.config)?;
        Overrides {
            step: self.step,
            t_c: self.tc,
            sigma: self.sigma,
            alpha: self.alpha,
            gamma: self.gamma,
            tol_grad: self.tol,
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn true_problem(cfg: &ScenarioConfig) -> Result<DiscountedLqrProblem> {
    let exo = cfg.exo.as_ref().ok_or_else(|| Error::InvalidScenario("tracking needs an exosystem".into()))?;
    lqr_problem(cfg, &cfg.plant, exo)
}

fn run(cmd: Cmd) -> Result<RunReport> {
    match cmd {
        Cmd::Estimate(c) => run_estimate_to(&c.load()?, &c.out),
        Cmd::Pipeline(c) => run_pipeline(&c.load()?, &c.out),
        Cmd::Solve { common, from_report } => {
            let cfg = common.load()?;
            let (plant, exo) = match from_report {
                Some(p) => {
                    let est = RunReport::from_path(p)?
                        .estimation
                        .ok_or_else(|| Error::InvalidScenario("report has no estimation".into()))?;
                    match (est.plant_estimate, est.exo_estimate) {
                        (Some(p), Some(e)) => (p, e),
                        _ => return Err(Error::NoExcitation),
                    }
                }
                None => (
                    cfg.plant.clone(),
                    cfg.exo.clone().ok_or_else(|| Error::InvalidScenario("tracking needs an exosystem".into()))?,
                ),
            };
            run_solve_to(&cfg, &plant, &exo, &common.out)
        }
        Cmd::Track { common, from_report } => {
            let cfg = common.load()?;
            let k = match from_report {
                Some(p) => {
                    RunReport::from_path(p)?
                        .synthesis
                        .ok_or_else(|| Error::InvalidScenario("report has no synthesis".into()))?
                        .k
                }
                None => kleinman(&true_problem(&cfg)?, &cfg.k0(), 100)?.k,
            };
            run_track_to(&cfg, &k, &common.out)
        }
        Cmd::Kleinman(c) => {
            let cfg = c.load()?;
            let problem = true_problem(&cfg)?;
            let res = kleinman(&problem, &cfg.k0(), 100)?;
            println!("iterations: {}", res.iterations);
            println!("K = {:.7}", res.k);
            println!("P = {:.7}", res.p);
            println!("ARE residual: {:.3e}", are_residual(&problem, &res.p));
            Ok(RunReport::new(&cfg.id))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NotStabilizing { spectrum, .. } = &e {
                for (re, im) in spectrum {
                    eprintln!("  eigenvalue {re:+.6} {im:+.6}i");
                }
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
