mod common;

use common::scenario;
use drem_track::lqr::{are_residual, evaluate, kleinman};
use drem_track::pipeline::{lqr_problem, run_estimate, run_pipeline, run_solve, run_track, RunReport};
use drem_track::{Exosystem, LtiPlant, ScenarioConfig};
use nalgebra::DMatrix;

fn error_at(series: &drem_track::sim::TimeSeries, t: f64) -> f64 {
    let r = series.t.iter().position(|s| (s - t).abs() < 1e-9).expect("logged time");
    series.column("err_norm").unwrap()[r]
}

fn optimal_gain(cfg: &ScenarioConfig) -> DMatrix<f64> {
    let problem = lqr_problem(cfg, &cfg.plant, cfg.exo.as_ref().unwrap()).unwrap();
    kleinman(&problem, &cfg.k0(), 100).unwrap().k
}

#[test]
fn pipeline_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("example2.json");
    let report = run_pipeline(&cfg, dir.path()).unwrap();
    for name in ["estimate.csv", "search.csv", "track.csv", "plot.gp", "report.json"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let saved = RunReport::from_path(dir.path().join("report.json")).unwrap();
    assert_eq!(saved, report);
    assert_eq!(saved.exit_code, 0);
    let syn = saved.synthesis.unwrap();
    assert!(syn.converged && syn.spectrum.iter().all(|(re, _)| *re < 0.0));

    let search = std::fs::read_to_string(dir.path().join("search.csv")).unwrap();
    let last = search.lines().last().unwrap();
    let grad: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(grad, syn.grad_norm);
}

#[test]
fn pipeline_is_byte_deterministic() {
    let cfg = scenario("example2.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&cfg, a.path()).unwrap();
    run_pipeline(&cfg, b.path()).unwrap();
    for name in ["estimate.csv", "search.csv", "track.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn failed_estimation_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("example1.json");
    let err = run_pipeline(&cfg, dir.path()).unwrap_err();
    let saved = RunReport::from_path(dir.path().join("report.json")).unwrap();
    assert_eq!(saved.exit_code, 3, "{err}");
    assert!(saved.synthesis.is_none());
    assert!(!saved.estimation.unwrap().ie_satisfied());
}

#[test]
fn estimated_gain_is_continuous_in_parameter_error() {
    let mut cfg = scenario("example2.json");
    // estimates from several windows, all past interval excitation
    for t_c in [12.0, 15.0, 20.0] {
        cfg.t_c = t_c;
        let est = run_estimate(&cfg).unwrap();
        let (plant, exo) = est.estimated_models().unwrap();
        let exo = exo.unwrap();
        let true_exo = cfg.exo.clone().unwrap();
        let param_err = ((plant.a() - cfg.plant.a()).norm_squared()
            + (plant.b() - cfg.plant.b()).norm_squared()
            + (plant.c() - cfg.plant.c()).norm_squared()
            + (exo.d() - true_exo.d()).norm_squared())
        .sqrt();
        let problem = lqr_problem(&cfg, &plant, &exo).unwrap();
        let k_est = kleinman(&problem, &cfg.k0(), 100).unwrap().k;
        let gap = (&k_est - optimal_gain(&cfg)).norm();
        assert!(gap <= 10.0 * param_err + 1e-12, "t_c {t_c}: gain gap {gap:e} vs parameter error {param_err:e}");
    }

    // a deliberate 1e-3 perturbation, well above round-off
    let bump = DMatrix::from_fn(2, 2, |i, j| 1e-3 * if (i + j) % 2 == 0 { 1.0 } else { -1.0 });
    let plant = LtiPlant::new(cfg.plant.a() + &bump, cfg.plant.b().add_scalar(1e-3), cfg.plant.c() - &bump).unwrap();
    let exo = Exosystem::autonomous(cfg.exo.as_ref().unwrap().d() + &bump).unwrap();
    let param_err = (3.0 * bump.norm_squared() + 2.0e-6).sqrt();
    let problem = lqr_problem(&cfg, &plant, &exo).unwrap();
    let gap = (kleinman(&problem, &cfg.k0(), 100).unwrap().k - optimal_gain(&cfg)).norm();
    assert!(gap <= 10.0 * param_err, "perturbed: gain gap {gap:e} vs parameter error {param_err:e}");
    assert!(gap > 0.0);
}

#[test]
fn gain_search_is_insensitive_to_tolerance() {
    let mut cfg = scenario("example2.json");
    let exo = cfg.exo.clone().unwrap();
    let plant = cfg.plant.clone();
    cfg.tol_grad = 1e-8;
    let fine = run_solve(&cfg, &plant, &exo).unwrap().summary.k;
    cfg.tol_grad = 1e-4;
    let coarse = run_solve(&cfg, &plant, &exo).unwrap().summary.k;
    assert!((&fine - &coarse).amax() <= 1e-3);
}

#[test]
fn terminal_gain_is_stationary_and_solves_the_riccati_equation() {
    let cfg = scenario("example2.json");
    let sol = run_solve(&cfg, &cfg.plant, cfg.exo.as_ref().unwrap()).unwrap();
    let p = &sol.summary.p;
    assert!(sol.summary.are_residual <= 1e-6 * p.norm());
    let oracle = &sol.oracle;
    assert!(are_residual(&sol.problem, &oracle.p) <= 1e-8 * oracle.p.norm());
    let at_star = evaluate(&sol.problem, &oracle.k, 0.0).unwrap();
    assert!(at_star.grad_norm() <= 1e-8 * (1.0 + oracle.k.norm()));
    assert!((&sol.summary.k - &oracle.k).amax() <= 10.0 * cfg.tol_grad);
}

#[test]
fn optimal_gain_tracks_the_reference() {
    let cfg = scenario("example2.json");
    let tr = run_track(&cfg, &optimal_gain(&cfg)).unwrap();
    let e25 = error_at(&tr.series, 25.0);
    assert!(e25 <= 0.1, "||x - v||(25) = {e25}");
    assert!(tr.summary.terminal_error < 0.1 * tr.summary.initial_error);
}

#[test]
fn zero_gain_does_not_track() {
    let cfg = scenario("example2.json");
    let tr = run_track(&cfg, &DMatrix::zeros(1, 4)).unwrap();
    let late: Vec<f64> = tr
        .series
        .t
        .iter()
        .zip(tr.series.column("err_norm").unwrap())
        .filter(|(t, _)| **t >= 25.0)
        .map(|(_, e)| *e)
        .collect();
    let worst = late.iter().copied().fold(0.0, f64::max);
    assert!(worst > 0.1, "open loop error after 25 s peaks at {worst}");
}
