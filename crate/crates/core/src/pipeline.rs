//! The three-step tracking design run end to end: finite-time estimation of
//! the plant and exosystem, gradient-flow gain search on the estimated
//! augmented system, and a closed-loop rollout with the true dynamics.
//!
//! Every step has its own entry point so that the steps can be run, tested
//! and inspected separately; [`run_pipeline`] chains them and writes
//! `estimate.csv`, `search.csv`, `track.csv`, `report.json` and `plot.gp`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::{clamp_s, finite_time_estimate, ie_threshold, reconstruct, FiniteTimeEstimate};
use crate::identification::{DremPath, IdentificationSystem, PathSlots};
use crate::lqr::{
    evaluate, gradient_flow, is_stabilizing, kleinman, smoothness_constants, are_residual, DiscountedLqrProblem,
    GainSearchTrace, GradientFlowOptions, KleinmanResult, RateFit,
};
use crate::model::{build_augmented, Exosystem, LtiPlant, ScenarioConfig};
use crate::serde_matrix::{opt_rows, rows};
use crate::sim::{integrate, CoupledState, StateLayout, TimeSeries, VectorField};

/// Command-line style overrides applied on top of a scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub step: Option<f64>,
    pub t_c: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub tol_grad: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(v) = self.step {
            cfg.step = v;
        }
        if let Some(v) = self.t_c {
            cfg.t_c = v;
            cfg.t_end = cfg.t_end.max(v);
        }
        if let Some(v) = self.sigma {
            cfg.sigma = Some(v);
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.tol_grad {
            cfg.tol_grad = v;
        }
        cfg.validate()
    }
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidScenario(_) | Error::Dimension { .. } | Error::InvalidSigma(_) | Error::Json(_) => 2,
        Error::IeNotSatisfied { .. } | Error::NoExcitation => 3,
        Error::NotStabilizing { .. } => 4,
        Error::NonFinite { .. } => 5,
        _ => 1,
    }
}

/// Estimation outcome of one regression path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub name: String,
    pub k: usize,
    pub sigma_used: Option<f64>,
    pub threshold: Option<f64>,
    pub int_delta_sq: f64,
    pub s0: f64,
    pub ie_satisfied: bool,
    /// Reconstructed matrix at `t_c`; absent when excitation was insufficient.
    #[serde(default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub theta_f: Option<DMatrix<f64>>,
    /// Largest element-wise `|Theta_F - Theta*|`.
    pub max_abs_error: Option<f64>,
    /// `||Theta_F - Theta*||_F / ||Theta*||_F`.
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationSummary {
    pub t_c: f64,
    pub alpha: f64,
    pub abc: PathSummary,
    pub d: Option<PathSummary>,
    /// Plant rebuilt from the reconstruction (C = 0 when it was not estimated).
    pub plant_estimate: Option<LtiPlant>,
    pub exo_estimate: Option<Exosystem>,
}

impl EstimationSummary {
    pub fn ie_satisfied(&self) -> bool {
        self.abc.ie_satisfied && self.d.as_ref().is_none_or(|d| d.ie_satisfied)
    }
}

/// Output of [`run_estimate`]: the logged series (with derived columns) and
/// the summary at `t_c`.
#[derive(Clone, Debug)]
pub struct EstimateOutcome {
    pub series: TimeSeries,
    pub summary: EstimationSummary,
    pub final_state: CoupledState,
}

impl EstimateOutcome {
    /// Fails with the threshold and achieved integral of the first path that
    /// did not reach interval excitation.
    pub fn require_ie(&self) -> Result<()> {
        for p in std::iter::once(&self.summary.abc).chain(self.summary.d.as_ref()) {
            if !p.ie_satisfied {
                return match p.threshold {
                    Some(threshold) => Err(Error::IeNotSatisfied {
                        achieved: p.int_delta_sq,
                        threshold,
                    }),
                    None => Err(Error::NoExcitation),
                };
            }
        }
        Ok(())
    }

    /// Estimated `(plant, exosystem)`; requires interval excitation.
    pub fn estimated_models(&self) -> Result<(LtiPlant, Option<Exosystem>)> {
        self.require_ie()?;
        let plant = self.summary.plant_estimate.clone().ok_or(Error::NoExcitation)?;
        Ok((plant, self.summary.exo_estimate.clone()))
    }
}

fn relative_error(est: &DMatrix<f64>, truth: &DMatrix<f64>) -> (f64, f64) {
    let diff = est - truth;
    let scale = truth.norm();
    (diff.amax(), if scale > 0.0 { diff.norm() / scale } else { diff.norm() })
}

/// Adds `[p]delta`, `[p]sigma`, `<Theta>F_i_j` and `[p]err_i_j` columns for a
/// path and returns its summary at the final sample.
fn summarize_path(
    path: &DremPath,
    slots: &PathSlots,
    state: &[f64],
    series: &mut TimeSeries,
    truth: &DMatrix<f64>,
    sigma: Option<f64>,
    t_c: f64,
) -> Result<(PathSummary, Option<FiniteTimeEstimate>)> {
    let (k, n, p) = (path.k(), path.n, path.prefix.clone());
    let theta0 = DMatrix::zeros(k, n);
    let snapshot = path.snapshot(slots, state, &theta0, sigma)?;
    let estimate = finite_time_estimate(&snapshot, sigma, t_c);
    let sigma_used = estimate.as_ref().ok().map(|e| e.sigma_used);

    series.add_column(format!("{p}delta"), path.delta_column(series))?;

    let theta_cols: Vec<Vec<f64>> = (1..=k)
        .flat_map(|i| (1..=n).map(move |j| (i, j)))
        .map(|(i, j)| series.column(&format!("{}_{i}_{j}", path.theta_name)).expect("theta logged").to_vec())
        .collect();
    let s0_col = series.column(&format!("{p}s0")).expect("s0 logged").to_vec();
    let rows = s0_col.len();

    series.add_column(format!("{p}sigma"), vec![sigma_used.unwrap_or(f64::NAN); rows])?;
    let mut theta_f_cols = vec![Vec::with_capacity(rows); k * n];
    for r in 0..rows {
        let th = DMatrix::from_row_iterator(k, n, theta_cols.iter().map(|c| c[r]));
        let tf = match sigma_used.map(|s| clamp_s(s0_col[r], s)) {
            Some(Ok(s)) => reconstruct(&th, &theta0, s),
            _ => DMatrix::from_element(k, n, f64::NAN),
        };
        for (c, v) in theta_f_cols.iter_mut().zip(tf.transpose().iter()) {
            c.push(*v);
        }
    }
    for (idx, col) in theta_f_cols.into_iter().enumerate() {
        series.add_column(format!("{}F_{}_{}", path.theta_name, idx / n + 1, idx % n + 1), col)?;
    }
    for (idx, col) in theta_cols.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let err = col.iter().map(|v| v - truth[(i, j)]).collect();
        series.add_column(format!("{p}err_{}_{}", i + 1, j + 1), err)?;
    }

    let threshold = sigma_used.map(|s| ie_threshold(path.alpha, s)).transpose()?;
    let est = estimate.ok().filter(|e| e.ie_satisfied);
    let errors = est.as_ref().map(|e| relative_error(&e.theta_f, truth));
    Ok((
        PathSummary {
            name: path.name.clone(),
            k,
            sigma_used,
            threshold,
            int_delta_sq: state[slots.int_delta_sq],
            s0: state[slots.s0],
            ie_satisfied: est.is_some(),
            theta_f: est.as_ref().map(|e| e.theta_f.clone()),
            max_abs_error: errors.map(|e| e.0),
            rel_error: errors.map(|e| e.1),
        },
        est,
    ))
}

/// Step 1: integrates plant, exosystem and both regression paths over
/// `[0, t_c]` and reconstructs the parameters at `t_c`.
///
/// Insufficient excitation is not an error here: the outcome carries
/// `ie_satisfied = false` and no reconstruction; call
/// [`EstimateOutcome::require_ie`] to turn it into one.
pub fn run_estimate(cfg: &ScenarioConfig) -> Result<EstimateOutcome> {
    let sys = IdentificationSystem::from_config(cfg)?;
    let traj = sys.run(sys.initial_state(), cfg.t_c, cfg.step, cfg.log_every)?;
    let mut series = traj.series;
    let state = &traj.final_state.values;
    let (psi_star, d_star) = sys.truth();

    let (abc, abc_est) = summarize_path(&sys.abc, sys.abc_slots(), state, &mut series, &psi_star, cfg.sigma, cfg.t_c)?;
    let (d, d_est) = match (&sys.d, sys.d_slots(), &d_star) {
        (Some(path), Some(slots), Some(truth)) => {
            let (s, e) = summarize_path(path, slots, state, &mut series, truth, cfg.sigma, cfg.t_c)?;
            (Some(s), e)
        }
        _ => (None, None),
    };

    let plant_estimate = abc_est
        .as_ref()
        .map(|e| LtiPlant::from_stacked_transpose(&e.theta_f, cfg.n(), cfg.m()))
        .transpose()?;
    let exo_estimate = match (&cfg.exo, d_est) {
        (Some(exo), Some(e)) => Some(Exosystem::new(e.theta_f.transpose(), exo.is_autonomous())?),
        _ => None,
    };
    Ok(EstimateOutcome {
        series,
        summary: EstimationSummary {
            t_c: cfg.t_c,
            alpha: cfg.alpha,
            abc,
            d,
            plant_estimate,
            exo_estimate,
        },
        final_state: traj.final_state,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    #[serde(with = "rows")]
    pub k: DMatrix<f64>,
    #[serde(with = "rows")]
    pub p: DMatrix<f64>,
    pub cost: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub search_time: f64,
    pub converged: bool,
    /// Closed-loop spectrum of `A - B K - 0.5 gamma I` at the terminal gain.
    pub spectrum: Vec<(f64, f64)>,
    pub are_residual: f64,
    pub mu: f64,
    pub lipschitz: f64,
    /// Log-linear fit of `f(K(t)) - f*` against the Kleinman optimum.
    pub rate: Option<RateFit>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub problem: DiscountedLqrProblem,
    pub trace: GainSearchTrace,
    pub oracle: KleinmanResult,
    pub summary: SynthesisSummary,
}

impl SolveOutcome {
    /// `t, K_1..K_{2nm}, cost, grad_norm`, with `K` flattened row-major.
    pub fn search_series(&self) -> TimeSeries {
        let kdim = self.problem.input_dim() * self.problem.state_dim();
        let mut names: Vec<String> = (1..=kdim).map(|i| format!("K_{i}")).collect();
        names.push("cost".into());
        names.push("grad_norm".into());
        let spacing = self.trace.iterates.get(1).map_or(0.0, |i| i.t);
        let mut ts = TimeSeries::new(spacing, names);
        let mut row = Vec::with_capacity(kdim + 2);
        for it in &self.trace.iterates {
            row.clear();
            row.extend(it.k.transpose().iter().copied());
            row.push(it.cost);
            row.push(it.grad_norm());
            ts.push_row(it.t, &row);
        }
        ts
    }
}

pub fn flow_options(cfg: &ScenarioConfig) -> GradientFlowOptions {
    GradientFlowOptions {
        tol_grad: cfg.tol_grad,
        initial_step: cfg.search.initial_step,
        max_step: cfg.search.max_step,
        max_time: cfg.search.max_time,
        max_iterations: cfg.search.max_iterations,
        local_tol: cfg.search.local_tol,
    }
}

/// Discounted LQR problem for the given plant and exosystem with the
/// scenario's weights.
pub fn lqr_problem(cfg: &ScenarioConfig, plant: &LtiPlant, exo: &Exosystem) -> Result<DiscountedLqrProblem> {
    let aug = build_augmented(plant, exo, &cfg.q(), &cfg.r(), cfg.gamma, cfg.pi.as_ref())?;
    DiscountedLqrProblem::from_augmented(&aug)
}

/// Step 2: gradient-flow search from the scenario's `K0` on the given
/// (typically estimated) matrices. `K0` is checked for membership in the
/// stabilizing set first.
pub fn run_solve(cfg: &ScenarioConfig, plant: &LtiPlant, exo: &Exosystem) -> Result<SolveOutcome> {
    let problem = lqr_problem(cfg, plant, exo)?;
    let k0 = cfg.k0();
    let st = is_stabilizing(&problem, &k0)?;
    if !st.stabilizing {
        return Err(Error::NotStabilizing {
            max_real: st.max_real(),
            spectrum: st.spectrum,
        });
    }
    let trace = gradient_flow(&problem, &k0, &flow_options(cfg))?;
    let oracle = kleinman(&problem, &k0, 100)?;
    let f_star = evaluate(&problem, &oracle.k, 0.0)?.cost;
    let consts = smoothness_constants(&problem, &k0)?;
    let last = trace.terminal();
    let summary = SynthesisSummary {
        k: last.k.clone(),
        p: last.p.clone(),
        cost: last.cost,
        grad_norm: last.grad_norm(),
        iterations: trace.iterations(),
        search_time: last.t,
        converged: trace.converged,
        spectrum: is_stabilizing(&problem, &last.k)?.spectrum,
        are_residual: are_residual(&problem, &last.p),
        mu: consts.mu,
        lipschitz: consts.lipschitz,
        rate: trace.fit_rate(f_star),
    };
    Ok(SolveOutcome {
        problem,
        trace,
        oracle,
        summary,
    })
}

/// Closed loop `u = -K col(x - v, v)` on the true plant and exosystem.
#[derive(Clone, Debug)]
pub struct ClosedLoop {
    plant: LtiPlant,
    exo: Exosystem,
    w: Option<crate::model::ExcitationSpec>,
    k: DMatrix<f64>,
    layout: StateLayout,
}

impl ClosedLoop {
    pub fn new(cfg: &ScenarioConfig, k: &DMatrix<f64>) -> Result<Self> {
        let exo = cfg
            .exo
            .clone()
            .ok_or_else(|| Error::InvalidScenario("tracking needs an exosystem".into()))?;
        let n = cfg.n();
        if k.shape() != (cfg.m(), 2 * n) {
            return Err(Error::dim("tracking gain", format!("{}x{}", cfg.m(), 2 * n), format!("{}x{}", k.nrows(), k.ncols())));
        }
        let mut layout = StateLayout::new();
        layout.vector("x", n);
        layout.vector("v", n);
        Ok(ClosedLoop {
            plant: cfg.plant.clone(),
            exo,
            w: cfg.excitation.w.clone(),
            k: k.clone(),
            layout,
        })
    }

    pub fn input(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut aug = DVector::zeros(2 * x.len());
        aug.rows_mut(0, x.len()).copy_from(&(x - v));
        aug.rows_mut(x.len(), x.len()).copy_from(v);
        -(&self.k * aug)
    }

    pub fn initial_state(&self, x0: &DVector<f64>, v0: &DVector<f64>) -> CoupledState {
        let mut s = CoupledState::zeros(self.layout.clone());
        s.slice_mut("x").copy_from_slice(x0.as_slice());
        s.slice_mut("v").copy_from_slice(v0.as_slice());
        s
    }
}

impl VectorField for ClosedLoop {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.plant.n();
        let x = DVector::from_column_slice(&y[..n]);
        let v = DVector::from_column_slice(&y[n..]);
        let u = self.input(&x, &v);
        let dx = self.plant.a() * &x + self.plant.b() * u + self.plant.c() * &v;
        let w = match &self.w {
            Some(w) if !self.exo.is_autonomous() => w.eval(t),
            _ => v,
        };
        let dv = self.exo.d() * w;
        dy[..n].copy_from_slice(dx.as_slice());
        dy[n..].copy_from_slice(dv.as_slice());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingSummary {
    pub t_end: f64,
    pub initial_error: f64,
    pub terminal_error: f64,
    pub max_error: f64,
}

#[derive(Clone, Debug)]
pub struct TrackOutcome {
    pub series: TimeSeries,
    pub summary: TrackingSummary,
}

/// Step 3: rolls out the closed loop over `[0, t_end]` from `(x0, v0)` and
/// logs `x`, `v`, `u` and `err_norm = ||x - v||`.
pub fn run_track(cfg: &ScenarioConfig, k: &DMatrix<f64>) -> Result<TrackOutcome> {
    let cl = ClosedLoop::new(cfg, k)?;
    let traj = integrate(&cl, cl.initial_state(&cfg.x0, &cfg.v0()), 0.0, cfg.t_end, cfg.step, cfg.log_every)?;
    let mut series = traj.series;
    let n = cfg.n();
    let xs: Vec<Vec<f64>> = (1..=n).map(|i| series.column(&format!("x{i}")).expect("x").to_vec()).collect();
    let vs: Vec<Vec<f64>> = (1..=n).map(|i| series.column(&format!("v{i}")).expect("v").to_vec()).collect();
    let rows = series.len();
    let mut err = Vec::with_capacity(rows);
    let mut us = vec![Vec::with_capacity(rows); cfg.m()];
    for r in 0..rows {
        let x = DVector::from_iterator(n, xs.iter().map(|c| c[r]));
        let v = DVector::from_iterator(n, vs.iter().map(|c| c[r]));
        err.push((&x - &v).norm());
        for (c, u) in us.iter_mut().zip(cl.input(&x, &v).iter()) {
            c.push(*u);
        }
    }
    for (i, c) in us.into_iter().enumerate() {
        series.add_column(format!("u{}", i + 1), c)?;
    }
    let summary = TrackingSummary {
        t_end: traj.t_final,
        initial_error: err[0],
        terminal_error: *err.last().expect("at least one sample"),
        max_error: err.iter().copied().fold(0.0, f64::max),
    };
    series.add_column("err_norm", err)?;
    Ok(TrackOutcome { series, summary })
}

/// Machine-readable summary written as `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    /// `"ok"` or the error message of the failing step.
    pub status: String,
    pub exit_code: i32,
    pub estimation: Option<EstimationSummary>,
    pub synthesis: Option<SynthesisSummary>,
    pub tracking: Option<TrackingSummary>,
    /// Artifacts written next to the report.
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(scenario: &str) -> Self {
        RunReport {
            scenario: scenario.to_string(),
            status: "ok".into(),
            exit_code: 0,
            estimation: None,
            synthesis: None,
            tracking: None,
            files: Vec::new(),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn fail(&mut self, err: &Error) {
        self.status = err.to_string();
        self.exit_code = exit_code(err);
    }

    pub fn save(&mut self, out: &Path) -> Result<PathBuf> {
        let path = out.join("report.json");
        if !self.files.contains(&path) {
            self.files.push(path.clone());
        }
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

fn save_series(series: &TimeSeries, out: &Path, name: &str, report: &mut RunReport) -> Result<()> {
    let path = out.join(name);
    series.save_csv(&path)?;
    report.files.push(path);
    Ok(())
}

/// gnuplot script plotting whichever CSVs the run produced.
pub fn plot_script(report: &RunReport) -> String {
    let has = |name: &str| report.files.iter().any(|f| f.file_name().is_some_and(|n| n == name));
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    if has("estimate.csv") {
        s.push_str("set output 'estimate.png'\nset logscale y\nplot 'estimate.csv' using 't':'int_delta_sq' with lines, '' using 't':'s0' with lines\nunset logscale y\n");
    }
    if has("search.csv") {
        s.push_str("set output 'search.png'\nset logscale y\nplot 'search.csv' using 't':'grad_norm' with lines\nunset logscale y\n");
    }
    if has("track.csv") {
        s.push_str("set output 'track.png'\nplot 'track.csv' using 't':'err_norm' with lines\n");
    }
    s
}

/// Runs estimation, gain search on the estimated matrices and the closed-loop
/// rollout, writing all artifacts into `out`. `report.json` is written even
/// when a step fails; the error is returned afterwards.
pub fn run_pipeline(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out)?;
    let mut report = RunReport::new(&cfg.id);
    let res = pipeline_steps(cfg, out, &mut report);
    if let Err(e) = &res {
        report.fail(e);
    }
    if report.files.iter().any(|f| f.extension().is_some_and(|e| e == "csv")) {
        let plot = out.join("plot.gp");
        std::fs::write(&plot, plot_script(&report))?;
        report.files.push(plot);
    }
    report.save(out)?;
    res.map(|_| report)
}

fn pipeline_steps(cfg: &ScenarioConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let est = run_estimate(cfg)?;
    save_series(&est.series, out, "estimate.csv", report)?;
    report.estimation = Some(est.summary.clone());
    let (plant, exo) = est.estimated_models()?;
    let exo = exo.ok_or_else(|| Error::InvalidScenario("tracking needs an exosystem".into()))?;

    let sol = run_solve(cfg, &plant, &exo)?;
    save_series(&sol.search_series(), out, "search.csv", report)?;
    report.synthesis = Some(sol.summary.clone());

    let tr = run_track(cfg, &sol.summary.k)?;
    save_series(&tr.series, out, "track.csv", report)?;
    report.tracking = Some(tr.summary);
    Ok(())
}

/// Runs only the estimation step and writes `estimate.csv` and `report.json`.
pub fn run_estimate_to(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out)?;
    let mut report = RunReport::new(&cfg.id);
    let res = run_estimate(cfg).and_then(|est| {
        save_series(&est.series, out, "estimate.csv", &mut report)?;
        report.estimation = Some(est.summary.clone());
        est.require_ie()
    });
    if let Err(e) = &res {
        report.fail(e);
    }
    report.save(out)?;
    res.map(|_| report)
}

/// Runs the gain search on the given matrices and writes `search.csv` and
/// `report.json`.
pub fn run_solve_to(cfg: &ScenarioConfig, plant: &LtiPlant, exo: &Exosystem, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out)?;
    let mut report = RunReport::new(&cfg.id);
    let res = run_solve(cfg, plant, exo).and_then(|sol| {
        save_series(&sol.search_series(), out, "search.csv", &mut report)?;
        report.synthesis = Some(sol.summary);
        Ok(())
    });
    if let Err(e) = &res {
        report.fail(e);
    }
    report.save(out)?;
    res.map(|_| report)
}

/// Rolls out the closed loop with gain `k` and writes `track.csv` and
/// `report.json`.
pub fn run_track_to(cfg: &ScenarioConfig, k: &DMatrix<f64>, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out)?;
    let mut report = RunReport::new(&cfg.id);
    let res = run_track(cfg, k).and_then(|tr| {
        save_series(&tr.series, out, "track.csv", &mut report)?;
        report.tracking = Some(tr.summary);
        Ok(())
    });
    if let Err(e) = &res {
        report.fail(e);
    }
    report.save(out)?;
    res.map(|_| report)
}
