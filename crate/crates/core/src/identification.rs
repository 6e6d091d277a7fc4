//! Coupled estimation dynamics: plant, exosystem, prefilters, extension banks
//! and estimators for the (A, B, C) and D regressions, integrated together.

use nalgebra::{DMatrix, DVector};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::estimator::{s0_rhs, update_rhs_into, EstimatorState};
use crate::model::{Exosystem, ExcitationSpec, LtiPlant, ScenarioConfig};
use crate::regressor::{filtered_derivative_into, mix, FilterBank};
use crate::sim::{integrate, CoupledState, StateLayout, Trajectory, VectorField};

/// Slots of one regression path inside the flat state.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSlots {
    pub f: Range<usize>,
    pub hy: Range<usize>,
    pub theta: Range<usize>,
    pub s0: usize,
    pub int_delta_sq: usize,
}

/// One DREM regression `psi_y = Theta^T psi_z` with its extension bank and
/// estimator. Owns no state; reads and writes its slots of the flat vector.
#[derive(Clone, Debug)]
pub struct DremPath {
    pub name: String,
    pub bank: FilterBank,
    /// Regressand width (columns of Theta).
    pub n: usize,
    pub alpha: f64,
    /// Component-name prefix in the layout ("" or e.g. "D_").
    pub prefix: String,
    /// Component name of the estimate matrix.
    pub theta_name: String,
}

impl DremPath {
    pub fn k(&self) -> usize {
        self.bank.k()
    }

    pub fn register(&self, layout: &mut StateLayout) -> PathSlots {
        let (k, n, p) = (self.k(), self.n, &self.prefix);
        PathSlots {
            f: layout.matrix(&format!("{p}F"), k, k),
            hy: layout.matrix(&format!("{p}H"), k, n),
            theta: layout.matrix(&self.theta_name, k, n),
            s0: layout.scalar(&format!("{p}s0")),
            int_delta_sq: layout.scalar(&format!("{p}int_delta_sq")),
        }
    }

    /// Sets `s0 = 1` and the initial estimate (row-major).
    pub fn init(&self, slots: &PathSlots, y: &mut [f64], theta0: &DMatrix<f64>) {
        assert_eq!(theta0.shape(), (self.k(), self.n));
        for (d, v) in y[slots.theta.clone()].iter_mut().zip(theta0.transpose().iter()) {
            *d = *v;
        }
        y[slots.s0] = 1.0;
        y[slots.int_delta_sq] = 0.0;
    }

    /// Writes the path derivatives given the current regressor and regressand.
    pub fn rhs(&self, slots: &PathSlots, y: &[f64], psi_z: &[f64], psi_y: &[f64], dy: &mut [f64]) {
        let (k, n) = (self.k(), self.n);
        let f = &y[slots.f.clone()];
        let hy = &y[slots.hy.clone()];
        let mut df = vec![0.0; k * k];
        let mut dh = vec![0.0; k * n];
        self.bank.extension_rhs(f, hy, psi_z, psi_y, &mut df, &mut dh);
        dy[slots.f.clone()].copy_from_slice(&df);
        dy[slots.hy.clone()].copy_from_slice(&dh);

        let signals = mix(&DMatrix::from_row_slice(k, k, f), &DMatrix::from_row_slice(k, n, hy));
        let mixed: Vec<f64> = signals.mixed.transpose().iter().copied().collect();
        update_rhs_into(self.alpha, signals.delta, &mixed, &y[slots.theta.clone()], &mut dy[slots.theta.clone()]);
        dy[slots.s0] = s0_rhs(self.alpha, y[slots.s0], signals.delta);
        dy[slots.int_delta_sq] = signals.delta * signals.delta;
    }

    /// Estimator snapshot from a flat state.
    pub fn snapshot(&self, slots: &PathSlots, y: &[f64], theta0: &DMatrix<f64>, sigma: Option<f64>) -> Result<EstimatorState> {
        let mut st = EstimatorState::new(theta0.clone(), self.alpha, sigma)?;
        st.theta = DMatrix::from_row_slice(self.k(), self.n, &y[slots.theta.clone()]);
        st.s0 = y[slots.s0];
        Ok(st)
    }

    /// `det(F)` at every logged sample.
    pub fn delta_column(&self, series: &crate::sim::TimeSeries) -> Vec<f64> {
        let k = self.k();
        let cols: Vec<&[f64]> = (1..=k)
            .flat_map(|i| (1..=k).map(move |j| (i, j)))
            .map(|(i, j)| {
                series
                    .column(&format!("{}F_{i}_{j}", self.prefix))
                    .expect("F logged")
            })
            .collect();
        (0..series.len())
            .map(|r| crate::linalg::determinant(&DMatrix::from_row_iterator(k, k, cols.iter().map(|c| c[r]))))
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Slots {
    x: Range<usize>,
    v: Range<usize>,
    psi_x: Range<usize>,
    psi_u: Range<usize>,
    psi_v: Option<Range<usize>>,
    abc: PathSlots,
    /// Prefiltered v for the D regressand; `None` when it coincides with `z`.
    v_l: Option<Range<usize>>,
    z: Option<Range<usize>>,
    d: Option<PathSlots>,
}

/// The open-loop estimation experiment as a single vector field.
#[derive(Clone, Debug)]
pub struct IdentificationSystem {
    plant: LtiPlant,
    exo: Option<Exosystem>,
    u: ExcitationSpec,
    w: Option<ExcitationSpec>,
    lambda0: f64,
    x0: DVector<f64>,
    v0: DVector<f64>,
    with_c: bool,
    pub abc: DremPath,
    pub d: Option<DremPath>,
    layout: StateLayout,
    slots: Slots,
}

impl IdentificationSystem {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (n, m) = (cfg.n(), cfg.m());
        let with_c = cfg.estimates_c();
        let lambda0 = cfg.filters.lambda;
        let abc = DremPath {
            name: "abc".into(),
            bank: FilterBank::new(lambda0, cfg.bank())?,
            n,
            alpha: cfg.alpha,
            prefix: String::new(),
            theta_name: "Psi".into(),
        };
        let d = match (&cfg.exo, cfg.exo_bank()) {
            (Some(_), Some(bank)) => Some(DremPath {
                name: "d".into(),
                bank: FilterBank::new(lambda0, bank)?,
                n,
                alpha: cfg.alpha,
                prefix: "D_".into(),
                theta_name: "Theta".into(),
            }),
            _ => None,
        };

        let mut layout = StateLayout::new();
        let x = layout.vector("x", n);
        let v = layout.vector("v", n);
        let psi_x = layout.vector("psi_x", n);
        let psi_u = layout.vector("psi_u", m);
        let psi_v = with_c.then(|| layout.vector("psi_v", n));
        let abc_slots = abc.register(&mut layout);
        let (v_l, z, d_slots) = match (&cfg.exo, &d) {
            (Some(exo), Some(path)) => {
                let v_l = (!exo.is_autonomous()).then(|| layout.vector("v_l", n));
                let z = layout.vector("z", exo.q());
                (v_l, Some(z), Some(path.register(&mut layout)))
            }
            _ => (None, None, None),
        };

        Ok(IdentificationSystem {
            plant: cfg.plant.clone(),
            exo: cfg.exo.clone(),
            u: cfg.excitation.u.clone(),
            w: cfg.excitation.w.clone(),
            lambda0,
            x0: cfg.x0.clone(),
            v0: cfg.v0(),
            with_c,
            abc,
            d,
            layout,
            slots: Slots {
                x,
                v,
                psi_x,
                psi_u,
                psi_v,
                abc: abc_slots,
                v_l,
                z,
                d: d_slots,
            },
        })
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn abc_slots(&self) -> &PathSlots {
        &self.slots.abc
    }

    pub fn d_slots(&self) -> Option<&PathSlots> {
        self.slots.d.as_ref()
    }

    pub fn estimates_c(&self) -> bool {
        self.with_c
    }

    /// True regression targets `[A^T; B^T; (C^T)]` and `D^T`.
    pub fn truth(&self) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        (
            self.plant.stacked_transpose(self.with_c),
            self.exo.as_ref().map(|e| e.d().transpose()),
        )
    }

    /// Initial state with zero filters and the given initial estimates.
    pub fn initial_state_with(&self, theta0_abc: &DMatrix<f64>, theta0_d: Option<&DMatrix<f64>>) -> CoupledState {
        let mut s = CoupledState::zeros(self.layout.clone());
        s.values[self.slots.x.clone()].copy_from_slice(self.x0.as_slice());
        s.values[self.slots.v.clone()].copy_from_slice(self.v0.as_slice());
        self.abc.init(&self.slots.abc, &mut s.values, theta0_abc);
        if let (Some(path), Some(slots)) = (&self.d, &self.slots.d) {
            let zero = DMatrix::zeros(path.k(), path.n);
            path.init(slots, &mut s.values, theta0_d.unwrap_or(&zero));
        }
        s
    }

    pub fn initial_state(&self) -> CoupledState {
        let zero = DMatrix::zeros(self.abc.k(), self.abc.n);
        self.initial_state_with(&zero, None)
    }

    pub fn run(&self, y0: CoupledState, t_end: f64, step: f64, log_every: usize) -> Result<Trajectory> {
        integrate(self, y0, 0.0, t_end, step, log_every)
    }

    fn exo_input(&self, t: f64, v: &[f64]) -> Vec<f64> {
        match &self.w {
            Some(w) if !self.exo.as_ref().is_some_and(Exosystem::is_autonomous) => w.eval(t).as_slice().to_vec(),
            _ => v.to_vec(),
        }
    }
}

impl VectorField for IdentificationSystem {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let sl = &self.slots;
        let x = &y[sl.x.clone()];
        let v = &y[sl.v.clone()];
        let u = self.u.eval(t);
        let n = x.len();

        let xv = DVector::from_column_slice(x);
        let vv = DVector::from_column_slice(v);
        let dx = self.plant.a() * &xv + self.plant.b() * &u + self.plant.c() * &vv;
        dy[sl.x.clone()].copy_from_slice(dx.as_slice());

        let w = self.exo_input(t, v);
        match &self.exo {
            Some(exo) => {
                let dv = exo.d() * DVector::from_column_slice(&w);
                dy[sl.v.clone()].copy_from_slice(dv.as_slice());
            }
            None => dy[sl.v.clone()].fill(0.0),
        }

        let bank = &self.abc.bank;
        bank.prefilter_rhs(&y[sl.psi_x.clone()], x, &mut dy[sl.psi_x.clone()]);
        bank.prefilter_rhs(&y[sl.psi_u.clone()], u.as_slice(), &mut dy[sl.psi_u.clone()]);
        if let Some(r) = &sl.psi_v {
            bank.prefilter_rhs(&y[r.clone()], v, &mut dy[r.clone()]);
        }

        let mut psi_y = vec![0.0; n];
        filtered_derivative_into(x, self.x0.as_slice(), &y[sl.psi_x.clone()], self.lambda0, t, &mut psi_y);
        let mut psi_z = Vec::with_capacity(self.abc.k());
        psi_z.extend_from_slice(&y[sl.psi_x.clone()]);
        psi_z.extend_from_slice(&y[sl.psi_u.clone()]);
        if let Some(r) = &sl.psi_v {
            psi_z.extend_from_slice(&y[r.clone()]);
        }
        self.abc.rhs(&sl.abc, y, &psi_z, &psi_y, dy);

        if let (Some(path), Some(slots), Some(z)) = (&self.d, &sl.d, &sl.z) {
            bank.prefilter_rhs(&y[z.clone()], &w, &mut dy[z.clone()]);
            let v_l = match &sl.v_l {
                Some(r) => {
                    bank.prefilter_rhs(&y[r.clone()], v, &mut dy[r.clone()]);
                    &y[r.clone()]
                }
                None => &y[z.clone()],
            };
            let mut yd = vec![0.0; n];
            filtered_derivative_into(v, self.v0.as_slice(), v_l, self.lambda0, t, &mut yd);
            path.rhs(slots, y, &y[z.clone()], &yd, dy);
        }
    }
}

/// Checks that `theta0` matches a path's shape.
pub fn check_theta0(path: &DremPath, theta0: &DMatrix<f64>) -> Result<()> {
    if theta0.shape() != (path.k(), path.n) {
        return Err(Error::dim(
            "initial estimate",
            format!("{}x{}", path.k(), path.n),
            format!("{}x{}", theta0.nrows(), theta0.ncols()),
        ));
    }
    Ok(())
}

/// A regression `psi_y = Theta*^T psi_z` with a prescribed regressor signal
/// and known truth, run through a single path. Used to exercise the
/// estimator in isolation.
#[derive(Clone, Debug)]
pub struct SyntheticRegression {
    pub theta_star: DMatrix<f64>,
    pub psi_z: ExcitationSpec,
    pub path: DremPath,
    layout: StateLayout,
    slots: PathSlots,
}

impl SyntheticRegression {
    pub fn new(theta_star: DMatrix<f64>, psi_z: ExcitationSpec, bank: FilterBank, alpha: f64) -> Result<Self> {
        let (k, n) = theta_star.shape();
        if psi_z.dim() != k || bank.k() != k {
            return Err(Error::dim("synthetic regressor", k, format!("{} channels, {} filters", psi_z.dim(), bank.k())));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidScenario(format!("alpha must be > 0, got {alpha}")));
        }
        let path = DremPath {
            name: "synthetic".into(),
            bank,
            n,
            alpha,
            prefix: String::new(),
            theta_name: "Theta".into(),
        };
        let mut layout = StateLayout::new();
        let slots = path.register(&mut layout);
        Ok(SyntheticRegression {
            theta_star,
            psi_z,
            path,
            layout,
            slots,
        })
    }

    pub fn slots(&self) -> &PathSlots {
        &self.slots
    }

    pub fn initial_state(&self, theta0: &DMatrix<f64>) -> Result<CoupledState> {
        check_theta0(&self.path, theta0)?;
        let mut s = CoupledState::zeros(self.layout.clone());
        self.path.init(&self.slots, &mut s.values, theta0);
        Ok(s)
    }

    pub fn run(&self, theta0: &DMatrix<f64>, t_end: f64, step: f64, log_every: usize) -> Result<Trajectory> {
        integrate(self, self.initial_state(theta0)?, 0.0, t_end, step, log_every)
    }

    /// Rebuilds `(t, Theta, s0)` for every logged sample.
    pub fn history(&self, series: &crate::sim::TimeSeries) -> Vec<(f64, DMatrix<f64>, f64)> {
        let (k, n) = self.theta_star.shape();
        let cols: Vec<&[f64]> = (1..=k)
            .flat_map(|i| (1..=n).map(move |j| (i, j)))
            .map(|(i, j)| series.column(&format!("Theta_{i}_{j}")).expect("Theta logged"))
            .collect();
        let s0 = series.column("s0").expect("s0 logged");
        (0..series.len())
            .map(|r| (series.t[r], DMatrix::from_row_iterator(k, n, cols.iter().map(|c| c[r])), s0[r]))
            .collect()
    }
}

impl VectorField for SyntheticRegression {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let z = self.psi_z.eval(t);
        let yv = self.theta_star.transpose() * &z;
        self.path.rhs(&self.slots, y, z.as_slice(), yv.as_slice(), dy);
    }
}
