//! Fixed-step RK4 integration of a flat coupled state, with named components
//! and CSV-exportable time series.

use nalgebra::{DMatrix, DVector};
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

/// Right-hand side `dy = f(t, y)` over a flat state.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64])> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }
}

/// Scratch buffers for the classical fourth-order Runge-Kutta step.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `y` in place from `t` to `t + h`. On a non-finite stage
    /// derivative `y` is left untouched and the index of the first bad entry is
    /// returned.
    pub fn step<F: VectorField + ?Sized>(&mut self, f: &F, t: f64, y: &mut [f64], h: f64) -> std::result::Result<(), usize> {
        let n = y.len();
        f.eval(t, y, &mut self.k1);
        first_non_finite(&self.k1).map_or(Ok(()), Err)?;
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        f.eval(t + 0.5 * h, &self.tmp, &mut self.k2);
        first_non_finite(&self.k2).map_or(Ok(()), Err)?;
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        f.eval(t + 0.5 * h, &self.tmp, &mut self.k3);
        first_non_finite(&self.k3).map_or(Ok(()), Err)?;
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f.eval(t + h, &self.tmp, &mut self.k4);
        first_non_finite(&self.k4).map_or(Ok(()), Err)?;
        for i in 0..n {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        first_non_finite(y).map_or(Ok(()), Err)
    }
}

fn first_non_finite(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

/// One RK4 step of `f` from `(t, y)`.
pub fn rk4_step<F: VectorField + ?Sized>(f: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidScenario(format!("step must be > 0, got {h}")));
    }
    let mut out = y.to_vec();
    Rk4::new(y.len())
        .step(f, t, &mut out, h)
        .map_err(|i| Error::NonFinite {
            t,
            what: format!("state entry {i}"),
        })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Scalar,
    Vector,
    Matrix { rows: usize, cols: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub range: Range<usize>,
    kind: Kind,
}

impl Component {
    fn column_names(&self) -> Vec<String> {
        match self.kind {
            Kind::Scalar => vec![self.name.clone()],
            Kind::Vector => (1..=self.range.len()).map(|i| format!("{}{i}", self.name)).collect(),
            Kind::Matrix { rows, cols } => (1..=rows)
                .flat_map(|i| (1..=cols).map(move |j| (i, j)))
                .map(|(i, j)| format!("{}_{i}_{j}", self.name))
                .collect(),
        }
    }
}

/// Index map from component name to its slice of the flat state. Matrices are
/// stored row-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateLayout {
    components: Vec<Component>,
    len: usize,
}

impl StateLayout {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, name: &str, size: usize, kind: Kind) -> Range<usize> {
        assert!(self.get(name).is_none(), "duplicate state component {name}");
        let range = self.len..self.len + size;
        self.len += size;
        self.components.push(Component {
            name: name.to_string(),
            range: range.clone(),
            kind,
        });
        range
    }

    pub fn scalar(&mut self, name: &str) -> usize {
        self.push(name, 1, Kind::Scalar).start
    }

    pub fn vector(&mut self, name: &str, len: usize) -> Range<usize> {
        self.push(name, len, Kind::Vector)
    }

    pub fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Range<usize> {
        self.push(name, rows * cols, Kind::Matrix { rows, cols })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn column_names(&self) -> Vec<String> {
        self.components.iter().flat_map(Component::column_names).collect()
    }

    /// Name of the component holding flat index `idx`.
    pub fn owner(&self, idx: usize) -> Option<&str> {
        self.components
            .iter()
            .find(|c| c.range.contains(&idx))
            .map(|c| c.name.as_str())
    }
}

/// A flat state vector together with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledState {
    pub layout: StateLayout,
    pub values: Vec<f64>,
}

impl CoupledState {
    pub fn zeros(layout: StateLayout) -> Self {
        let values = vec![0.0; layout.len()];
        CoupledState { layout, values }
    }

    fn component(&self, name: &str) -> &Component {
        self.layout
            .get(name)
            .unwrap_or_else(|| panic!("no state component named {name}"))
    }

    pub fn slice(&self, name: &str) -> &[f64] {
        &self.values[self.component(name).range.clone()]
    }

    pub fn slice_mut(&mut self, name: &str) -> &mut [f64] {
        let r = self.component(name).range.clone();
        &mut self.values[r]
    }

    pub fn scalar(&self, name: &str) -> f64 {
        self.slice(name)[0]
    }

    pub fn vector(&self, name: &str) -> DVector<f64> {
        DVector::from_column_slice(self.slice(name))
    }

    pub fn matrix(&self, name: &str) -> DMatrix<f64> {
        match self.component(name).kind {
            Kind::Matrix { rows, cols } => DMatrix::from_row_slice(rows, cols, self.slice(name)),
            _ => panic!("state component {name} is not a matrix"),
        }
    }

    pub fn set_matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        let dst = self.slice_mut(name);
        assert_eq!(dst.len(), m.len());
        for (d, v) in dst.iter_mut().zip(m.transpose().iter()) {
            *d = *v;
        }
    }
}

/// Samples on a uniform grid, one named column per logged channel.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    /// Grid spacing between logged samples (s).
    pub spacing: f64,
    pub t: Vec<f64>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(spacing: f64, names: Vec<String>) -> Self {
        let columns = vec![Vec::new(); names.len()];
        TimeSeries {
            spacing,
            t: Vec::new(),
            names,
            columns,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn push_row(&mut self, t: f64, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.t.push(t);
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.t.len() {
            return Err(Error::dim("time series column", self.t.len(), values.len()));
        }
        self.names.push(name.into());
        self.columns.push(values);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name).and_then(|c| c.last().copied())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend(self.names.iter().cloned());
        wr.write_record(&header)?;
        let mut rec = Vec::with_capacity(header.len());
        for i in 0..self.t.len() {
            rec.clear();
            rec.push(self.t[i].to_string());
            rec.extend(self.columns.iter().map(|c| c[i].to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Result of [`integrate`]: the logged series and the terminal state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub series: TimeSeries,
    pub final_state: CoupledState,
    pub t_final: f64,
}

/// Integrates `field` from `y0` at `t0` to `t_end` with fixed step `h`,
/// logging every `log_every`-th step (plus the first and last sample).
///
/// Times are computed as `t0 + i h`, so runs are bitwise reproducible.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    y0: CoupledState,
    t0: f64,
    t_end: f64,
    h: f64,
    log_every: usize,
) -> Result<Trajectory> {
    if !(h > 0.0) || log_every == 0 {
        return Err(Error::InvalidScenario(format!(
            "need step > 0 and log_every >= 1, got {h} and {log_every}"
        )));
    }
    if field.dim() != y0.values.len() {
        return Err(Error::dim("integrate state", field.dim(), y0.values.len()));
    }
    let span = t_end - t0;
    let steps = (span / h).round();
    if span < 0.0 || (steps * h - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::InvalidScenario(format!(
            "step {h} does not divide the interval [{t0}, {t_end}]"
        )));
    }
    let steps = steps as usize;

    let mut series = TimeSeries::new(h * log_every as f64, y0.layout.column_names());
    let CoupledState { layout, mut values } = y0;
    let mut rk = Rk4::new(values.len());
    series.push_row(t0, &values);
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        rk.step(field, t, &mut values, h).map_err(|idx| Error::NonFinite {
            t,
            what: layout.owner(idx).unwrap_or("state").to_string(),
        })?;
        if (i + 1) % log_every == 0 || i + 1 == steps {
            series.push_row(t0 + (i + 1) as f64 * h, &values);
        }
    }
    Ok(Trajectory {
        series,
        final_state: CoupledState { layout, values },
        t_final: t0 + steps as f64 * h,
    })
}
