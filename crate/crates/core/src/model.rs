//! Plant, exosystem, augmented tracking system and the scenario file.
//!
//! The plant is `x' = A x + B u + C v` and the exosystem `v' = D w`, where
//! `w = v` for an autonomous exosystem. Tracking is posed on the augmented
//! state `X = col(x - v, v)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::is_positive_definite;
use crate::serde_matrix::{opt_rows, rows, vector};

fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

fn shape(m: &DMatrix<f64>) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlantFile", into = "PlantFile")]
pub struct LtiPlant {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct PlantFile {
    #[serde(with = "rows")]
    a: DMatrix<f64>,
    #[serde(with = "rows")]
    b: DMatrix<f64>,
    #[serde(default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    c: Option<DMatrix<f64>>,
}

impl TryFrom<PlantFile> for LtiPlant {
    type Error = Error;

    fn try_from(f: PlantFile) -> Result<Self> {
        let n = f.a.nrows();
        let c = f.c.unwrap_or_else(|| DMatrix::zeros(n, n));
        LtiPlant::new(f.a, f.b, c)
    }
}

impl From<LtiPlant> for PlantFile {
    fn from(p: LtiPlant) -> Self {
        PlantFile {
            a: p.a,
            b: p.b,
            c: Some(p.c),
        }
    }
}

impl LtiPlant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::dim("plant A", "nonempty square", shape(&a)));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::dim("plant B", format!("{n}xm, m>0"), shape(&b)));
        }
        if c.shape() != (n, n) {
            return Err(Error::dim("plant C", format!("{n}x{n}"), shape(&c)));
        }
        if !(all_finite(&a) && all_finite(&b) && all_finite(&c)) {
            return Err(Error::InvalidScenario("plant matrices must be finite".into()));
        }
        Ok(LtiPlant { a, b, c })
    }

    /// Plant without exosystem coupling.
    pub fn uncoupled(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, b, DMatrix::zeros(n, n))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// `A x + B u + C v`.
    pub fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        if x.len() != n || v.len() != n || u.len() != self.m() {
            return Err(Error::dim(
                "plant_rhs",
                format!("x,v in R^{n}, u in R^{}", self.m()),
                format!("x {}, u {}, v {}", x.len(), u.len(), v.len()),
            ));
        }
        Ok(&self.a * x + &self.b * u + &self.c * v)
    }

    /// The stacked regression target `[A^T; B^T; C^T]`, or `[A^T; B^T]` when
    /// the coupling is not part of the regression.
    pub fn stacked_transpose(&self, with_c: bool) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let k = n + m + if with_c { n } else { 0 };
        let mut out = DMatrix::zeros(k, n);
        out.rows_mut(0, n).copy_from(&self.a.transpose());
        out.rows_mut(n, m).copy_from(&self.b.transpose());
        if with_c {
            out.rows_mut(n + m, n).copy_from(&self.c.transpose());
        }
        out
    }

    /// Inverse of [`stacked_transpose`](Self::stacked_transpose).
    pub fn from_stacked_transpose(psi: &DMatrix<f64>, n: usize, m: usize) -> Result<Self> {
        let with_c = match psi.nrows() {
            k if k == n + m => false,
            k if k == 2 * n + m => true,
            _ => {
                return Err(Error::dim(
                    "stacked estimate",
                    format!("{}x{n} or {}x{n}", n + m, 2 * n + m),
                    shape(psi),
                ))
            }
        };
        if psi.ncols() != n {
            return Err(Error::dim("stacked estimate", format!("kx{n}"), shape(psi)));
        }
        let a = psi.rows(0, n).transpose();
        let b = psi.rows(n, m).transpose();
        let c = if with_c {
            psi.rows(n + m, n).transpose()
        } else {
            DMatrix::zeros(n, n)
        };
        Self::new(a, b, c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExoFile", into = "ExoFile")]
pub struct Exosystem {
    d: DMatrix<f64>,
    autonomous: bool,
}

#[derive(Serialize, Deserialize)]
struct ExoFile {
    #[serde(with = "rows")]
    d: DMatrix<f64>,
    #[serde(default = "default_true")]
    autonomous: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<ExoFile> for Exosystem {
    type Error = Error;

    fn try_from(f: ExoFile) -> Result<Self> {
        Exosystem::new(f.d, f.autonomous)
    }
}

impl From<Exosystem> for ExoFile {
    fn from(e: Exosystem) -> Self {
        ExoFile {
            d: e.d,
            autonomous: e.autonomous,
        }
    }
}

impl Exosystem {
    pub fn new(d: DMatrix<f64>, autonomous: bool) -> Result<Self> {
        if d.nrows() == 0 || d.ncols() == 0 {
            return Err(Error::dim("exosystem D", "nonempty", shape(&d)));
        }
        if autonomous && !d.is_square() {
            return Err(Error::dim("autonomous exosystem D", "square", shape(&d)));
        }
        if !all_finite(&d) {
            return Err(Error::InvalidScenario("exosystem matrix must be finite".into()));
        }
        Ok(Exosystem { d, autonomous })
    }

    pub fn autonomous(d: DMatrix<f64>) -> Result<Self> {
        Self::new(d, true)
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn q(&self) -> usize {
        self.d.ncols()
    }

    /// `D w`.
    pub fn rhs(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        if w.len() != self.q() {
            return Err(Error::dim("exo_rhs", self.q(), w.len()));
        }
        Ok(&self.d * w)
    }
}

/// Discounted LQR data for the augmented tracking state `col(x - v, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q_hat: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub gamma: f64,
    pub pi: DMatrix<f64>,
}

/// Blocks recovered from an augmented system.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedBlocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl AugmentedSystem {
    /// Plant state dimension `n` (the augmented state has `2n`).
    pub fn n(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn blocks(&self) -> AugmentedBlocks {
        let n = self.n();
        let a = self.a.view((0, 0), (n, n)).into_owned();
        let d = self.a.view((n, n), (n, n)).into_owned();
        let upper = self.a.view((0, n), (n, n)).into_owned();
        let c = &upper - &a + &d;
        let b = self.b.rows(0, n).into_owned();
        AugmentedBlocks { a, b, c, d }
    }
}

/// Builds `calA = [[A, A + C - D], [0, D]]`, `calB = [B; 0]`,
/// `Qhat = diag(Q, 0)`. `pi` defaults to the identity.
pub fn build_augmented(
    plant: &LtiPlant,
    exo: &Exosystem,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    gamma: f64,
    pi: Option<&DMatrix<f64>>,
) -> Result<AugmentedSystem> {
    let (n, m) = (plant.n(), plant.m());
    if exo.d().shape() != (n, n) {
        return Err(Error::dim("exosystem D for tracking", format!("{n}x{n}"), shape(exo.d())));
    }
    if q.shape() != (n, n) {
        return Err(Error::dim("Q", format!("{n}x{n}"), shape(q)));
    }
    if r.shape() != (m, m) {
        return Err(Error::dim("R", format!("{m}x{m}"), shape(r)));
    }
    if !is_positive_definite(q) {
        return Err(Error::InvalidScenario("Q must be symmetric positive definite".into()));
    }
    if !is_positive_definite(r) {
        return Err(Error::InvalidScenario("R must be symmetric positive definite".into()));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidScenario(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    let pi = match pi {
        Some(p) => {
            if p.shape() != (2 * n, 2 * n) {
                return Err(Error::dim("Pi", format!("{0}x{0}", 2 * n), shape(p)));
            }
            if !is_positive_definite(p) {
                return Err(Error::InvalidScenario("Pi must be symmetric positive definite".into()));
            }
            p.clone()
        }
        None => DMatrix::identity(2 * n, 2 * n),
    };

    let d = exo.d();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(plant.a());
    a.view_mut((0, n), (n, n)).copy_from(&(plant.a() + plant.c() - d));
    a.view_mut((n, n), (n, n)).copy_from(d);
    let mut b = DMatrix::zeros(2 * n, m);
    b.rows_mut(0, n).copy_from(plant.b());
    let mut q_hat = DMatrix::zeros(2 * n, 2 * n);
    q_hat.view_mut((0, 0), (n, n)).copy_from(q);

    Ok(AugmentedSystem {
        a,
        b,
        q_hat,
        r: r.clone(),
        gamma,
        pi,
    })
}

/// One sinusoid `amplitude * sin(omega t + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: f64,
    /// rad/s
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExcitationChannel {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub terms: Vec<Sinusoid>,
}

impl ExcitationChannel {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|s| s.amplitude * (s.omega * t + s.phase).sin())
                .sum::<f64>()
    }
}

/// Sum-of-sinusoids signal, one channel per input component.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExcitationSpec {
    pub channels: Vec<ExcitationChannel>,
}

impl ExcitationSpec {
    pub fn zero(dim: usize) -> Self {
        ExcitationSpec {
            channels: vec![ExcitationChannel::default(); dim],
        }
    }

    pub fn sine(amplitude: f64, omega: f64) -> Self {
        ExcitationSpec {
            channels: vec![ExcitationChannel {
                offset: 0.0,
                terms: vec![Sinusoid {
                    amplitude,
                    omega,
                    phase: 0.0,
                }],
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(self.channels.len(), self.channels.iter().map(|c| c.eval(t)))
    }

    fn is_finite(&self) -> bool {
        self.channels.iter().all(|c| {
            c.offset.is_finite()
                && c.terms
                    .iter()
                    .all(|s| s.amplitude.is_finite() && s.omega.is_finite() && s.phase.is_finite())
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    /// Plant input during estimation.
    pub u: ExcitationSpec,
    /// Exosystem input, only for a non-autonomous exosystem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<ExcitationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Derivative-filter constant (1/s).
    pub lambda: f64,
    /// Extension constants for the (A, B, C) regression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bank: Option<Vec<f64>>,
    /// Extension constants for the D regression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exo_bank: Option<Vec<f64>>,
}

/// Step-size settings for the gain search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub initial_step: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub max_iterations: usize,
    pub local_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            initial_step: 0.01,
            max_step: 0.5,
            max_time: 1e4,
            max_iterations: 200_000,
            local_tol: 1e-4,
        }
    }
}

fn default_step() -> f64 {
    1e-3
}

fn default_tol() -> f64 {
    1e-8
}

fn default_log_every() -> usize {
    1
}

/// Full description of a run. Matrices are row-major nested arrays, times in
/// seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub plant: LtiPlant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exo: Option<Exosystem>,
    #[serde(with = "vector")]
    pub x0: DVector<f64>,
    #[serde(default, with = "opt_vector", skip_serializing_if = "Option::is_none")]
    pub v0: Option<DVector<f64>>,
    pub excitation: Excitation,
    pub filters: FilterConfig,
    /// Include C in the regression; defaults to true when an exosystem exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_c: Option<bool>,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub t_c: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub q: Option<DMatrix<f64>>,
    #[serde(default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub r: Option<DMatrix<f64>>,
    #[serde(default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub pi: Option<DMatrix<f64>>,
    #[serde(default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub k0: Option<DMatrix<f64>>,
    #[serde(default = "default_step")]
    pub step: f64,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol_grad: f64,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    #[serde(default)]
    pub search: SearchSettings,
}

mod opt_vector {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<DVector<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.as_slice().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DVector<f64>>, D::Error> {
        Ok(Option::<Vec<f64>>::deserialize(d)?.map(DVector::from_vec))
    }
}

fn check_bank(name: &str, bank: &[f64], k: usize) -> Result<()> {
    if bank.len() != k {
        return Err(Error::InvalidScenario(format!(
            "{name} needs {k} extension constants, got {}",
            bank.len()
        )));
    }
    if let Some(bad) = bank.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidScenario(format!("{name}: constant {bad} is not positive")));
    }
    for i in 0..bank.len() {
        for j in 0..i {
            if bank[i] == bank[j] {
                return Err(Error::InvalidScenario(format!(
                    "{name}: constants must be pairwise distinct ({} repeated)",
                    bank[i]
                )));
            }
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn n(&self) -> usize {
        self.plant.n()
    }

    pub fn m(&self) -> usize {
        self.plant.m()
    }

    pub fn estimates_c(&self) -> bool {
        self.estimate_c.unwrap_or(self.exo.is_some())
    }

    /// Width of the (A, B, C) regressor.
    pub fn regressor_dim(&self) -> usize {
        self.n() + self.m() + if self.estimates_c() { self.n() } else { 0 }
    }

    /// `0.01 i` for `i = 1..=k` unless configured.
    pub fn bank(&self) -> Vec<f64> {
        self.filters
            .bank
            .clone()
            .unwrap_or_else(|| default_bank(self.regressor_dim()))
    }

    pub fn exo_bank(&self) -> Option<Vec<f64>> {
        self.exo.as_ref().map(|e| {
            self.filters
                .exo_bank
                .clone()
                .unwrap_or_else(|| default_bank(e.q()))
        })
    }

    pub fn v0(&self) -> DVector<f64> {
        self.v0.clone().unwrap_or_else(|| DVector::zeros(self.n()))
    }

    pub fn q(&self) -> DMatrix<f64> {
        self.q.clone().unwrap_or_else(|| DMatrix::identity(self.n(), self.n()))
    }

    pub fn r(&self) -> DMatrix<f64> {
        self.r.clone().unwrap_or_else(|| DMatrix::identity(self.m(), self.m()))
    }

    pub fn k0(&self) -> DMatrix<f64> {
        self.k0
            .clone()
            .unwrap_or_else(|| DMatrix::zeros(self.m(), 2 * self.n()))
    }

    /// Augmented problem built from the configured (true) matrices.
    pub fn augmented(&self) -> Result<AugmentedSystem> {
        let exo = self
            .exo
            .as_ref()
            .ok_or_else(|| Error::InvalidScenario("tracking needs an exosystem".into()))?;
        build_augmented(&self.plant, exo, &self.q(), &self.r(), self.gamma, self.pi.as_ref())
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be > 0, got {}", self.step));
        }
        if !(self.t_c > 0.0 && self.t_c <= self.t_end && self.t_end.is_finite()) {
            return bad(format!("need 0 < t_c <= t_end, got t_c={} t_end={}", self.t_c, self.t_end));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidSigma(s));
            }
        }
        if !(self.filters.lambda.is_finite() && self.filters.lambda > 0.0) {
            return bad(format!("filter lambda must be > 0, got {}", self.filters.lambda));
        }
        if !(self.tol_grad.is_finite() && self.tol_grad > 0.0) {
            return bad(format!("tol_grad must be > 0, got {}", self.tol_grad));
        }
        if self.log_every == 0 {
            return bad("log_every must be >= 1".into());
        }
        if self.x0.len() != n {
            return Err(Error::dim("x0", n, self.x0.len()));
        }
        if let Some(v0) = &self.v0 {
            if v0.len() != n {
                return Err(Error::dim("v0", n, v0.len()));
            }
        }
        if self.excitation.u.dim() != m {
            return Err(Error::dim("excitation.u channels", m, self.excitation.u.dim()));
        }
        if !self.excitation.u.is_finite() {
            return bad("excitation must be finite".into());
        }
        if self.estimates_c() && self.exo.is_none() {
            return bad("estimate_c requires an exosystem".into());
        }
        check_bank("filters.bank", &self.bank(), self.regressor_dim())?;
        if let Some(exo) = &self.exo {
            if exo.n() != n {
                return Err(Error::dim("exosystem D rows", n, exo.n()));
            }
            check_bank("filters.exo_bank", &self.exo_bank().unwrap_or_default(), exo.q())?;
            match (&self.excitation.w, exo.is_autonomous()) {
                (None, false) => return bad("non-autonomous exosystem needs excitation.w".into()),
                (Some(w), false) if w.dim() != exo.q() || !w.is_finite() => {
                    return Err(Error::dim("excitation.w channels", exo.q(), w.dim()))
                }
                _ => {}
            }
        }
        if let Some(q) = &self.q {
            if q.shape() != (n, n) || !is_positive_definite(q) {
                return bad(format!("Q must be {n}x{n} positive definite"));
            }
        }
        if let Some(r) = &self.r {
            if r.shape() != (m, m) || !is_positive_definite(r) {
                return bad(format!("R must be {m}x{m} positive definite"));
            }
        }
        if let Some(pi) = &self.pi {
            if pi.shape() != (2 * n, 2 * n) || !is_positive_definite(pi) {
                return bad(format!("Pi must be {0}x{0} positive definite", 2 * n));
            }
        }
        if let Some(k0) = &self.k0 {
            if k0.shape() != (m, 2 * n) {
                return Err(Error::dim("K0", format!("{m}x{}", 2 * n), shape(k0)));
            }
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        Ok(())
    }
}

pub fn default_bank(k: usize) -> Vec<f64> {
    (1..=k).map(|i| 0.01 * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn example2() -> (LtiPlant, Exosystem) {
        let plant = LtiPlant::uncoupled(dmatrix![0.0, 1.0; -1.0, 0.0], dmatrix![3.0; 2.0]).unwrap();
        let exo = Exosystem::autonomous(dmatrix![0.0, 0.8; -0.8, -0.2]).unwrap();
        (plant, exo)
    }

    #[test]
    fn example2_augmented_blocks() {
        let (plant, exo) = example2();
        let aug = build_augmented(&plant, &exo, &DMatrix::identity(2, 2), &dmatrix![1.0], 0.5, None).unwrap();
        let upper = aug.a.view((0, 2), (2, 2)).into_owned();
        assert!((upper - dmatrix![0.0, 0.2; -0.2, 0.2]).amax() < 1e-15);
        assert_eq!(aug.b, dmatrix![3.0; 2.0; 0.0; 0.0]);
        assert_eq!(aug.pi, DMatrix::identity(4, 4));
        assert_eq!(aug.q_hat.view((2, 2), (2, 2)).amax(), 0.0);
    }

    #[test]
    fn c_equal_d_gives_a_in_upper_block() {
        let a = dmatrix![0.3, -1.0; 2.0, 0.7];
        let d = dmatrix![0.1, 0.2; -0.4, 0.5];
        let plant = LtiPlant::new(a.clone(), dmatrix![1.0; 0.0], d.clone()).unwrap();
        let aug = build_augmented(&plant, &Exosystem::autonomous(d).unwrap(), &DMatrix::identity(2, 2), &dmatrix![1.0], 0.0, None)
            .unwrap();
        assert!((aug.a.view((0, 2), (2, 2)).into_owned() - &a).amax() < 1e-15);
    }

    #[test]
    fn zero_exosystem() {
        let a = dmatrix![1.0, 2.0; 3.0, 4.0];
        let plant = LtiPlant::uncoupled(a.clone(), dmatrix![1.0; 1.0]).unwrap();
        let exo = Exosystem::autonomous(DMatrix::zeros(2, 2)).unwrap();
        let aug = build_augmented(&plant, &exo, &DMatrix::identity(2, 2), &dmatrix![1.0], 0.0, None).unwrap();
        let mut expect = DMatrix::zeros(4, 4);
        expect.view_mut((0, 0), (2, 2)).copy_from(&a);
        expect.view_mut((0, 2), (2, 2)).copy_from(&a);
        assert_eq!(aug.a, expect);
    }

    #[test]
    fn rejects_bad_weights_and_shapes() {
        let (plant, exo) = example2();
        let q_bad = dmatrix![1.0, 0.0; 0.0, -1.0];
        assert!(matches!(
            build_augmented(&plant, &exo, &q_bad, &dmatrix![1.0], 0.5, None),
            Err(Error::InvalidScenario(_))
        ));
        assert!(matches!(
            build_augmented(&plant, &exo, &DMatrix::identity(3, 3), &dmatrix![1.0], 0.5, None),
            Err(Error::Dimension { .. })
        ));
        let rect = Exosystem::new(DMatrix::zeros(2, 3), false).unwrap();
        assert!(build_augmented(&plant, &rect, &DMatrix::identity(2, 2), &dmatrix![1.0], 0.5, None).is_err());
        assert!(LtiPlant::new(dmatrix![1.0, 2.0], dmatrix![1.0], dmatrix![0.0]).is_err());
        assert!(Exosystem::autonomous(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn plant_and_exo_rhs() {
        let (plant, exo) = example2();
        let z = plant.rhs(&DVector::zeros(2), &DVector::zeros(1), &DVector::zeros(2)).unwrap();
        assert_eq!(z, DVector::zeros(2));
        let dx = plant.rhs(&dvector![1.0, 0.0], &dvector![1.0], &DVector::zeros(2)).unwrap();
        assert_eq!(dx, dvector![3.0, 1.0]);
        let dv = exo.rhs(&dvector![1.0, -1.0]).unwrap();
        assert!((dv - dvector![-0.8, -0.6]).amax() < 1e-15);
        assert!(plant.rhs(&dvector![1.0], &dvector![1.0], &DVector::zeros(2)).is_err());
        assert!(exo.rhs(&dvector![1.0]).is_err());
    }

    #[test]
    fn stacked_round_trip() {
        let plant = LtiPlant::new(
            dmatrix![1.0, 2.0; 3.0, 4.0],
            dmatrix![5.0; 6.0],
            dmatrix![7.0, 8.0; 9.0, 10.0],
        )
        .unwrap();
        let psi = plant.stacked_transpose(true);
        assert_eq!(psi.shape(), (5, 2));
        assert_eq!(psi.row(2).iter().copied().collect::<Vec<_>>(), vec![5.0, 6.0]);
        assert_eq!(LtiPlant::from_stacked_transpose(&psi, 2, 1).unwrap(), plant);
        let ab = plant.stacked_transpose(false);
        let back = LtiPlant::from_stacked_transpose(&ab, 2, 1).unwrap();
        assert_eq!(back.c(), &DMatrix::zeros(2, 2));
    }

    #[test]
    fn excitation_eval() {
        let e = ExcitationSpec::sine(100.0, 10.0);
        assert_eq!(e.eval(0.0)[0], 0.0);
        let t = std::f64::consts::PI / 20.0;
        assert!((e.eval(t)[0] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_json_validation() {
        let json = r#"{
            "id": "t",
            "plant": {"a": [[-1.0]], "b": [[1.0]]},
            "x0": [0.0],
            "excitation": {"u": [{"terms": [{"amplitude": 1.0, "omega": 2.0}]}]},
            "filters": {"lambda": 0.1, "bank": [0.1, 0.2]},
            "alpha": 1.0, "t_c": 5.0, "t_end": 5.0
        }"#;
        let cfg = ScenarioConfig::from_json_str(json).unwrap();
        assert_eq!(cfg.regressor_dim(), 2);
        assert!(!cfg.estimates_c());
        assert_eq!(cfg.step, 1e-3);

        let dup = json.replace("[0.1, 0.2]", "[0.1, 0.1]");
        assert!(matches!(ScenarioConfig::from_json_str(&dup), Err(Error::InvalidScenario(_))));
        let short = json.replace("[0.1, 0.2]", "[0.1]");
        assert!(ScenarioConfig::from_json_str(&short).is_err());
        let sig = json.replace("\"alpha\"", "\"sigma\": 1.5, \"alpha\"");
        assert!(matches!(ScenarioConfig::from_json_str(&sig), Err(Error::InvalidSigma(_))));
        let tc = json.replace("\"t_c\": 5.0", "\"t_c\": 6.0");
        assert!(ScenarioConfig::from_json_str(&tc).is_err());
        let ragged = json.replace("[[-1.0]]", "[[-1.0], [1.0, 2.0]]");
        assert!(ScenarioConfig::from_json_str(&ragged).is_err());
    }
}
