//! Regression signals for dynamic regressor extension and mixing.
//!
//! A first-order prefilter `1/(p + lambda0)` turns the unmeasured derivative
//! into a measurable regressand; a bank of `k` filters `1/(p + lambda_i)` then
//! extends the vector regression `psi_y = Theta^T psi_z` into the square
//! matrix form `H_y = F Theta`, and multiplying by `adj(F)` gives one scalar
//! regression `mixed_ij = delta * Theta_ij` per entry.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::adjugate;

/// Filter constants for one regression path. All filter states start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    lambda0: f64,
    lambdas: Vec<f64>,
}

impl FilterBank {
    pub fn new(lambda0: f64, lambdas: Vec<f64>) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::InvalidScenario(format!("filter constant must be > 0, got {lambda0}")));
        }
        if lambdas.is_empty() {
            return Err(Error::InvalidScenario("extension bank is empty".into()));
        }
        for (i, &l) in lambdas.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidScenario(format!("extension constant {l} is not positive")));
            }
            if lambdas[..i].contains(&l) {
                return Err(Error::InvalidScenario(format!("extension constant {l} repeated")));
            }
        }
        Ok(FilterBank { lambda0, lambdas })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Number of extension channels (the regressor width).
    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// `d/dt psi = -lambda0 psi + input`, elementwise.
    pub fn prefilter_rhs(&self, state: &[f64], input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(state.len(), input.len());
        for ((o, s), u) in out.iter_mut().zip(state).zip(input) {
            *o = -self.lambda0 * s + u;
        }
    }

    /// Derivatives of the extended matrices. Row `i` of `F` (k x k) obeys
    /// `-lambda_i F_i + psi_z^T`, row `i` of `H_y` (k x n) obeys
    /// `-lambda_i H_i + psi_y^T`. All matrices are row-major slices.
    pub fn extension_rhs(
        &self,
        f: &[f64],
        hy: &[f64],
        psi_z: &[f64],
        psi_y: &[f64],
        df: &mut [f64],
        dhy: &mut [f64],
    ) {
        let k = self.k();
        let n = psi_y.len();
        debug_assert_eq!(psi_z.len(), k);
        debug_assert_eq!(f.len(), k * k);
        debug_assert_eq!(hy.len(), k * n);
        for (i, &l) in self.lambdas.iter().enumerate() {
            for j in 0..k {
                df[i * k + j] = -l * f[i * k + j] + psi_z[j];
            }
            for j in 0..n {
                dhy[i * n + j] = -l * hy[i * n + j] + psi_y[j];
            }
        }
    }

    /// Matrix-valued form of [`extension_rhs`](Self::extension_rhs).
    pub fn filter_rhs(
        &self,
        f: &DMatrix<f64>,
        hy: &DMatrix<f64>,
        psi_z: &DVector<f64>,
        psi_y: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let k = self.k();
        let n = psi_y.len();
        if f.shape() != (k, k) || psi_z.len() != k || hy.shape() != (k, n) {
            return Err(Error::dim(
                "filter_rhs",
                format!("F {k}x{k}, psi_z {k}, H {k}x{n}"),
                format!(
                    "F {}x{}, psi_z {}, H {}x{}",
                    f.nrows(),
                    f.ncols(),
                    psi_z.len(),
                    hy.nrows(),
                    hy.ncols()
                ),
            ));
        }
        let lam = DVector::from_column_slice(&self.lambdas);
        let mut df = -DMatrix::from_diagonal(&lam) * f;
        let mut dh = -DMatrix::from_diagonal(&lam) * hy;
        for i in 0..k {
            for j in 0..k {
                df[(i, j)] += psi_z[j];
            }
            for j in 0..n {
                dh[(i, j)] += psi_y[j];
            }
        }
        Ok((df, dh))
    }
}

/// The `lambda0`-filtered derivative of a measured signal, without
/// differentiating: `v(t) - exp(-lambda0 t) v(0) - lambda0 v_l(t)`, where
/// `v_l` is `v` passed through `1/(p + lambda0)` from a zero state.
pub fn filtered_derivative(
    v_now: &DVector<f64>,
    v0: &DVector<f64>,
    v_l_now: &DVector<f64>,
    lambda0: f64,
    t: f64,
) -> DVector<f64> {
    v_now - v0 * (-lambda0 * t).exp() - v_l_now * lambda0
}

/// Slice version of [`filtered_derivative`] writing into `out`.
pub(crate) fn filtered_derivative_into(v: &[f64], v0: &[f64], v_l: &[f64], lambda0: f64, t: f64, out: &mut [f64]) {
    let decay = (-lambda0 * t).exp();
    for i in 0..out.len() {
        out[i] = v[i] - decay * v0[i] - lambda0 * v_l[i];
    }
}

/// Regressand `psi_y` for the plant regression: `x - lambda0 psi_x`, minus the
/// decaying initial-state term so that `psi_y = A psi_x + B psi_u + C psi_v`
/// holds exactly for any `x(0)`.
pub fn assemble_regressand(
    bank: &FilterBank,
    x: &DVector<f64>,
    x0: &DVector<f64>,
    psi_x: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    filtered_derivative(x, x0, psi_x, bank.lambda0, t)
}

/// Mixed scalar-coefficient regression: `delta = det(F)`,
/// `mixed = adj(F) H_y`, so that `mixed = delta * Theta` on exact data.
#[derive(Clone, Debug, PartialEq)]
pub struct DremSignals {
    pub delta: f64,
    pub mixed: DMatrix<f64>,
}

pub fn mix(f: &DMatrix<f64>, hy: &DMatrix<f64>) -> DremSignals {
    assert!(f.is_square() && f.nrows() == hy.nrows(), "mix: F must be k x k and H_y k x n");
    let (adj, delta) = adjugate(f);
    DremSignals {
        delta,
        mixed: adj * hy,
    }
}
