//! Gradient update law on the mixed regression, the auxiliary excitation
//! scalar `s0`, and finite-time reconstruction under interval excitation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::regressor::DremSignals;

/// Running estimate for one regression path.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorState {
    pub theta: DMatrix<f64>,
    theta0: DMatrix<f64>,
    /// Starts at 1, non-increasing, stays in (0, 1].
    pub s0: f64,
    pub alpha: f64,
    pub sigma: Option<f64>,
}

impl EstimatorState {
    pub fn new(theta0: DMatrix<f64>, alpha: f64, sigma: Option<f64>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidScenario(format!("alpha must be > 0, got {alpha}")));
        }
        if let Some(s) = sigma {
            check_sigma(s)?;
        }
        Ok(EstimatorState {
            theta: theta0.clone(),
            theta0,
            s0: 1.0,
            alpha,
            sigma,
        })
    }

    pub fn theta0(&self) -> &DMatrix<f64> {
        &self.theta0
    }
}

/// Reconstructed parameter matrix at time `t_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTimeEstimate {
    pub theta_f: DMatrix<f64>,
    pub t_c: f64,
    pub sigma_used: f64,
    pub ie_satisfied: bool,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSigma(sigma))
    }
}

/// `alpha * delta * (mixed - delta * theta)`.
pub fn update_rhs(alpha: f64, theta: &DMatrix<f64>, signals: &DremSignals) -> DMatrix<f64> {
    (&signals.mixed - theta * signals.delta) * (alpha * signals.delta)
}

/// Slice form of [`update_rhs`].
pub(crate) fn update_rhs_into(alpha: f64, delta: f64, mixed: &[f64], theta: &[f64], out: &mut [f64]) {
    let g = alpha * delta;
    for i in 0..out.len() {
        out[i] = g * (mixed[i] - delta * theta[i]);
    }
}

/// `-alpha * delta^2 * s0`, so that `s0(t) = exp(-alpha * int delta^2)`.
pub fn s0_rhs(alpha: f64, s0: f64, delta: f64) -> f64 {
    -alpha * delta * delta * s0
}

/// Switching signal: `1 - sigma` while `s0 > 1 - sigma`, `s0` afterwards.
pub fn clamp_s(s0: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(if s0 > 1.0 - sigma { 1.0 - sigma } else { s0 })
}

/// `(theta - s theta0) / (1 - s)`; exact once `s0 <= 1 - sigma`.
pub fn reconstruct(theta: &DMatrix<f64>, theta0: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    (theta - theta0 * s) / (1.0 - s)
}

/// Finite-time estimate from the current state. With `sigma` unset, the
/// largest admissible level `1 - s0` is back-calculated.
pub fn finite_time_estimate(state: &EstimatorState, sigma: Option<f64>, t: f64) -> Result<FiniteTimeEstimate> {
    let sigma_used = match sigma.or(state.sigma) {
        Some(s) => {
            check_sigma(s)?;
            s
        }
        None => back_calculate_sigma(state.s0)?,
    };
    let s = clamp_s(state.s0, sigma_used)?;
    Ok(FiniteTimeEstimate {
        theta_f: reconstruct(&state.theta, &state.theta0, s),
        t_c: t,
        sigma_used,
        ie_satisfied: state.s0 <= 1.0 - sigma_used,
    })
}

/// Required `int delta^2` for excitation level `sigma`: `-ln(1 - sigma) / alpha`.
pub fn ie_threshold(alpha: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidScenario(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(-(-sigma).ln_1p() / alpha)
}

/// `sigma = 1 - s0(t_c)`.
pub fn back_calculate_sigma(s0_at_tc: f64) -> Result<f64> {
    if !(s0_at_tc < 1.0) || !(s0_at_tc > 0.0) {
        return Err(Error::NoExcitation);
    }
    Ok(1.0 - s0_at_tc)
}
