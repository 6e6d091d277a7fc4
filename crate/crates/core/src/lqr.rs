//! Discounted LQR on the augmented tracking system.
//!
//! For a gain `K` in the stabilizing set (`A - B K - 0.5 gamma I` Hurwitz) the
//! cost is `f(K) = tr(P(K) Pi)` where `P(K)` solves the fixed-gain discounted
//! Riccati (Lyapunov) equation. The gain is searched by the gradient flow
//! `K' = -grad f(K)`, and Kleinman's iteration is kept as an independent
//! oracle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    is_positive_definite, is_symmetric, max_real_part, max_sym_eigenvalue, min_sym_eigenvalue, solve_lyapunov,
    spectrum,
};
use crate::model::AugmentedSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscountedLqrProblem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub gamma: f64,
    pub pi: DMatrix<f64>,
    r_inv: DMatrix<f64>,
}

impl DiscountedLqrProblem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        gamma: f64,
        pi: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        if !a.is_square() || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) || pi.shape() != (n, n) {
            return Err(Error::dim(
                "discounted LQR problem",
                format!("A {n}x{n}, B {n}xm, Q {n}x{n}, R mxm, Pi {n}x{n}"),
                format!(
                    "A {:?}, B {:?}, Q {:?}, R {:?}, Pi {:?}",
                    a.shape(),
                    b.shape(),
                    q.shape(),
                    r.shape(),
                    pi.shape()
                ),
            ));
        }
        if !is_symmetric(&q, 1e-12) || min_sym_eigenvalue(&q) < -1e-12 * (1.0 + q.amax()) {
            return Err(Error::InvalidScenario("Q must be symmetric positive semidefinite".into()));
        }
        if !is_positive_definite(&r) {
            return Err(Error::InvalidScenario("R must be symmetric positive definite".into()));
        }
        if !is_positive_definite(&pi) {
            return Err(Error::InvalidScenario("Pi must be symmetric positive definite".into()));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidScenario(format!("gamma must be >= 0, got {gamma}")));
        }
        let r_inv = r.clone().try_inverse().ok_or_else(|| Error::InvalidScenario("R is singular".into()))?;
        Ok(DiscountedLqrProblem {
            a,
            b,
            q,
            r,
            gamma,
            pi,
            r_inv,
        })
    }

    pub fn from_augmented(aug: &AugmentedSystem) -> Result<Self> {
        Self::new(aug.a.clone(), aug.b.clone(), aug.q_hat.clone(), aug.r.clone(), aug.gamma, aug.pi.clone())
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// `A - 0.5 gamma I`.
    pub fn shifted_a(&self) -> DMatrix<f64> {
        &self.a - DMatrix::identity(self.state_dim(), self.state_dim()) * (0.5 * self.gamma)
    }

    /// `A - B K - 0.5 gamma I`.
    pub fn closed_loop(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        self.shifted_a() - &self.b * k
    }

    fn check_gain(&self, k: &DMatrix<f64>) -> Result<()> {
        if k.shape() != (self.input_dim(), self.state_dim()) {
            return Err(Error::dim(
                "gain K",
                format!("{}x{}", self.input_dim(), self.state_dim()),
                format!("{}x{}", k.nrows(), k.ncols()),
            ));
        }
        Ok(())
    }
}

/// Membership in the stabilizing set, with the shifted closed-loop spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stability {
    pub stabilizing: bool,
    pub spectrum: Vec<(f64, f64)>,
}

impl Stability {
    pub fn max_real(&self) -> f64 {
        max_real_part(&self.spectrum)
    }

    fn into_error(self) -> Error {
        Error::NotStabilizing {
            max_real: self.max_real(),
            spectrum: self.spectrum,
        }
    }
}

pub fn is_stabilizing(problem: &DiscountedLqrProblem, k: &DMatrix<f64>) -> Result<Stability> {
    problem.check_gain(k)?;
    let spectrum = spectrum(&problem.closed_loop(k));
    let stabilizing = k.iter().all(|v| v.is_finite()) && max_real_part(&spectrum) < 0.0;
    Ok(Stability { stabilizing, spectrum })
}

fn require_stabilizing(problem: &DiscountedLqrProblem, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let st = is_stabilizing(problem, k)?;
    if !st.stabilizing {
        return Err(st.into_error());
    }
    Ok(problem.closed_loop(k))
}

/// `P(K)`: solves `A_K^T P + P A_K + K^T R K + Q = 0` with `A_K = A - B K - 0.5 gamma I`.
pub fn value_matrix(problem: &DiscountedLqrProblem, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let acl = require_stabilizing(problem, k)?;
    let w = k.transpose() * &problem.r * k + &problem.q;
    solve_lyapunov(&acl, &w)
}

/// `Z(K)`: solves `A_K Z + Z A_K^T + Pi = 0`.
pub fn state_weighting(problem: &DiscountedLqrProblem, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let acl = require_stabilizing(problem, k)?;
    solve_lyapunov(&acl.transpose(), &problem.pi)
}

/// `f(K) = tr(P(K) Pi)`, `+inf` outside the stabilizing set.
pub fn cost(problem: &DiscountedLqrProblem, k: &DMatrix<f64>) -> f64 {
    match value_matrix(problem, k) {
        Ok(p) => (p * &problem.pi).trace(),
        Err(_) => f64::INFINITY,
    }
}

/// `grad f(K) = 2 (R K - B^T P) Z`.
pub fn gradient(problem: &DiscountedLqrProblem, k: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let z = state_weighting(problem, k)?;
    Ok((&problem.r * k - problem.b.transpose() * p) * z * 2.0)
}

/// One point of the gain search.
#[derive(Clone, Debug, PartialEq)]
pub struct GainIterate {
    pub t: f64,
    pub k: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub cost: f64,
    pub grad: DMatrix<f64>,
}

impl GainIterate {
    pub fn grad_norm(&self) -> f64 {
        self.grad.norm()
    }
}

/// Evaluates `P`, `Z`, cost and gradient at `k`.
pub fn evaluate(problem: &DiscountedLqrProblem, k: &DMatrix<f64>, t: f64) -> Result<GainIterate> {
    let acl = require_stabilizing(problem, k)?;
    let p = solve_lyapunov(&acl, &(k.transpose() * &problem.r * k + &problem.q))?;
    let z = solve_lyapunov(&acl.transpose(), &problem.pi)?;
    let grad = (&problem.r * k - problem.b.transpose() * &p) * &z * 2.0;
    let cost = (&p * &problem.pi).trace();
    Ok(GainIterate {
        t,
        k: k.clone(),
        p,
        z,
        cost,
        grad,
    })
}

/// Frobenius norm of `P A + A^T P - gamma P - P B R^-1 B^T P + Q`.
pub fn are_residual(problem: &DiscountedLqrProblem, p: &DMatrix<f64>) -> f64 {
    let a = &problem.a;
    (p * a + a.transpose() * p - p * problem.gamma - p * &problem.b * &problem.r_inv * problem.b.transpose() * p
        + &problem.q)
        .norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KleinmanResult {
    pub p: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub iterations: usize,
    /// `K_0, K_1, ...` in order.
    pub gains: Vec<DMatrix<f64>>,
}

/// Kleinman's iteration on `(A - 0.5 gamma I, B)`: alternate the Lyapunov
/// solve for `P_k` with `K_{k+1} = R^-1 B^T P_k` until the gain stops moving
/// or `max_iters` is hit.
pub fn kleinman(problem: &DiscountedLqrProblem, k0: &DMatrix<f64>, max_iters: usize) -> Result<KleinmanResult> {
    problem.check_gain(k0)?;
    let mut k = k0.clone();
    let mut gains = vec![k.clone()];
    let mut p = value_matrix(problem, &k)?;
    for it in 1..=max_iters {
        let next = &problem.r_inv * problem.b.transpose() * &p;
        let step = (&next - &k).norm();
        k = next;
        gains.push(k.clone());
        p = value_matrix(problem, &k)?;
        if step <= 1e-14 * (1.0 + k.norm()) {
            return Ok(KleinmanResult {
                p,
                k,
                iterations: it,
                gains,
            });
        }
    }
    Ok(KleinmanResult {
        p,
        k,
        iterations: max_iters,
        gains,
    })
}

/// Finds some stabilizing gain by continuation on a stability margin: starting
/// from a shift large enough that `K = 0` works, each stage solves a
/// well-weighted LQR problem and lowers the shift by half of the closed-loop
/// margin obtained.
pub fn find_stabilizing_gain(problem: &DiscountedLqrProblem) -> Result<DMatrix<f64>> {
    let n = problem.state_dim();
    let m = problem.input_dim();
    let mut k = DMatrix::zeros(m, n);
    let base = problem.shifted_a();
    let open = max_real_part(&spectrum(&base));
    if open < 0.0 {
        return Ok(k);
    }
    let mut shift = open + 1.0;
    let eye = DMatrix::identity(n, n);
    for _ in 0..500 {
        let aux = DiscountedLqrProblem::new(
            &base - &eye * shift,
            problem.b.clone(),
            eye.clone(),
            problem.r.clone(),
            0.0,
            eye.clone(),
        )?;
        k = kleinman(&aux, &k, 100)?.k;
        let margin = -max_real_part(&spectrum(&aux.closed_loop(&k)));
        if shift <= 0.0 {
            break;
        }
        shift = (shift - 0.5 * margin).max(0.0);
        if margin < 1e-10 {
            break;
        }
    }
    let st = is_stabilizing(problem, &k)?;
    if st.stabilizing {
        Ok(k)
    } else {
        Err(st.into_error())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientFlowOptions {
    pub tol_grad: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub max_iterations: usize,
    /// Local error per step relative to the step displacement.
    pub local_tol: f64,
}

impl Default for GradientFlowOptions {
    fn default() -> Self {
        GradientFlowOptions {
            tol_grad: 1e-8,
            initial_step: 0.01,
            max_step: 0.5,
            max_time: 1e4,
            max_iterations: 200_000,
            local_tol: 1e-4,
        }
    }
}

/// Accepted iterates of a gradient-flow search.
#[derive(Clone, Debug, PartialEq)]
pub struct GainSearchTrace {
    pub iterates: Vec<GainIterate>,
    /// Gradient norm reached the tolerance.
    pub converged: bool,
    /// Rejected trial steps (left the set or raised the cost).
    pub rejections: usize,
}

impl GainSearchTrace {
    pub fn terminal(&self) -> &GainIterate {
        self.iterates.last().expect("trace holds at least the initial gain")
    }

    /// Accepted steps after the initial point.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn costs(&self) -> Vec<f64> {
        self.iterates.iter().map(|i| i.cost).collect()
    }

    /// `phi(t) = f(K(t)) - f(K*)`.
    pub fn phi(&self, f_star: f64) -> Vec<f64> {
        self.iterates.iter().map(|i| i.cost - f_star).collect()
    }

    /// Least-squares line through `ln phi` over the latter half of the trace
    /// (in time), skipping samples at the round-off floor of the cost.
    pub fn fit_rate(&self, f_star: f64) -> Option<RateFit> {
        let t_end = self.terminal().t;
        let floor = 1e-11 * f_star.abs().max(1.0);
        let (ts, ys): (Vec<f64>, Vec<f64>) = self
            .iterates
            .iter()
            .filter(|i| i.t >= 0.5 * t_end && i.cost - f_star > floor)
            .map(|i| (i.t, (i.cost - f_star).ln()))
            .unzip();
        fit_line(&ts, &ys)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<RateFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        samples: n,
    })
}

/// Integrates `K' = -grad f(K)` with RK4 until `||grad f|| <= tol_grad`.
///
/// The step is controlled by step doubling: a full step is compared with two
/// half steps, and the step is accepted when their difference (scaled by
/// 1/15) is within `local_tol` of the displacement `h ||grad f||`. A trial is
/// also rejected when a stage leaves the stabilizing set or the cost would
/// increase by more than round-off (`1e-12 f(K0)`), so every accepted iterate
/// stays in the sublevel set `{f <= f(K0)}`.
pub fn gradient_flow(problem: &DiscountedLqrProblem, k0: &DMatrix<f64>, opts: &GradientFlowOptions) -> Result<GainSearchTrace> {
    if !(opts.tol_grad > 0.0)
        || !(opts.initial_step > 0.0)
        || !(opts.max_step >= opts.initial_step)
        || !(opts.local_tol > 0.0)
    {
        return Err(Error::InvalidScenario(format!("bad gradient flow options: {opts:?}")));
    }
    problem.check_gain(k0)?;
    let first = evaluate(problem, k0, 0.0)?;
    // cost differences below this are round-off in the Lyapunov solves
    let slack = 1e-12 * first.cost.abs();
    let mut iterates = vec![first];
    let mut h = opts.initial_step;
    let mut rejections = 0;
    let min_step = 1e-14;

    loop {
        let cur = iterates.last().expect("nonempty").clone();
        if cur.grad_norm() <= opts.tol_grad {
            return Ok(GainSearchTrace {
                iterates,
                converged: true,
                rejections,
            });
        }
        if cur.t >= opts.max_time || iterates.len() > opts.max_iterations {
            return Ok(GainSearchTrace {
                iterates,
                converged: false,
                rejections,
            });
        }
        let tol = opts.local_tol * h * cur.grad_norm() + 1e-15 * (1.0 + cur.k.norm());
        let trial = (|| {
            let full = rk4_gain_step(problem, &cur.k, &cur.grad, h)?;
            let mid = evaluate(problem, &rk4_gain_step(problem, &cur.k, &cur.grad, 0.5 * h)?, cur.t + 0.5 * h)?;
            let fine = rk4_gain_step(problem, &mid.k, &mid.grad, 0.5 * h)?;
            let err = (&fine - &full).norm() / 15.0;
            Ok::<_, Error>((evaluate(problem, &fine, cur.t + h)?, err))
        })();
        match trial {
            Ok((next, err)) if err <= tol && next.cost <= cur.cost + slack => {
                iterates.push(next);
                let grow = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 2.0 };
                h = (h * grow.clamp(1.0, 2.0)).min(opts.max_step);
            }
            Ok((_, err)) if err > tol => {
                rejections += 1;
                h *= (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.5);
            }
            _ => {
                rejections += 1;
                h *= 0.5;
            }
        }
        if h < min_step {
            return Err(Error::StepFailure { t: cur.t, step: h });
        }
    }
}

fn rk4_gain_step(problem: &DiscountedLqrProblem, k: &DMatrix<f64>, grad: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    let g = |k: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let p = value_matrix(problem, k)?;
        Ok(-gradient(problem, k, &p)?)
    };
    let k1 = -grad;
    let k2 = g(&(k + &k1 * (0.5 * h)))?;
    let k3 = g(&(k + &k2 * (0.5 * h)))?;
    let k4 = g(&(k + &k3 * h))?;
    Ok(k + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Smoothness and PL constants of the cost on the sublevel set of `K0`.
///
/// `q_min` is the smallest positive eigenvalue of the state weight, so the
/// zero block of a tracking weight `diag(Q, 0)` is skipped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessConstants {
    pub f_k0: f64,
    pub q_min: f64,
    pub gamma_k0: f64,
    pub zeta: f64,
    /// Lipschitz constant of the gradient.
    pub lipschitz: f64,
    /// PL constant: `||grad f||^2 >= 2 mu (f - f*)`.
    pub mu: f64,
}

pub fn smoothness_constants(problem: &DiscountedLqrProblem, k0: &DMatrix<f64>) -> Result<SmoothnessConstants> {
    let f_k0 = value_matrix(problem, k0).map(|p| (p * &problem.pi).trace())?;
    let eig = problem.q.symmetric_eigenvalues();
    let q_max = eig.max();
    let q_min = eig
        .iter()
        .copied()
        .filter(|&e| e > 1e-12 * q_max.max(1.0))
        .fold(f64::INFINITY, f64::min);
    let pi_min = min_sym_eigenvalue(&problem.pi);
    let r_min = min_sym_eigenvalue(&problem.r);
    let r_max = max_sym_eigenvalue(&problem.r);
    let b_norm = problem.b.norm();
    let a_norm = problem.a.norm();
    let dim = problem.state_dim() as f64;

    let gamma_k0 = f_k0 * b_norm / (pi_min * q_min);
    let zeta = dim.sqrt() * f_k0 / pi_min * (gamma_k0 + (gamma_k0 * gamma_k0 + r_max));
    let lipschitz = 2.0 * f_k0 / q_min * (r_max + b_norm * zeta);
    let mu = r_min * pi_min * pi_min * q_min
        / (8.0 * f_k0 * (a_norm + 0.5 * problem.gamma * dim + b_norm * b_norm * f_k0 / (pi_min * r_min)));
    Ok(SmoothnessConstants {
        f_k0,
        q_min,
        gamma_k0,
        zeta,
        lipschitz,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn scalar(a: f64, gamma: f64) -> DiscountedLqrProblem {
        DiscountedLqrProblem::new(dmatrix![a], dmatrix![1.0], dmatrix![1.0], dmatrix![1.0], gamma, dmatrix![1.0]).unwrap()
    }

    #[test]
    fn scalar_value_matrix() {
        let pr = scalar(0.0, 0.0);
        // p = (1 + k^2) / (2k)
        assert!((value_matrix(&pr, &dmatrix![1.0]).unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((value_matrix(&pr, &dmatrix![2.0]).unwrap()[(0, 0)] - 1.25).abs() < 1e-14);
        assert_eq!(cost(&pr, &dmatrix![-1.0]), f64::INFINITY);
    }

    #[test]
    fn scalar_gradient_two_routes() {
        let pr = scalar(0.0, 0.0);
        let k = dmatrix![2.0];
        let p = value_matrix(&pr, &k).unwrap();
        let z = state_weighting(&pr, &k).unwrap();
        assert!((z[(0, 0)] - 0.25).abs() < 1e-14);
        let g = gradient(&pr, &k, &p).unwrap()[(0, 0)];
        assert!((g - 0.375).abs() < 1e-14);
        // d/dk (1 + k^2) / (2k) = (k^2 - 1) / (2 k^2)
        assert!((g - (4.0 - 1.0) / 8.0).abs() < 1e-14);
    }

    #[test]
    fn stationary_at_optimum() {
        let pr = scalar(0.0, 0.0);
        let k = dmatrix![1.0];
        let p = value_matrix(&pr, &k).unwrap();
        assert!(gradient(&pr, &k, &p).unwrap().amax() < 1e-14);
    }

    #[test]
    fn scalar_stability_cases() {
        let pr = scalar(1.0, 0.0);
        let st = is_stabilizing(&pr, &dmatrix![2.0]).unwrap();
        assert!(st.stabilizing);
        assert!((st.spectrum[0].0 + 1.0).abs() < 1e-14);
        assert!(!is_stabilizing(&pr, &dmatrix![0.5]).unwrap().stabilizing);

        let no_input = DiscountedLqrProblem::new(
            dmatrix![0.5, 0.0; 0.0, -1.0],
            dmatrix![0.0; 0.0],
            DMatrix::identity(2, 2),
            dmatrix![1.0],
            0.0,
            DMatrix::identity(2, 2),
        )
        .unwrap();
        for k in [dmatrix![0.0, 0.0], dmatrix![100.0, -3.0]] {
            assert!(!is_stabilizing(&no_input, &k).unwrap().stabilizing);
        }
        assert!(is_stabilizing(&pr, &dmatrix![1.0, 2.0]).is_err());
    }

    #[test]
    fn scalar_kleinman_sequence() {
        let pr = scalar(0.0, 0.0);
        let res = kleinman(&pr, &dmatrix![2.0], 50).unwrap();
        let seq: Vec<f64> = res.gains.iter().map(|k| k[(0, 0)]).collect();
        assert!((seq[1] - 1.25).abs() < 1e-14);
        assert!((seq[2] - 1.025).abs() < 1e-14);
        assert!((seq[3] - 1.000304878).abs() < 1e-8);
        assert!((res.k[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(are_residual(&pr, &res.p) < 1e-13);
    }

    #[test]
    fn kleinman_fixed_point() {
        let pr = scalar(0.0, 0.0);
        let res = kleinman(&pr, &dmatrix![1.0], 1).unwrap();
        assert!((res.gains[1][(0, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scalar_gradient_flow() {
        let pr = scalar(0.0, 0.0);
        let tr = gradient_flow(&pr, &dmatrix![3.0], &GradientFlowOptions::default()).unwrap();
        assert!(tr.converged);
        assert!((tr.iterates[0].cost - 5.0 / 3.0).abs() < 1e-14);
        assert!((tr.terminal().k[(0, 0)] - 1.0).abs() < 1e-7);
        assert!((tr.terminal().cost - 1.0).abs() < 1e-12);
        let costs = tr.costs();
        assert!(costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn flow_from_optimum_stops_immediately() {
        let pr = scalar(0.0, 0.0);
        let tr = gradient_flow(&pr, &dmatrix![1.0], &GradientFlowOptions::default()).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.iterations(), 0);
    }

    #[test]
    fn flow_rejects_destabilizing_start() {
        let pr = scalar(1.0, 0.0);
        match gradient_flow(&pr, &dmatrix![0.5], &GradientFlowOptions::default()) {
            Err(Error::NotStabilizing { max_real, .. }) => assert!((max_real - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn discount_shifts_stabilizing_set() {
        // a = 0.2: with gamma = 1 the shifted drift is -0.3, so K = 0 is admissible
        let pr = scalar(0.2, 1.0);
        assert!(is_stabilizing(&pr, &dmatrix![0.0]).unwrap().stabilizing);
        assert!(!is_stabilizing(&scalar(0.2, 0.0), &dmatrix![0.0]).unwrap().stabilizing);
    }

    #[test]
    fn stabilizing_gain_by_continuation() {
        let pr = DiscountedLqrProblem::new(
            dmatrix![1.0, 2.0; 0.0, 3.0],
            dmatrix![0.0; 1.0],
            DMatrix::identity(2, 2),
            dmatrix![1.0],
            0.0,
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let k = find_stabilizing_gain(&pr).unwrap();
        assert!(is_stabilizing(&pr, &k).unwrap().stabilizing);
    }

    #[test]
    fn line_fit() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(fit_line(&x[..2], &y[..2]).is_none());
    }
}
