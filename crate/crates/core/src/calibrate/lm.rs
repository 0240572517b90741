//! A bounded Levenberg-Marquardt least-squares solver with a forward
//! difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Damping schedule and stopping rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub initial_damping: f64,
    /// Factor applied to the damping after a rejected step.
    pub damping_up: f64,
    /// Factor applied to the damping after an accepted step.
    pub damping_down: f64,
    pub max_iters: usize,
    /// Stop once the largest gradient component falls below this.
    pub grad_tol: f64,
    /// Stop once a step is this small relative to the parameter norm.
    pub step_tol: f64,
    /// Relative step of the finite-difference Jacobian.
    pub fd_rel_step: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
            max_iters: 200,
            grad_tol: 1e-8,
            step_tol: 1e-10,
            fd_rel_step: 1e-6,
        }
    }
}

impl LmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("initial_damping", self.initial_damping),
            ("damping_up", self.damping_up),
            ("damping_down", self.damping_down),
            ("grad_tol", self.grad_tol),
            ("step_tol", self.step_tol),
            ("fd_rel_step", self.fd_rel_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("calibration.{name} must be positive, got {v}")));
            }
        }
        if self.damping_up <= 1.0 || self.damping_down >= 1.0 {
            return Err(Error::Config(format!(
                "need damping_up > 1 > damping_down, got {} and {}",
                self.damping_up, self.damping_down
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("calibration.max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// A named free parameter and its admissible interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Whether `lower` itself is excluded.
    pub lower_open: bool,
}

impl Parameter {
    /// Closed interval `[lower, upper]`.
    pub fn closed(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            lower,
            upper,
            lower_open: false,
        }
    }

    /// Half-open interval `(lower, upper]`.
    pub fn open_below(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            lower_open: true,
            ..Self::closed(name, lower, upper)
        }
    }

    /// Unbounded parameter.
    pub fn free(name: &str) -> Self {
        Self::closed(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower_open { v > self.lower } else { v >= self.lower };
        v.is_finite() && above && v <= self.upper
    }
}

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmReport {
    pub names: Vec<String>,
    pub theta: Vec<f64>,
    /// Residual sum of squares at `theta`.
    pub cost: f64,
    /// Number of Jacobian evaluations.
    pub iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn fmt_theta(theta: &[f64]) -> String {
    let parts: Vec<String> = theta.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Evaluates `f` and insists on finite output.
fn evaluate<F>(f: &F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let r = f(theta).map_err(|e| e.context(format_args!("theta = {}", fmt_theta(theta))))?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Calibration(format!(
            "non-finite residual at theta = {}",
            fmt_theta(theta)
        )));
    }
    Ok(r)
}

/// Difference step for a parameter of value `v`: relative to `v`, or
/// `rel_step` itself at zero.
fn fd_step(v: f64, rel_step: f64) -> f64 {
    if v == 0.0 {
        rel_step
    } else {
        rel_step * v.abs()
    }
}

/// Forward-difference Jacobian of `f` at `theta`, where `r0 = f(theta)`.
/// A step that would leave the bounds is taken backwards instead.
pub fn forward_jacobian<F>(f: &F, theta: &[f64], r0: &[f64], bounds: &[Parameter], rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut jac = DMatrix::zeros(r0.len(), theta.len());
    let mut probe = theta.to_vec();
    for j in 0..theta.len() {
        let mut h = fd_step(theta[j], rel_step);
        if !bounds[j].contains(theta[j] + h) {
            h = -h;
        }
        probe[j] = theta[j] + h;
        let r = evaluate(f, &probe)?;
        if r.len() != r0.len() {
            return Err(Error::Calibration("residual vector changed length".into()));
        }
        for (i, (a, b)) in r.iter().zip(r0).enumerate() {
            jac[(i, j)] = (a - b) / h;
        }
        probe[j] = theta[j];
    }
    Ok(jac)
}

/// Central-difference Jacobian, used to check [`forward_jacobian`].
pub fn central_jacobian<F>(f: &F, theta: &[f64], rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = evaluate(f, theta)?.len();
    let mut jac = DMatrix::zeros(n, theta.len());
    let mut probe = theta.to_vec();
    for j in 0..theta.len() {
        let h = fd_step(theta[j], rel_step);
        probe[j] = theta[j] + h;
        let up = evaluate(f, &probe)?;
        probe[j] = theta[j] - h;
        let down = evaluate(f, &probe)?;
        for i in 0..n {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
        probe[j] = theta[j];
    }
    Ok(jac)
}

/// Solves `(JᵀJ + λ diag(JᵀJ)) δ = -Jᵀr`.
fn damped_step(jtj: &DMatrix<f64>, grad: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let mut a = jtj.clone();
    for i in 0..a.nrows() {
        let d = jtj[(i, i)].max(1e-300);
        a[(i, i)] += lambda * d;
    }
    let rhs = -grad;
    match a.clone().cholesky() {
        Some(ch) => Some(ch.solve(&rhs)),
        None => a.lu().solve(&rhs),
    }
}

/// Minimizes `sum(f(theta)^2)` subject to the parameter intervals.
///
/// Steps that leave the intervals or fail to lower the cost are rejected and
/// the damping raised. Running out of iterations yields a report with
/// `converged = false`; a non-finite residual is an error naming the
/// parameter vector.
pub fn levenberg_marquardt<F>(f: F, theta0: &[f64], bounds: &[Parameter], cfg: &LmConfig) -> Result<LmReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    if theta0.len() != bounds.len() || theta0.is_empty() {
        return Err(Error::Calibration(format!(
            "{} start values for {} parameters",
            theta0.len(),
            bounds.len()
        )));
    }
    for (v, b) in theta0.iter().zip(bounds) {
        if !b.contains(*v) {
            return Err(Error::Calibration(format!(
                "start value {} = {v} lies outside [{}, {}]",
                b.name, b.lower, b.upper
            )));
        }
    }
    let mut theta = theta0.to_vec();
    let mut r = evaluate(&f, &theta)?;
    let mut cost = sum_sq(&r);
    let mut history = vec![cost];
    let mut lambda = cfg.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters && !converged {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = forward_jacobian(&f, &theta, &r, bounds, cfg.fd_rel_step)?;
        let rv = DVector::from_column_slice(&r);
        let grad = jac.tr_mul(&rv);
        if grad.amax() < cfg.grad_tol {
            converged = true;
            break;
        }
        let jtj = jac.tr_mul(&jac);
        let theta_norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        loop {
            let Some(delta) = damped_step(&jtj, &grad, lambda) else {
                lambda *= cfg.damping_up;
                continue;
            };
            let small = delta.norm() <= cfg.step_tol * (theta_norm + cfg.step_tol);
            let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let inside = trial.iter().zip(bounds).all(|(v, b)| b.contains(*v));
            if inside {
                let r_trial = evaluate(&f, &trial)?;
                let c_trial = sum_sq(&r_trial);
                if c_trial < cost {
                    theta = trial;
                    r = r_trial;
                    cost = c_trial;
                    history.push(cost);
                    lambda = (lambda * cfg.damping_down).max(1e-300);
                    converged = small;
                    break;
                }
            }
            lambda *= cfg.damping_up;
            if small || !lambda.is_finite() {
                // No admissible step of resolvable size lowers the cost:
                // theta is a minimizer to working precision.
                converged = true;
                break;
            }
        }
    }
    Ok(LmReport {
        names: bounds.iter().map(|b| b.name.clone()).collect(),
        theta,
        cost,
        iterations,
        converged,
        cost_history: history,
    })
}
