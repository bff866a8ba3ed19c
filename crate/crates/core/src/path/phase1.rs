use log::debug;
use serde::Serialize;

use super::{probe, smoothed_dual_value, SolverConfig};
use crate::error::{IpldError, Result};
use crate::model::{DualPoint, PrimalPoint, ProblemInstance};
use crate::scalar::{phase1_decrease, phase1_stepsize};

#[derive(Debug, Clone, Serialize)]
pub struct Phase1Step {
    pub j: usize,
    pub lambda_hat: f64,
    pub alpha: f64,
    /// `D_{t0}` before and after the step, from reference solves (diagnostics only).
    pub value_before: Option<f64>,
    pub value_after: Option<f64>,
}

impl Phase1Step {
    /// Measured decrease minus the guaranteed one, when measured.
    pub fn descent_margin(&self, beta: f64) -> Option<f64> {
        Some(self.value_before? - self.value_after? - phase1_decrease(beta))
    }
}

#[derive(Debug, Clone)]
pub struct Phase1Result {
    pub x0: PrimalPoint,
    pub y0: DualPoint,
    pub j_used: usize,
    /// Upper estimate `λ̂ + ε` of `λ_{t0}(y0)`.
    pub lambda: f64,
    pub slave_residual: f64,
    pub steps: Vec<Phase1Step>,
}

/// Damped proximal-Newton iterations at fixed `t0` from `ŷ = 0` until the
/// iterate lies in the `β`-neighborhood.
pub fn phase1(instance: &ProblemInstance, config: &SolverConfig) -> Result<Phase1Result> {
    phase1_from(instance, config, DualPoint::zeros(instance.n_rows()), None)
}

pub fn phase1_from(
    instance: &ProblemInstance,
    config: &SolverConfig,
    y_start: DualPoint,
    x_start: Option<PrimalPoint>,
) -> Result<Phase1Result> {
    config.validate()?;
    let t0 = config.t0;
    let beta = config.beta;
    let delta = config.delta.at(t0);
    let eps = config.eps_master.at(t0);
    let mut y = y_start;
    let mut x = x_start;
    let mut steps = Vec::new();
    let mut value = if config.diagnostics { Some(smoothed_dual_value(instance, t0, &y, x.as_ref())?) } else { None };

    for j in 0.. {
        let p = probe(instance, config, t0, &y, delta, eps, x.as_ref())?;
        let lambda_hat = p.step.lambda;
        if lambda_hat + eps <= beta {
            return Ok(Phase1Result {
                x0: p.slave.x,
                y0: y,
                j_used: j,
                lambda: lambda_hat + eps,
                slave_residual: p.slave.residual,
                steps,
            });
        }
        if lambda_hat <= eps + delta {
            // Step size undefined here; re-measure with tighter inner accuracy.
            let q = probe(instance, config, t0, &y, delta / 100.0, eps / 100.0, Some(&p.slave.x))?;
            if q.step.lambda + eps / 100.0 <= beta {
                return Ok(Phase1Result {
                    x0: q.slave.x,
                    y0: y,
                    j_used: j,
                    lambda: q.step.lambda + eps / 100.0,
                    slave_residual: q.slave.residual,
                    steps,
                });
            }
            return Err(IpldError::Phase1Failure { iters: j, lambda: q.step.lambda, beta });
        }
        if j >= config.phase1_max {
            return Err(IpldError::Phase1Failure { iters: j, lambda: lambda_hat, beta });
        }
        let alpha = phase1_stepsize(lambda_hat, eps, delta)?;
        y = &y * (1.0 - alpha) + &p.step.y_next * alpha;
        x = Some(p.slave.x);
        let after = if config.diagnostics { Some(smoothed_dual_value(instance, t0, &y, x.as_ref())?) } else { None };
        debug!("phase 1 step {j}: lambda_hat {lambda_hat:.6e}, alpha {alpha:.4}");
        steps.push(Phase1Step { j, lambda_hat, alpha, value_before: value, value_after: after });
        value = after;
    }
    unreachable!("phase 1 loop exits by return")
}
