use std::time::Instant;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::{certify, phase1, probe, Certificate, Phase1Result, SolverConfig};
use crate::error::{IpldError, Result};
use crate::model::{DualPoint, PrimalPoint, ProblemInstance};
use crate::scalar::{kmax_bound, sigma_rule};
use crate::slave::local_distance;

/// Quantities measured by the extra solve at `(t_k, y^k)` in diagnostics mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterDiagnostics {
    /// `λ_{t_k}(y^k)`, measured as `λ̂ + ε_k`.
    pub lambda_current: f64,
    /// `Δ̃_{t_k}`: distance between slave points at `t_k` and `t_{k+1}`, metric at `t_k`.
    pub displacement_t: f64,
    /// `Δ̃_{t_{k+1}}`: the same distance in the metric at `t_{k+1}`.
    pub displacement_next: f64,
    pub slave_resid_current: f64,
}

/// One main-loop iteration producing `(x^{k+1}, y^{k+1})` at `t_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `t_{k+1} = σ^{k+1} t0`.
    pub t: f64,
    /// Decrement `λ_{t_{k+1}}(y^k)` of the computed step.
    pub lambda: f64,
    pub slave_resid: f64,
    pub slave_iters: usize,
    pub inner_iters: usize,
    pub delta: f64,
    pub eps_master: f64,
    pub model_gap_bound: f64,
    pub certificate: Certificate,
    pub wall_ms: f64,
    pub diagnostics: Option<IterDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub t0: f64,
    pub beta: f64,
    pub sigma: f64,
    pub nu: f64,
    pub eps: f64,
    pub eps_hat: f64,
    pub kmax: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `t_{k+1}(√ν + 1) ≤ ε`.
    Certified,
    /// Feasibility and relative gap below the practical thresholds.
    Practical,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: PrimalPoint,
    pub y: DualPoint,
    pub phase1: Phase1Result,
    pub trace: Trace,
    pub certificate: Certificate,
    pub stop: StopReason,
    pub objective: f64,
    pub feasibility: f64,
}

impl SolveOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.records.len()
    }
}

/// Phase 1 followed by the short-step path-following loop.
pub fn solve(instance: &ProblemInstance, config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let p1 = phase1(instance, config)?;
    info!("phase 1 finished after {} steps, lambda <= {:.3e}", p1.j_used, p1.lambda);

    let nu = instance.nu();
    let sigma = sigma_rule(config.beta, nu)?;
    let eps_hat = config.eps / (1.0 + nu.sqrt());
    let kmax = config.kmax.unwrap_or_else(|| kmax_bound(config.t0, eps_hat, sigma) + 1);
    let meta = TraceMeta { t0: config.t0, beta: config.beta, sigma, nu, eps: config.eps, eps_hat, kmax };

    let mut x = p1.x0.clone();
    let mut y = p1.y0.clone();
    let mut t = config.t0;
    let mut records = Vec::new();
    for k in 0..kmax {
        let started = Instant::now();
        // t_{k+1} = σ^{k+1} t0, computed by powers so it is exact in the trace
        let t_next = sigma.powi(k as i32 + 1) * config.t0;
        let delta = config.delta.at(t_next);
        let eps = config.eps_master.at(t_next);
        let p = probe(instance, config, t_next, &y, delta, eps, Some(&x))?;
        let cert = certify(instance, &p.eval, &p.slave.x, &y, p.step.lambda, &p.step.y_next);

        let diagnostics = if config.diagnostics {
            let d_cur = config.delta.at(t);
            let e_cur = config.eps_master.at(t);
            let q = probe(instance, config, t, &y, d_cur, e_cur, Some(&x))?;
            Some(IterDiagnostics {
                lambda_current: q.step.lambda + e_cur,
                displacement_t: local_distance(instance, t, &q.slave.x, &p.slave.x),
                displacement_next: local_distance(instance, t_next, &p.slave.x, &q.slave.x),
                slave_resid_current: q.slave.residual,
            })
        } else {
            None
        };

        let rec = IterationRecord {
            k,
            t: t_next,
            lambda: p.step.lambda,
            slave_resid: p.slave.residual,
            slave_iters: p.slave.total_iters(),
            inner_iters: p.step.inner_iters,
            delta,
            eps_master: eps,
            model_gap_bound: p.step.model_gap_bound,
            certificate: cert.clone(),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            diagnostics,
        };
        debug!("k={k} t={t_next:.3e} lambda={:.3e} inner={}", rec.lambda, rec.inner_iters);
        records.push(rec);

        let x_next = p.slave.x;
        // certificate refers to (x^{k+1}, y^k)
        let certified = t_next * (nu.sqrt() + 1.0) <= config.eps;
        let practical = config.practical_stop.is_some_and(|ps| {
            let feas = instance.feasibility_violation(&x_next);
            let obj = instance.objective(&x_next);
            let gap = practical_gap(instance, &x_next, &y, t_next);
            feas <= ps.feasibility && gap / (1.0 + obj.abs()) <= ps.rel_gap
        });
        if certified || practical {
            let stop = if certified { StopReason::Certified } else { StopReason::Practical };
            let objective = instance.objective(&x_next);
            let feasibility = instance.feasibility_violation(&x_next);
            return Ok(SolveOutcome {
                x: x_next,
                y,
                phase1: p1,
                trace: Trace { meta, records },
                certificate: cert,
                stop,
                objective,
                feasibility,
            });
        }
        x = x_next;
        y = p.step.y_next;
        t = t_next;
    }
    Err(IpldError::IterationCap { kmax })
}

/// `yᵀAx + φ*(−y) + νt`: duality gap estimate for an approximately centered pair.
pub(crate) fn practical_gap(instance: &ProblemInstance, x: &PrimalPoint, y: &DualPoint, t: f64) -> f64 {
    y.dot(&instance.apply_a(x)) + instance.phi().conjugate_neg(y) + instance.nu() * t
}
