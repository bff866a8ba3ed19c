use serde::Serialize;

use super::{probe, SolverConfig, Trace};
use crate::error::Result;
use crate::model::{DualPoint, PrimalPoint, ProblemInstance};
use crate::scalar::{c_nu, displacement_bound, newton_step_bound, parameter_update_bound};

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRow {
    pub k: usize,
    /// `λ_{t_k}(y^k) ≤ β`.
    pub neighborhood: bool,
    /// `λ_{t_{k+1}}(y^k) ≤ 2.1β`.
    pub after_update: bool,
    /// Displacements below `(δ + c_ν)/(1 − δ − c_ν)`.
    pub displacement: bool,
    pub displacement_limit: f64,
    /// `λ_{t_{k+1}}(y^k)` against the parameter-update estimate.
    pub update_estimate: bool,
    /// `λ_{t_{k+1}}(y^{k+1})` against the Newton-step estimate; absent on the last row.
    pub newton_estimate: Option<bool>,
}

impl DiagnosticsRow {
    pub fn passed(&self) -> bool {
        self.neighborhood
            && self.after_update
            && self.displacement
            && self.update_estimate
            && self.newton_estimate.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    /// Iterations recorded without diagnostics.
    pub missing: usize,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        self.missing == 0 && self.rows.iter().all(DiagnosticsRow::passed)
    }

    pub fn max_lambda_ratio(&self, trace: &Trace) -> f64 {
        trace
            .records
            .iter()
            .filter_map(|r| r.diagnostics.as_ref())
            .map(|d| d.lambda_current / trace.meta.beta)
            .fold(0.0, f64::max)
    }
}

const SLACK: f64 = 1e-9;

/// Checks the per-iteration neighborhood estimates on a trace recorded with
/// diagnostics enabled. Measured decrements carry an error of at most the
/// master accuracy, which is charged against each inequality.
pub fn neighborhood_diagnostics(trace: &Trace) -> DiagnosticsReport {
    let m = &trace.meta;
    let recs = &trace.records;
    let mut rows = Vec::new();
    let mut missing = 0;
    for (i, r) in recs.iter().enumerate() {
        let Some(d) = r.diagnostics.as_ref() else {
            missing += 1;
            continue;
        };
        let cnu = c_nu(m.sigma, r.delta, m.nu).unwrap_or(f64::INFINITY);
        let limit = displacement_bound(r.delta, cnu);
        let lambda_lo = (r.lambda - r.eps_master).max(0.0);
        let lambda_hi = r.lambda + r.eps_master;
        let update = parameter_update_bound(d.displacement_t, d.displacement_next, m.sigma, d.lambda_current);
        let newton_estimate = recs.get(i + 1).and_then(|n| n.diagnostics.as_ref().map(|nd| (n, nd))).map(|(n, nd)| {
            let measured_lo = (nd.lambda_current - 2.0 * n.eps_master).max(0.0);
            measured_lo <= newton_step_bound(n.delta, r.delta, r.eps_master, lambda_hi) + SLACK
        });
        rows.push(DiagnosticsRow {
            k: r.k,
            neighborhood: d.lambda_current <= m.beta,
            after_update: lambda_lo <= 2.1 * m.beta,
            displacement: d.displacement_t.max(d.displacement_next) <= limit + SLACK,
            displacement_limit: limit,
            update_estimate: lambda_lo <= update + SLACK,
            newton_estimate,
        });
    }
    DiagnosticsReport { rows, missing }
}

/// Two successive near-exact proximal-Newton steps at fixed `t`; returns the
/// decrements `(λ(y), λ(y⁺))`.
pub fn exact_contraction(
    instance: &ProblemInstance,
    config: &SolverConfig,
    t: f64,
    y: &DualPoint,
    warm: Option<&PrimalPoint>,
    accuracy: f64,
) -> Result<(f64, f64)> {
    let p = probe(instance, config, t, y, accuracy, accuracy, warm)?;
    let q = probe(instance, config, t, &p.step.y_next, accuracy, accuracy, Some(&p.slave.x))?;
    Ok((p.step.lambda, q.step.lambda))
}
