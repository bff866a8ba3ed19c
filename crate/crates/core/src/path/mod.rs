//! Path-following on the smoothed dual: initialization, main loop and certificates.

mod certify;
mod config;
mod diagnostics;
mod phase1;
mod solve;
mod sweep;

pub use certify::{certify, Certificate};
pub use config::{PracticalStop, SolverConfig, ToleranceSchedule};
pub use diagnostics::{exact_contraction, neighborhood_diagnostics, DiagnosticsReport, DiagnosticsRow};
pub use phase1::{phase1, phase1_from, Phase1Result, Phase1Step};
pub use sweep::{tolerance_sweep, SweepAxis, SweepCell};
pub use solve::{solve, IterDiagnostics, IterationRecord, SolveOutcome, StopReason, Trace, TraceMeta};

use crate::error::Result;
use crate::master::{scaled_prox_capped, MasterStepResult};
use crate::model::{DualPoint, PrimalPoint, ProblemInstance};
use crate::oracle::{build_oracle, reference_oracle, OracleEval};
use crate::slave::{solve_slave_capped, SlaveResult};

/// Slave solve, oracle and master step at one `(t, y)`.
#[derive(Debug, Clone)]
pub(crate) struct Probe {
    pub slave: SlaveResult,
    pub eval: OracleEval,
    pub step: MasterStepResult,
}

pub(crate) fn probe(
    instance: &ProblemInstance,
    config: &SolverConfig,
    t: f64,
    y: &DualPoint,
    delta: f64,
    eps: f64,
    warm: Option<&PrimalPoint>,
) -> Result<Probe> {
    let slave = solve_slave_capped(instance, t, y, delta, warm, config.slave_max_iters)?;
    let eval = build_oracle(instance, t, y, &slave)?;
    let step = scaled_prox_capped(&eval, instance.phi(), eps, config.master_max_iters)?;
    Ok(Probe { slave, eval, step })
}

/// `D_t(y) = d_t(y) + φ*(−y)/t`, with `d_t` from a reference slave solve.
pub fn smoothed_dual_value(
    instance: &ProblemInstance,
    t: f64,
    y: &DualPoint,
    warm: Option<&PrimalPoint>,
) -> Result<f64> {
    let e = reference_oracle(instance, t, y, warm)?;
    Ok(e.d_value + instance.phi().conjugate_neg(y) / t)
}
