use serde::{Deserialize, Serialize};

use super::{solve, SolveOutcome, SolverConfig, ToleranceSchedule};
use crate::model::ProblemInstance;

/// Which tolerance a sweep varies; the other keeps its configured value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Delta,
    EpsMaster,
}

impl SweepAxis {
    /// Decades `1e-8..1e-2` for the slave tolerance, `1e-12..1e-2` for the master.
    pub fn default_grid(self) -> Vec<f64> {
        let lo = match self {
            SweepAxis::Delta => 8,
            SweepAxis::EpsMaster => 12,
        };
        (2..=lo).map(|k| 10f64.powi(-k)).collect()
    }
}

#[derive(Debug)]
pub struct SweepCell {
    pub value: f64,
    pub outcome: crate::Result<SolveOutcome>,
}

impl SweepCell {
    pub fn iterations(&self) -> Option<usize> {
        self.outcome.as_ref().ok().map(SolveOutcome::iterations)
    }
}

/// Solves once per grid value with the swept tolerance held constant along the path.
pub fn tolerance_sweep(instance: &ProblemInstance, base: &SolverConfig, axis: SweepAxis, values: &[f64]) -> Vec<SweepCell> {
    values
        .iter()
        .map(|&value| {
            let mut cfg = base.clone();
            cfg.allow_loose_tolerances = true;
            match axis {
                SweepAxis::Delta => cfg.delta = ToleranceSchedule::constant(value),
                SweepAxis::EpsMaster => cfg.eps_master = ToleranceSchedule::constant(value),
            }
            SweepCell { value, outcome: solve(instance, &cfg) }
        })
        .collect()
}
