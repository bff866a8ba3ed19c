use serde::{Deserialize, Serialize};

use crate::error::{IpldError, Result};
use crate::master::DEFAULT_MASTER_ITERS;
use crate::slave::DEFAULT_SLAVE_ITERS;

/// Accuracy used at barrier parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToleranceSchedule {
    Constant { value: f64 },
    /// `max(min, factor · t)`; an extension, tolerances tighten with `t`.
    Geometric { min: f64, factor: f64 },
}

impl ToleranceSchedule {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Geometric { min, factor } => min.max(factor * t),
        }
    }

    /// Largest value the schedule can take for `t ≤ t0`.
    fn sup(&self, t0: f64) -> f64 {
        self.at(t0)
    }

    fn inf(&self) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Geometric { min, .. } => min,
        }
    }
}

/// Heuristic early exit on measured feasibility and relative gap. Off by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PracticalStop {
    pub feasibility: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub t0: f64,
    pub beta: f64,
    /// Target accuracy of the primal-dual certificate.
    pub eps: f64,
    pub delta: ToleranceSchedule,
    pub eps_master: ToleranceSchedule,
    pub kmax: Option<usize>,
    pub phase1_max: usize,
    pub slave_max_iters: usize,
    pub master_max_iters: usize,
    pub seed: u64,
    /// Extra solves at `(t_k, y^k)` to measure the neighborhood quantities.
    pub diagnostics: bool,
    /// Permit tolerances above `β/100` (tolerance sweeps).
    pub allow_loose_tolerances: bool,
    pub practical_stop: Option<PracticalStop>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let beta = 0.05;
        let tol = 1e-5_f64.min(beta / 100.0);
        Self {
            t0: 0.25,
            beta,
            eps: 1e-4,
            delta: ToleranceSchedule::constant(tol),
            eps_master: ToleranceSchedule::constant(tol),
            kmax: None,
            phase1_max: 1_000,
            slave_max_iters: DEFAULT_SLAVE_ITERS,
            master_max_iters: DEFAULT_MASTER_ITERS,
            seed: 0,
            diagnostics: false,
            allow_loose_tolerances: false,
            practical_stop: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(IpldError::InvalidArgument(m));
        if !(self.t0 > 0.0 && self.t0 <= 1.0) {
            return bad(format!("t0 must lie in (0,1], got {}", self.t0));
        }
        if !(self.beta > 0.0 && self.beta <= 0.1) {
            return bad(format!("beta must lie in (0,0.1], got {}", self.beta));
        }
        if !(self.eps > 0.0) {
            return bad(format!("target accuracy must be positive, got {}", self.eps));
        }
        let cap = if self.allow_loose_tolerances { 0.5 } else { self.beta / 100.0 };
        for (name, s) in [("delta", &self.delta), ("eps_master", &self.eps_master)] {
            if !(s.inf() > 0.0) {
                return bad(format!("{name} tolerance must be positive"));
            }
            if s.sup(self.t0) > cap * (1.0 + 1e-12) {
                return bad(format!("{name} tolerance {} exceeds {cap}", s.sup(self.t0)));
            }
        }
        if self.phase1_max == 0 || self.slave_max_iters == 0 || self.master_max_iters == 0 {
            return bad("iteration caps must be positive".into());
        }
        Ok(())
    }
}
