//! Inexact value, gradient and Hessian of the smoothed dual function.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{generalized_eigenvalues, SpdFactor};
use crate::model::{evaluate_psi, factor_blocks, DualPoint, PrimalPoint, ProblemInstance};
use crate::scalar::{check_t, omega, omega_star};
use crate::slave::{local_distance, solve_slave, SlaveResult};

/// Inexact oracle bundle of `d_t` at `y`, built from an approximate slave solution.
#[derive(Debug, Clone)]
pub struct OracleEval {
    pub t: f64,
    pub y: DualPoint,
    pub x_tilde: PrimalPoint,
    pub delta_used: f64,
    pub slave_residual: f64,
    pub d_value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    factor: SpdFactor,
    block_factors: Vec<SpdFactor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `‖u‖_{y,t} = (uᵀ∇̃²d u)^{1/2}`.
    Primal,
    /// `‖v‖*_{y,t} = (vᵀ∇̃²d⁻¹ v)^{1/2}`.
    Dual,
}

impl OracleEval {
    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    /// Cholesky factors of the blocks of `∇²ψ_t(x̃)`.
    pub fn block_factors(&self) -> &[SpdFactor] {
        &self.block_factors
    }

    pub fn norm(&self, u: &DVector<f64>, which: NormKind) -> f64 {
        dual_norm(self, u, which)
    }
}

pub fn build_oracle(instance: &ProblemInstance, t: f64, y: &DualPoint, slave: &SlaveResult) -> Result<OracleEval> {
    check_t(t)?;
    let psi = evaluate_psi(instance, t, &slave.x, y)?;
    let block_factors = factor_blocks(&psi.hessian)?;
    let n = instance.n_rows();

    // Each block contributes Wᵀ W with W = L⁻¹ A_iᵀ on the rows it touches.
    let parts: Vec<DMatrix<f64>> = instance
        .blocks()
        .par_iter()
        .zip(block_factors.par_iter())
        .map(|(b, f)| {
            let w = f.lower_solve_matrix(&b.coupling.local().transpose());
            w.tr_mul(&w)
        })
        .collect();
    let mut hess = DMatrix::zeros(n, n);
    for (b, part) in instance.blocks().iter().zip(&parts) {
        let rows = b.coupling.rows();
        for (a, &ra) in rows.iter().enumerate() {
            for (c, &rc) in rows.iter().enumerate() {
                hess[(ra, rc)] += part[(a, c)];
            }
        }
    }
    let inv_t2 = 1.0 / (t * t);
    hess *= inv_t2;
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (hess[(i, j)] + hess[(j, i)]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let factor = SpdFactor::new(&hess)?;
    let grad = instance.apply_a(&slave.x) / t;
    Ok(OracleEval {
        t,
        y: y.clone(),
        x_tilde: slave.x.clone(),
        delta_used: slave.delta,
        slave_residual: slave.residual,
        d_value: -psi.value,
        grad,
        hess,
        factor,
        block_factors,
    })
}

pub fn dual_norm(eval: &OracleEval, u: &DVector<f64>, which: NormKind) -> f64 {
    match which {
        NormKind::Primal => u.dot(&(&eval.hess * u)).max(0.0).sqrt(),
        NormKind::Dual => eval.factor.inv_quad(u).sqrt(),
    }
}

/// Slave accuracy used for reference ("exact") oracles.
pub const REFERENCE_DELTA: f64 = 1e-12;

/// Reference oracle from a high-accuracy slave solve.
pub fn reference_oracle(
    instance: &ProblemInstance,
    t: f64,
    y: &DualPoint,
    warm: Option<&PrimalPoint>,
) -> Result<OracleEval> {
    let s = solve_slave(instance, t, y, REFERENCE_DELTA, warm)?;
    build_oracle(instance, t, y, &s)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleErrorRow {
    pub requested: f64,
    pub measured: f64,
    pub value_gap: f64,
    pub value_lower: f64,
    pub value_upper: f64,
    pub value_ok: bool,
    pub eig_min: f64,
    pub eig_max: f64,
    pub sandwich_ok: bool,
    pub grad_error: f64,
    pub grad_ok: bool,
}

impl OracleErrorRow {
    pub fn passed(&self) -> bool {
        self.value_ok && self.sandwich_ok && self.grad_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleErrorReport {
    pub rows: Vec<OracleErrorRow>,
}

impl OracleErrorReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(OracleErrorRow::passed)
    }
}

// Relative slack for rounding in the bound comparisons.
const ROUND: f64 = 1e-9;

/// Compares inexact oracles at each requested accuracy against a reference
/// oracle. Bounds are evaluated with the measured distance `δₘ`, not the
/// requested tolerance.
pub fn oracle_error_suite(
    instance: &ProblemInstance,
    t: f64,
    y: &DualPoint,
    deltas: &[f64],
) -> Result<OracleErrorReport> {
    let exact = reference_oracle(instance, t, y, None)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let s = solve_slave(instance, t, y, delta, None)?;
        let approx = build_oracle(instance, t, y, &s)?;
        let dm = local_distance(instance, t, &s.x, &exact.x_tilde);

        let value_gap = exact.d_value - approx.d_value;
        let scale = exact.d_value.abs().max(1.0) * 1e-13;
        let value_lower = omega(dm / (1.0 + dm));
        let value_upper = if dm < 1.0 { omega_star(dm / (1.0 - dm))? } else { f64::INFINITY };
        let value_ok = value_gap >= value_lower - scale && value_gap <= value_upper + scale;

        let ev = generalized_eigenvalues(&exact.hess, &approx.factor);
        let (eig_min, eig_max) = (ev[0], ev[ev.len() - 1]);
        let lo = (1.0 - dm).powi(2);
        let sandwich_ok = eig_min >= lo * (1.0 - ROUND) && eig_max <= (1.0 + ROUND) / lo;

        let grad_error = approx.norm(&(&approx.grad - &exact.grad), NormKind::Dual);
        let grad_ok = grad_error <= dm * (1.0 + ROUND) + 1e-14;

        rows.push(OracleErrorRow {
            requested: delta,
            measured: dm,
            value_gap,
            value_lower,
            value_upper,
            value_ok,
            eig_min,
            eig_max,
            sandwich_ok,
            grad_error,
            grad_ok,
        });
    }
    Ok(OracleErrorReport { rows })
}
