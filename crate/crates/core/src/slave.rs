//! Per-block damped Newton for the penalized primal subproblem.

use log::warn;
use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{IpldError, Result};
use crate::linalg::SpdFactor;
use crate::model::{primal_local_norm, Block, DualPoint, PrimalPoint, ProblemInstance};
use crate::scalar::check_t;

pub const DEFAULT_SLAVE_ITERS: usize = 200;

/// A δ-approximate minimizer of `ψ_t(·; y)`.
#[derive(Debug, Clone)]
pub struct SlaveResult {
    pub x: PrimalPoint,
    /// `‖∇ψ_{t,i}(xᵢ)‖*` per block at the returned point.
    pub block_residuals: Vec<f64>,
    /// Root-sum-of-squares of the block residuals.
    pub residual: f64,
    pub newton_iters: Vec<usize>,
    pub delta: f64,
}

impl SlaveResult {
    pub fn total_iters(&self) -> usize {
        self.newton_iters.iter().sum()
    }
}

/// Solves `min_x ψ_t(x; y)` to accuracy `δ`, i.e. until the aggregate residual
/// is at most `δ/(1+δ)`.
pub fn solve_slave(
    instance: &ProblemInstance,
    t: f64,
    y: &DualPoint,
    delta: f64,
    warm_start: Option<&PrimalPoint>,
) -> Result<SlaveResult> {
    solve_slave_capped(instance, t, y, delta, warm_start, DEFAULT_SLAVE_ITERS)
}

pub fn solve_slave_capped(
    instance: &ProblemInstance,
    t: f64,
    y: &DualPoint,
    delta: f64,
    warm_start: Option<&PrimalPoint>,
    max_iters: usize,
) -> Result<SlaveResult> {
    check_t(t)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(IpldError::InvalidArgument(format!("slave accuracy must lie in (0,1), got {delta}")));
    }
    if y.len() != instance.n_rows() {
        return Err(IpldError::Dimension(format!("dual point has {} rows, expected {}", y.len(), instance.n_rows())));
    }
    let start = match warm_start {
        Some(w) if w.is_interior() => w.clone(),
        Some(_) => return Err(IpldError::Domain("slave warm start is not interior".into())),
        None => instance.midpoint(),
    };
    // Per-block target chosen so the root-sum-of-squares meets δ/(1+δ).
    let aggregate = delta / (1.0 + delta);
    let target = aggregate / (instance.blocks().len() as f64).sqrt();

    let outcomes: Vec<Result<(DVector<f64>, f64, usize)>> = instance
        .blocks()
        .par_iter()
        .zip(start.blocks().par_iter())
        .enumerate()
        .map(|(i, (b, x0))| {
            let aty = b.coupling.transpose_apply(y);
            newton_block(i, b, t, &aty, x0.clone(), target, max_iters)
        })
        .collect();

    let mut blocks = Vec::with_capacity(outcomes.len());
    let mut block_residuals = Vec::with_capacity(outcomes.len());
    let mut newton_iters = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (x, r, k) = o?;
        blocks.push(x);
        block_residuals.push(r);
        newton_iters.push(k);
    }
    let residual = block_residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    let x = instance.point(blocks)?;
    if !x.is_interior() {
        return Err(IpldError::Domain("slave iterate left the interior".into()));
    }
    Ok(SlaveResult { x, block_residuals, residual, newton_iters, delta })
}

fn newton_block(
    index: usize,
    b: &Block,
    t: f64,
    aty: &DVector<f64>,
    mut x: DVector<f64>,
    target: f64,
    max_iters: usize,
) -> Result<(DVector<f64>, f64, usize)> {
    let mut iters = 0;
    let mut prev = f64::INFINITY;
    loop {
        let g = b.psi_gradient(t, &x, aty);
        let h = b.psi_hessian(t, &x);
        let f = SpdFactor::new(&h)?;
        let lambda = f.inv_quad(&g).sqrt();
        if lambda <= target {
            return Ok((x, lambda, iters));
        }
        if iters >= max_iters {
            return Err(IpldError::SlaveNonConvergence { block: index, iters, residual: lambda, target });
        }
        if iters > 1 && lambda > prev {
            log::debug!("block {index}: residual rose from {prev:e} to {lambda:e}");
        }
        prev = lambda;
        let dir = f.solve(&g);
        let mut step = 1.0 / (1.0 + lambda);
        let mut next = &x - &dir * step;
        // The damped step stays interior in exact arithmetic; guard against rounding.
        while !b.is_interior(&next) {
            step *= 0.5;
            if step < 1e-12 {
                return Err(IpldError::Domain(format!("block {index}: Newton step cannot stay interior")));
            }
            warn!("block {index}: damped Newton step left the interior, halving");
            next = &x - &dir * step;
        }
        x = next;
        iters += 1;
    }
}

/// `‖u − v‖` in the local norm of `ψ_t` at `u` (the less accurate point).
pub fn local_distance(instance: &ProblemInstance, t: f64, u: &PrimalPoint, v: &PrimalPoint) -> f64 {
    let hess: Vec<_> = instance.blocks().iter().zip(u.blocks()).map(|(b, ui)| b.psi_hessian(t, ui)).collect();
    let diff: Vec<_> = u.blocks().iter().zip(v.blocks()).map(|(a, c)| a - c).collect();
    primal_local_norm(&hess, &diff)
}

/// Checks `‖x̃ − x*‖_{x̃,t} ≤ δ` against a high-accuracy reference solve.
pub fn verify_delta_bound(instance: &ProblemInstance, t: f64, result: &SlaveResult, x_exact: &PrimalPoint) -> bool {
    local_distance(instance, t, &result.x, x_exact) <= result.delta
}
