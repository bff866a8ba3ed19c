//! Inexact scaled proximal-Newton step on the smoothed dual.
//!
//! The model `Q(y) = gᵀ(y − y₀) + ½(y − y₀)ᵀH(y − y₀) + h̄(y)/t` is minimized by
//! accelerated proximal gradient with adaptive restart. Iterations run in the
//! Jacobi-scaled variable `w = D^{1/2}(y − y₀)`, `D = diag(H)`; because `h̄` is
//! separable its prox in `w` is a coordinate-wise prox with steps `γ/(t Dᵢ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{IpldError, Result};
use crate::linalg::sym_extreme_eigenvalues;
use crate::model::{CompositeKind, CompositeTerm, DualPoint};
use crate::oracle::{NormKind, OracleEval};

pub const DEFAULT_MASTER_ITERS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct MasterStepResult {
    pub y_next: DualPoint,
    pub epsilon_used: f64,
    pub inner_iters: usize,
    /// Certified upper bound on `Q(y_next) − min Q`.
    pub model_gap_bound: f64,
    /// `‖y_next − y‖_{y,t}`, the decrement at the base point.
    pub lambda: f64,
}

pub fn scaled_prox(eval: &OracleEval, phi: &CompositeTerm, eps: f64) -> Result<MasterStepResult> {
    scaled_prox_capped(eval, phi, eps, DEFAULT_MASTER_ITERS)
}

pub fn scaled_prox_capped(
    eval: &OracleEval,
    phi: &CompositeTerm,
    eps: f64,
    max_iters: usize,
) -> Result<MasterStepResult> {
    if !(eps > 0.0) {
        return Err(IpldError::InvalidArgument(format!("master accuracy must be positive, got {eps}")));
    }
    let t = eval.t;
    let y0 = &eval.y;
    let (y_next, iters, gap) = match phi.kind() {
        CompositeKind::Zero => (y0 - eval.factor().solve(&eval.grad), 0, 0.0),
        CompositeKind::Point => {
            let b = DVector::from_column_slice(phi.upper());
            let rhs = b / t - &eval.grad;
            (y0 + eval.factor().solve(&rhs), 0, 0.0)
        }
        CompositeKind::Box => fista(eval, phi, eps, max_iters)?,
    };
    let lambda = eval.norm(&(&y_next - y0), NormKind::Primal);
    Ok(MasterStepResult { y_next, epsilon_used: eps, inner_iters: iters, model_gap_bound: gap, lambda })
}

fn fista(eval: &OracleEval, phi: &CompositeTerm, eps: f64, max_iters: usize) -> Result<(DVector<f64>, usize, f64)> {
    let n = eval.grad.len();
    let t = eval.t;
    let y0 = &eval.y;
    let d = eval.hess.diagonal();
    let sd = d.map(f64::sqrt);
    // scaled Hessian D^{-1/2} H D^{-1/2}
    let hs = DMatrix::from_fn(n, n, |i, j| eval.hess[(i, j)] / (sd[i] * sd[j]));
    let gs = eval.grad.component_div(&sd);
    let (mu, l) = sym_extreme_eigenvalues(&hs);
    if !(mu > 1e-14 * l) {
        return Err(IpldError::Conditioning { mu, l });
    }
    let gamma = 1.0 / l;
    let steps = d.map(|di| gamma / (t * di));
    let target = 0.5 * eps * eps;

    // forward-backward map in w; returns T(w) and the scaled gradient-mapping norm²
    let forward_backward = |w: &DVector<f64>| -> (DVector<f64>, f64) {
        let grad = &hs * w + &gs;
        let v = w - grad * gamma;
        let yv = y0 + v.component_div(&sd);
        let yp = phi.prox_diag(&yv, &steps);
        let wp = (yp - y0).component_mul(&sd);
        let gm = (w - &wp) * l;
        let g2 = gm.norm_squared();
        (wp, g2)
    };

    // Try the active set of the base point first; along the path it rarely changes.
    if let Some(yc) = polish(eval, phi, &y0.map(sign_of)) {
        let (xn, g2) = forward_backward(&(&yc - y0).component_mul(&sd));
        let gap = g2 / (2.0 * mu);
        if gap <= target {
            return Ok((y0 + xn.component_div(&sd), 1, gap));
        }
    }

    let mut x = DVector::zeros(n);
    let mut z = x.clone();
    let mut theta = 1.0_f64;
    let mut gap = f64::INFINITY;
    let mut pattern = y0.map(sign_of);
    let mut stable = 0usize;
    for k in 0..max_iters {
        let (xn, g2) = forward_backward(&z);
        // T(z) is certified by the mapping at z
        gap = g2 / (2.0 * mu);
        if gap <= target {
            return Ok((y0 + xn.component_div(&sd), k + 1, gap));
        }
        let yn = y0 + xn.component_div(&sd);
        let pn = yn.map(sign_of);
        if pn == pattern {
            stable += 1;
        } else {
            pattern = pn;
            stable = 0;
        }
        if stable == POLISH_AFTER {
            if let Some(yc) = polish(eval, phi, &pattern) {
                let (xc, gc) = forward_backward(&(&yc - y0).component_mul(&sd));
                if gc / (2.0 * mu) <= target {
                    return Ok((y0 + xc.component_div(&sd), k + 2, gc / (2.0 * mu)));
                }
            }
        }
        let restart = (&z - &xn).dot(&(&xn - &x)) > 0.0;
        if restart {
            theta = 1.0;
            z = xn.clone();
        } else {
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            z = &xn + (&xn - &x) * ((theta - 1.0) / theta_next);
            theta = theta_next;
        }
        x = xn;
    }
    Err(IpldError::MasterNonConvergence { iters: max_iters, gap_bound: gap, target })
}

const POLISH_AFTER: usize = 15;

fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Minimizes `Q` exactly on the face given by a sign pattern: coordinates with
/// sign 0 are fixed at the kink `yᵢ = 0`, the rest see the linear piece of `h̄`.
fn polish(eval: &OracleEval, phi: &CompositeTerm, pattern: &DVector<f64>) -> Option<DVector<f64>> {
    let free: Vec<usize> = (0..pattern.len()).filter(|&i| pattern[i] != 0.0).collect();
    let t = eval.t;
    let y0 = &eval.y;
    let mut y = DVector::zeros(pattern.len());
    if !free.is_empty() {
        let m = free.len();
        let hff = DMatrix::from_fn(m, m, |a, b| eval.hess[(free[a], free[b])]);
        // H(y − y₀) + g + c/t = 0 on the free set, with y = 0 on the fixed set
        let hy0 = &eval.hess * y0;
        let mut rhs = DVector::zeros(m);
        for (a, &i) in free.iter().enumerate() {
            let slope = if pattern[i] > 0.0 { -phi.lower()[i] } else { -phi.upper()[i] };
            if !slope.is_finite() {
                return None;
            }
            rhs[a] = hy0[i] - eval.grad[i] - slope / t;
        }
        let sol = crate::linalg::SpdFactor::new(&hff).ok()?.solve(&rhs);
        for (a, &i) in free.iter().enumerate() {
            y[i] = sol[a];
        }
    }
    Some(y)
}

/// Gradient mapping `G = H(y − s)` at the oracle's base point, with `s` the
/// inexact prox point, and the decrement `λ = ‖G‖*_{y,t}`.
pub fn gradient_mapping(
    eval: &OracleEval,
    phi: &CompositeTerm,
    eps_inner: f64,
) -> Result<(DVector<f64>, f64, MasterStepResult)> {
    let step = scaled_prox(eval, phi, eps_inner)?;
    let g = &eval.hess * (&eval.y - &step.y_next);
    let lambda = eval.norm(&g, NormKind::Dual);
    Ok((g, lambda, step))
}

/// Value of the model `Q` at `y`.
pub fn model_value(eval: &OracleEval, phi: &CompositeTerm, y: &DVector<f64>) -> f64 {
    let dy = y - &eval.y;
    let h = match phi.kind() {
        CompositeKind::Zero => 0.0,
        _ => phi.conjugate_neg(y),
    };
    eval.grad.dot(&dy) + 0.5 * dy.dot(&(&eval.hess * &dy)) + h / eval.t
}
