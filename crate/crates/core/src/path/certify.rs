use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::model::{primal_dual_norm, DualPoint, PrimalPoint, ProblemInstance};
use crate::oracle::{NormKind, OracleEval};

/// Measured primal-dual optimality quantities at `(x, y, t)`.
///
/// The exact prox point is replaced by the computed inexact one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub t: f64,
    /// `‖Aᵀy − ∇g(x)‖*_{x,t}`.
    pub primal_opt: f64,
    /// `(√ν + δ/(1+δ)) t`.
    pub bound_primal: f64,
    /// `‖e‖*_{y,t}` with `e = tH(s − y)`.
    pub dual_resid_e: f64,
    /// `‖Aᵀr‖*_{x,t}` with `r = y − s`.
    pub dual_resid_r: f64,
    /// `t λ`.
    pub bound_dual: f64,
    /// Max-norm residual of `−s ∈ N_C(Ax + e)`.
    pub inclusion_resid: f64,
    pub interior: bool,
}

impl Certificate {
    /// All conditions of an `eps`-approximate primal-dual pair.
    pub fn passes(&self, eps: f64) -> bool {
        self.interior
            && self.primal_opt <= eps
            && self.dual_resid_e <= eps
            && self.dual_resid_r <= eps
            && self.inclusion_resid <= eps
    }

    pub fn primal_within_bound(&self) -> bool {
        self.primal_opt <= self.bound_primal * (1.0 + 1e-10)
    }

    /// Both dual residuals equal `tλ` to relative `tol`.
    pub fn dual_identities_hold(&self, tol: f64) -> bool {
        let s = self.bound_dual.abs().max(f64::MIN_POSITIVE);
        (self.dual_resid_e - self.bound_dual).abs() <= tol * s && (self.dual_resid_r - self.bound_dual).abs() <= tol * s
    }
}

/// Builds the certificate for the pair `(x, y)` from the oracle at `(t, y)`
/// (whose slave point is `x`) and the computed prox point.
pub fn certify(
    instance: &ProblemInstance,
    eval: &OracleEval,
    x: &PrimalPoint,
    y: &DualPoint,
    lambda: f64,
    prox_point: &DualPoint,
) -> Certificate {
    let t = eval.t;
    let aty = instance.apply_at(y);
    let resid: Vec<DVector<f64>> = instance.grad_g(x).iter().zip(&aty).map(|(g, a)| a - g).collect();
    let primal_opt = primal_dual_norm(eval.block_factors(), &resid);
    let delta = eval.delta_used;
    let bound_primal = (instance.nu().sqrt() + delta / (1.0 + delta)) * t;

    let diff = prox_point - y;
    let e = (&eval.hess * &diff) * t;
    let dual_resid_e = eval.norm(&e, NormKind::Dual);
    let r = -&diff;
    let atr = instance.apply_at(&r);
    let dual_resid_r = primal_dual_norm(eval.block_factors(), &atr);

    let w = instance.apply_a(x) + &e;
    let proj = instance.phi().project(&(&w - prox_point));
    let inclusion_resid = (&w - proj).amax();

    Certificate {
        t,
        primal_opt,
        bound_primal,
        dual_resid_e,
        dual_resid_r,
        bound_dual: t * lambda,
        inclusion_resid,
        interior: x.is_interior(),
    }
}
