//! Closed-form scalar functions and parameter rules used by the path-following
//! method: the self-concordance functions `ω` / `ω*`, the barrier scaling
//! coefficient, the contraction factor `σ`, step sizes, iteration bounds and
//! generalized self-concordance conversions.

use serde::{Deserialize, Serialize};

use crate::error::{IpldError, Result};

/// `ω(τ) = τ − ln(1 + τ)` for `τ ≥ 0`.
pub fn omega(tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    tau - tau.ln_1p()
}

/// `ω*(τ) = −τ − ln(1 − τ)` for `τ ∈ [0, 1)`.
pub fn omega_star(tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) {
        return Err(IpldError::Domain(format!("omega_star needs tau in [0,1), got {tau}")));
    }
    Ok(-tau - (-tau).ln_1p())
}

/// Scaling `M_t² / 4` of the smoothed dual. For `t ∈ (0, 1]` this is `1/t`.
pub fn mt_coeff(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(1.0 / t)
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(IpldError::InvalidArgument(format!("barrier parameter t must lie in (0,1], got {t}")))
    }
}

/// Contraction factor of the barrier parameter: `σ = 1 − 0.29β / (0.3β + √ν)`.
pub fn sigma_rule(beta: f64, nu: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 0.1) {
        return Err(IpldError::InvalidArgument(format!("beta must lie in (0, 0.1], got {beta}")));
    }
    if !(nu > 0.0) {
        return Err(IpldError::InvalidArgument(format!("barrier parameter nu must be positive, got {nu}")));
    }
    Ok(1.0 - 0.29 * beta / (0.3 * beta + nu.sqrt()))
}

/// `c_ν(σ) = δ/σ + ((1 − σ)/σ)√ν`.
pub fn c_nu(sigma: f64, delta: f64, nu: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(IpldError::InvalidArgument(format!("sigma must lie in (0,1], got {sigma}")));
    }
    Ok(delta / sigma + (1.0 - sigma) / sigma * nu.sqrt())
}

/// Damped step size of the initialization phase.
///
/// With `δ = ε = 0` this is the classical `1/(1 + λ̂)`.
pub fn phase1_stepsize(lambda_hat: f64, eps: f64, delta: f64) -> Result<f64> {
    let a = lambda_hat - eps - delta;
    if !(a > 0.0) {
        return Err(IpldError::InvalidArgument(format!(
            "step size undefined: lambda_hat {lambda_hat} <= eps + delta {}",
            eps + delta
        )));
    }
    let w = 1.0 - delta;
    Ok(a * w * w / ((1.0 + w * a) * lambda_hat))
}

/// Worst-case number of main-loop iterations `⌊ln(t₀/ε̂) / (−ln σ)⌋`.
pub fn kmax_bound(t0: f64, eps_hat: f64, sigma: f64) -> usize {
    let r = (t0 / eps_hat).ln() / (-sigma.ln());
    if r.is_finite() && r > 0.0 {
        r.floor() as usize
    } else {
        0
    }
}

/// Guaranteed per-step decrease of the initialization phase.
pub fn phase1_decrease(beta: f64) -> f64 {
    omega(0.97 * beta * (1.0 - 1e-2 * beta))
}

/// Initialization iteration bound given the dual gap `D(ŷ⁰) − D*`.
pub fn jmax_bound(gap: f64, beta: f64) -> usize {
    let q = gap.max(0.0) / phase1_decrease(beta);
    q.floor() as usize + 1
}

/// Upper bound on `λ_{t+}(y⁺)` after one inexact proximal-Newton step.
///
/// `delta_next` is the slave accuracy at the new point, `delta` the accuracy
/// at the base point, `eps` the master accuracy and `lambda` the decrement
/// `λ_{t+}(y)` at the base point. Returns `+∞` when the estimate is vacuous.
pub fn newton_step_bound(delta_next: f64, delta: f64, eps: f64, lambda: f64) -> f64 {
    let le = lambda + eps;
    let den1 = (1.0 - delta_next) * (1.0 - delta - lambda - eps);
    let den2 = 1.0 - lambda - delta - eps;
    if den1 <= 0.0 || den2 <= 0.0 {
        return f64::INFINITY;
    }
    let inner = 3.0 * eps + delta + (4.0 * delta - 2.0 * delta * delta).max(0.0).sqrt() * le + le * le / den2;
    delta_next + inner / den1
}

/// Upper bound on `λ_{t+}(y)` in terms of the slave displacements and `λ_t(y)`.
pub fn parameter_update_bound(delta_t: f64, delta_t_next: f64, sigma: f64, lambda: f64) -> f64 {
    let w = 1.0 - delta_t;
    if w <= 0.0 {
        return f64::INFINITY;
    }
    let rad = 1.0 - 2.0 * sigma * w * w + sigma;
    delta_t_next + (1.0 + rad.max(0.0).sqrt()) / (sigma * w) * lambda
}

/// Bound `(δ + c)/(1 − δ − c)` on the slave displacement when `t` shrinks.
pub fn displacement_bound(delta: f64, c: f64) -> f64 {
    let s = delta + c;
    if s >= 1.0 {
        f64::INFINITY
    } else {
        s / (1.0 - s)
    }
}

/// Grid check that `N(a,b) ⊆ [0, (a+b)/(1−a−b)]²` where
/// `N(a,b) = {(u,v) ≥ 0 : u²/(1+u) ≤ au + bv, v²/(1+v) ≤ av + bu}`.
///
/// Enumerates `(i·step, j·step)` for `i, j ∈ 0..=⌊extent/step⌋`.
pub fn lemma4_region_check(a: f64, b: f64, step: f64, extent: f64) -> Result<bool> {
    if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0 && a + b < 1.0) {
        return Err(IpldError::InvalidArgument(format!("need a,b in (0,1) with a+b<1, got ({a},{b})")));
    }
    let bound = (a + b) / (1.0 - a - b);
    let n = (extent / step).round() as usize;
    for i in 0..=n {
        let u = i as f64 * step;
        for j in 0..=n {
            let v = j as f64 * step;
            if in_lemma4_region(a, b, u, v) && (u > bound || v > bound) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn in_lemma4_region(a: f64, b: f64, u: f64, v: f64) -> bool {
    u >= 0.0 && v >= 0.0 && u * u / (1.0 + u) <= a * u + b * v && v * v / (1.0 + v) <= a * v + b * u
}

/// Generalized self-concordance descriptor `(M, θ)` with an optional
/// strong-convexity modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GscParams {
    pub m: f64,
    pub theta: f64,
    pub mu: Option<f64>,
}

impl GscParams {
    pub fn new(m: f64, theta: f64) -> Result<Self> {
        if !(m >= 0.0) || !(theta > 0.0 && theta < 6.0) {
            return Err(IpldError::InvalidArgument(format!("invalid descriptor M={m}, theta={theta}")));
        }
        Ok(Self { m, theta, mu: None })
    }

    pub fn standard() -> Self {
        Self { m: 2.0, theta: 3.0, mu: None }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn is_standard(&self) -> bool {
        self.theta == 3.0 && self.m == 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GscRule {
    /// Strongly convex function of order `θ ≤ 3` becomes self-concordant.
    StronglyConvex,
    /// Legendre conjugate of order `θ ∈ [3,6)` has order `6 − θ`.
    Conjugate,
    /// Sum with an `m_f`-self-concordant function on a bounded common domain.
    SumWithSc { m_f: f64 },
}

pub fn gsc_convert(p: GscParams, rule: GscRule) -> Result<GscParams> {
    let mismatch = |msg: &str| Err(IpldError::InvalidArgument(format!("{msg} (M={}, theta={})", p.m, p.theta)));
    let sc_parameter = |p: &GscParams| -> Result<f64> {
        if p.theta == 3.0 {
            return Ok(p.m);
        }
        match p.mu {
            Some(mu) if mu > 0.0 => Ok(mu.powf((p.theta - 3.0) / 2.0) * p.m),
            _ => Err(IpldError::InvalidArgument("strong convexity modulus required for theta < 3".into())),
        }
    };
    match rule {
        GscRule::StronglyConvex => {
            if !(p.theta > 0.0 && p.theta <= 3.0) {
                return mismatch("strongly-convex rule needs theta in (0,3]");
            }
            Ok(GscParams { m: sc_parameter(&p)?, theta: 3.0, mu: p.mu })
        }
        GscRule::Conjugate => {
            if !(p.theta >= 3.0 && p.theta < 6.0) {
                return mismatch("conjugate rule needs theta in [3,6)");
            }
            Ok(GscParams { m: p.m, theta: 6.0 - p.theta, mu: None })
        }
        GscRule::SumWithSc { m_f } => {
            if !(p.theta > 0.0 && p.theta <= 3.0) {
                return mismatch("sum rule needs theta in (0,3]");
            }
            Ok(GscParams { m: m_f.max(sc_parameter(&p)?), theta: 3.0, mu: p.mu })
        }
    }
}
