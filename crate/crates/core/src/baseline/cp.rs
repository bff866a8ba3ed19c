//! Chambolle-Pock primal-dual iteration for `min_u G(u) + F(Ku)`.

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::apps::NumData;
use crate::error::{IpldError, Result};

pub const CP_DEFAULT_TAU: f64 = 1e-6;
pub const CP_DEFAULT_MAX_ITER: usize = 20_000;
pub const CP_STEP_PRODUCT: f64 = 0.99;
const NORM_INFLATION: f64 = 1.01;
const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

/// A closed convex term with an Euclidean prox and a computable conjugate.
pub trait CpTerm: Send + Sync {
    fn dim(&self) -> usize;
    /// `argmin_u h(u) + ‖u − v‖²/(2 step)`.
    fn prox(&self, v: &DVector<f64>, step: f64) -> DVector<f64>;
    /// Finite part of `h`; indicator terms report zero and expose [`CpTerm::violation`].
    fn value(&self, u: &DVector<f64>) -> f64;
    /// `h*(w)`, possibly `+∞`.
    fn conjugate(&self, w: &DVector<f64>) -> f64;
    /// Max-norm distance to the domain of an indicator term.
    fn violation(&self, _u: &DVector<f64>) -> f64 {
        0.0
    }
}

pub struct CpProblem {
    pub k: DMatrix<f64>,
    pub g: Box<dyn CpTerm>,
    pub f: Box<dyn CpTerm>,
    /// Upper estimate of `‖K‖₂`.
    pub k_norm: f64,
}

impl CpProblem {
    pub fn new(k: DMatrix<f64>, g: Box<dyn CpTerm>, f: Box<dyn CpTerm>) -> Result<Self> {
        if k.ncols() != g.dim() || k.nrows() != f.dim() {
            return Err(IpldError::Dimension(format!(
                "K is {}x{}, G acts on {}, F on {}",
                k.nrows(),
                k.ncols(),
                g.dim(),
                f.dim()
            )));
        }
        let k_norm = operator_norm(&k) * NORM_INFLATION;
        Ok(Self { k, g, f, k_norm })
    }

    /// `σ = 0.99/(τ‖K‖²)`.
    pub fn dual_step(&self, tau: f64) -> f64 {
        if self.k_norm == 0.0 {
            return 1.0;
        }
        CP_STEP_PRODUCT / (tau * self.k_norm * self.k_norm)
    }

    pub fn primal_value(&self, u: &DVector<f64>) -> f64 {
        self.g.value(u)
    }

    /// `−G*(−Kᵀy) − F*(y)`.
    pub fn dual_value(&self, y: &DVector<f64>) -> f64 {
        -self.g.conjugate(&-(self.k.tr_mul(y))) - self.f.conjugate(y)
    }

    pub fn feasibility(&self, u: &DVector<f64>) -> f64 {
        self.f.violation(&(&self.k * u))
    }
}

/// Largest singular value by power iteration on `KᵀK`, stopped at relative
/// stagnation below 1e-8.
pub fn operator_norm(k: &DMatrix<f64>) -> f64 {
    if k.ncols() == 0 || k.amax() == 0.0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(k.ncols(), |i, _| 1.0 + (i % 7) as f64 * 0.1);
    v.normalize_mut();
    let mut est = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = k.tr_mul(&(k * &v));
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        v = w / n;
        let next = n.sqrt();
        if (next - est).abs() <= POWER_TOL * next {
            return next;
        }
        est = next;
    }
    est
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpHistoryRow {
    pub k: usize,
    pub primal: f64,
    pub dual: f64,
    pub feasibility: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpResult {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    pub tau: f64,
    pub sigma: f64,
    pub k_norm: f64,
    pub feasibility: f64,
    pub rel_gap: f64,
    pub history: Vec<CpHistoryRow>,
}

impl CpResult {
    pub fn step_product(&self) -> f64 {
        self.tau * self.sigma * self.k_norm * self.k_norm
    }
}

/// Relative duality gap `|P − D| / (1 + |P|)`.
fn rel_gap(primal: f64, dual: f64) -> f64 {
    if !dual.is_finite() {
        return f64::INFINITY;
    }
    (primal - dual).abs() / (1.0 + primal.abs())
}

/// Runs the iteration with over-relaxation 1 from `u = 0`, `y = 0` (or the
/// prox of zero when that lies outside the domain of `G`). Stops once both the
/// feasibility violation and the relative gap fall below their tolerances; a
/// run that hits `max_iter` is returned with `converged = false`.
pub fn cp_solve(prob: &CpProblem, tau: f64, max_iter: usize, tol_feas: f64, tol_gap: f64) -> Result<CpResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(IpldError::InvalidArgument(format!("CP step tau = {tau} must be positive")));
    }
    let sigma = prob.dual_step(tau);
    let mut u = prob.g.prox(&DVector::zeros(prob.g.dim()), tau);
    let mut u_bar = u.clone();
    let mut y = DVector::zeros(prob.f.dim());
    let mut history = Vec::new();
    let mut feas = prob.feasibility(&u);
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        // prox of σF* by Moreau: v − σ prox_{F/σ}(v/σ)
        let v = &y + (&prob.k * &u_bar) * sigma;
        y = &v - prob.f.prox(&(&v / sigma), 1.0 / sigma) * sigma;
        let u_next = prob.g.prox(&(&u - prob.k.tr_mul(&y) * tau), tau);
        u_bar = &u_next * 2.0 - &u;
        u = u_next;

        feas = prob.feasibility(&u);
        let primal = prob.primal_value(&u);
        let dual = prob.dual_value(&y);
        gap = rel_gap(primal, dual);
        history.push(CpHistoryRow { k: it, primal, dual, feasibility: feas, rel_gap: gap });
        if feas <= tol_feas && gap <= tol_gap {
            debug!("CP converged after {it} iterations");
            return Ok(CpResult {
                u: u.as_slice().to_vec(),
                y: y.as_slice().to_vec(),
                iters: it,
                converged: true,
                tau,
                sigma,
                k_norm: prob.k_norm,
                feasibility: feas,
                rel_gap: gap,
                history,
            });
        }
    }
    Ok(CpResult {
        u: u.as_slice().to_vec(),
        y: y.as_slice().to_vec(),
        iters: max_iter,
        converged: false,
        tau,
        sigma,
        k_norm: prob.k_norm,
        feasibility: feas,
        rel_gap: gap,
        history,
    })
}

/// Geometric grid `1, 1e-1, ..., 1e-8`.
pub fn default_tau_grid() -> Vec<f64> {
    (0..=8).map(|k| 10f64.powi(-k)).collect()
}

/// Runs every `τ` of the grid and keeps the best run: converged runs by
/// iteration count, otherwise the smallest `max(feasibility, gap)`.
pub fn cp_tune(prob: &CpProblem, taus: &[f64], max_iter: usize, tol_feas: f64, tol_gap: f64) -> Result<CpResult> {
    let mut best: Option<CpResult> = None;
    for &tau in taus {
        let r = cp_solve(prob, tau, max_iter, tol_feas, tol_gap)?;
        let better = match &best {
            None => true,
            Some(b) => match (r.converged, b.converged) {
                (true, false) => true,
                (true, true) => r.iters < b.iters,
                (false, true) => false,
                (false, false) => r.feasibility.max(r.rel_gap) < b.feasibility.max(b.rel_gap),
            },
        };
        if better {
            best = Some(r);
        }
    }
    best.ok_or_else(|| IpldError::InvalidArgument("empty tau grid".into()))
}

/// Primal term of the NUM splitting on `u = (x, z)`:
/// `(ρ/2)‖x − r‖² + δ_[0,M](x) − Σ ln z`.
#[derive(Debug, Clone)]
pub struct NumPrimalTerm {
    pub r: DVector<f64>,
    pub rho: f64,
    pub cap: f64,
    pub n_log: usize,
}

impl NumPrimalTerm {
    fn n_x(&self) -> usize {
        self.r.len()
    }
}

/// Prox of `−step·ln z`.
pub fn log_prox(v: f64, step: f64) -> f64 {
    0.5 * (v + (v * v + 4.0 * step).sqrt())
}

impl CpTerm for NumPrimalTerm {
    fn dim(&self) -> usize {
        self.n_x() + self.n_log
    }

    fn prox(&self, v: &DVector<f64>, step: f64) -> DVector<f64> {
        let n = self.n_x();
        DVector::from_fn(self.dim(), |i, _| {
            if i < n {
                ((v[i] + step * self.rho * self.r[i]) / (1.0 + step * self.rho)).clamp(0.0, self.cap)
            } else {
                log_prox(v[i], step)
            }
        })
    }

    fn value(&self, u: &DVector<f64>) -> f64 {
        let n = self.n_x();
        let quad: f64 = (0..n).map(|i| (u[i] - self.r[i]).powi(2)).sum::<f64>() * 0.5 * self.rho;
        let logs: f64 = (n..self.dim()).map(|i| if u[i] > 0.0 { u[i].ln() } else { f64::NEG_INFINITY }).sum();
        quad - logs
    }

    fn conjugate(&self, w: &DVector<f64>) -> f64 {
        let n = self.n_x();
        let mut s = 0.0;
        for i in 0..n {
            // sup over [0, M] of w x − (ρ/2)(x − r)²
            let x = if self.rho > 0.0 { (self.r[i] + w[i] / self.rho).clamp(0.0, self.cap) } else if w[i] > 0.0 { self.cap } else { 0.0 };
            s += w[i] * x - 0.5 * self.rho * (x - self.r[i]).powi(2);
        }
        for i in n..self.dim() {
            if w[i] >= 0.0 {
                return f64::INFINITY;
            }
            s += -1.0 - (-w[i]).ln();
        }
        s
    }
}

/// Indicator of `[lower, upper]`, with equal bounds for equality rows.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl CpTerm for BoxIndicator {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn prox(&self, v: &DVector<f64>, _step: f64) -> DVector<f64> {
        DVector::from_fn(v.len(), |i, _| v[i].clamp(self.lower[i], self.upper[i]))
    }

    fn value(&self, _u: &DVector<f64>) -> f64 {
        0.0
    }

    fn conjugate(&self, w: &DVector<f64>) -> f64 {
        (0..w.len()).map(|i| (self.lower[i] * w[i]).max(self.upper[i] * w[i])).sum()
    }

    fn violation(&self, u: &DVector<f64>) -> f64 {
        (0..u.len()).map(|i| (self.lower[i] - u[i]).max(u[i] - self.upper[i]).max(0.0)).fold(0.0, f64::max)
    }
}

/// NUM in CP form with auxiliary `z_i = d_iᵀx_i + μ_i`: `K u = (A x, z − D x)`
/// and `F = δ_[L,U] × δ_{μ}`. Flow variables keep the order of `data.flows`.
pub struct CpNum {
    pub problem: CpProblem,
    pub n_flows: usize,
    /// Source node of each auxiliary variable.
    pub sources: Vec<usize>,
}

pub fn build_cp_num(data: &NumData) -> Result<CpNum> {
    let groups = data.flows_by_source();
    let sources: Vec<usize> = (0..data.n_nodes).filter(|&i| !groups[i].is_empty()).collect();
    let p = data.n_vars();
    let e = data.n_rows();
    let nz = sources.len();
    let mut k = DMatrix::zeros(e + nz, p + nz);
    for (col, f) in data.flows.iter().enumerate() {
        for &row in &f.rows {
            k[(row, col)] = 1.0;
        }
    }
    let mut lower = DVector::zeros(e + nz);
    let mut upper = DVector::zeros(e + nz);
    for row in 0..e {
        lower[row] = data.lower[row];
        upper[row] = data.upper[row];
    }
    for (s, &i) in sources.iter().enumerate() {
        k[(e + s, p + s)] = 1.0;
        for &col in &groups[i] {
            k[(e + s, col)] = -data.d[i][data.flows[col].target];
        }
        lower[e + s] = data.mu[i];
        upper[e + s] = data.mu[i];
    }
    let r = DVector::from_iterator(p, data.flows.iter().map(|f| data.r[f.source][f.target]));
    let g = NumPrimalTerm { r, rho: data.rho, cap: data.rate_cap, n_log: nz };
    let problem = CpProblem::new(k, Box::new(g), Box::new(BoxIndicator { lower, upper }))?;
    Ok(CpNum { problem, n_flows: p, sources })
}

impl CpNum {
    pub fn flows<'a>(&self, result: &'a CpResult) -> &'a [f64] {
        &result.u[..self.n_flows]
    }

    /// NUM objective in minimization form, evaluated on the flows alone.
    pub fn objective(&self, data: &NumData, result: &CpResult) -> f64 {
        -data.utility(self.flows(result))
    }

    /// Violation of `L ≤ Ax ≤ U` for the flows alone.
    pub fn flow_feasibility(&self, data: &NumData, result: &CpResult) -> f64 {
        let mut load = vec![0.0; data.n_rows()];
        for (f, &x) in data.flows.iter().zip(self.flows(result)) {
            for &row in &f.rows {
                load[row] += x;
            }
        }
        (0..load.len()).map(|e| (data.lower[e] - load[e]).max(load[e] - data.upper[e]).max(0.0)).fold(0.0, f64::max)
    }
}
