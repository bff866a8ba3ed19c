use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{BlockCoupling, BlockSmooth, CompositeTerm, CoordinateBarrier};
use crate::error::{IpldError, Result};
use crate::linalg::SpdFactor;
use crate::scalar::check_t;

/// One separable block: smooth term `g_i`, barrier `f_i` of `K_i`, and the
/// coupling column block `A_i`.
#[derive(Debug)]
pub struct Block {
    pub smooth: Box<dyn BlockSmooth>,
    pub barrier: CoordinateBarrier,
    pub coupling: BlockCoupling,
}

impl Block {
    pub fn new(smooth: Box<dyn BlockSmooth>, barrier: CoordinateBarrier, coupling: BlockCoupling) -> Result<Self> {
        let p = smooth.dim();
        if barrier.dim() != p || coupling.cols() != p {
            return Err(IpldError::Dimension(format!(
                "block sizes disagree: smooth {p}, barrier {}, coupling {}",
                barrier.dim(),
                coupling.cols()
            )));
        }
        Ok(Self { smooth, barrier, coupling })
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn is_interior(&self, x: &DVector<f64>) -> bool {
        self.barrier.contains(x) && self.smooth.in_domain(x)
    }

    /// `ψ_{t,i}(x) = g_i(x)/t + f_i(x) − (A_iᵀy)ᵀx / t`, given `aty = A_iᵀy`.
    pub fn psi_value(&self, t: f64, x: &DVector<f64>, aty: &DVector<f64>) -> f64 {
        (self.smooth.value(x) - aty.dot(x)) / t + self.barrier.value(x)
    }

    pub fn psi_gradient(&self, t: f64, x: &DVector<f64>, aty: &DVector<f64>) -> DVector<f64> {
        (self.smooth.gradient(x) - aty) / t + self.barrier.gradient(x)
    }

    /// `∇²ψ_{t,i}(x) = ∇²g_i(x)/t + ∇²f_i(x)`; independent of `y`.
    pub fn psi_hessian(&self, t: f64, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.smooth.hessian(x) / t;
        let d = self.barrier.hessian_diag(x);
        for j in 0..d.len() {
            h[(j, j)] += d[j];
        }
        h
    }
}

/// Block-partitioned primal point with an interiority flag that is
/// recomputed whenever the point is built.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    blocks: Vec<DVector<f64>>,
    interior: bool,
}

impl PrimalPoint {
    pub fn new(instance: &ProblemInstance, blocks: Vec<DVector<f64>>) -> Result<Self> {
        if blocks.len() != instance.blocks().len() {
            return Err(IpldError::Dimension(format!(
                "{} primal blocks for {} problem blocks",
                blocks.len(),
                instance.blocks().len()
            )));
        }
        for (i, (x, b)) in blocks.iter().zip(instance.blocks()).enumerate() {
            if x.len() != b.dim() {
                return Err(IpldError::Dimension(format!("block {i}: length {} vs dimension {}", x.len(), b.dim())));
            }
        }
        let interior = blocks.iter().zip(instance.blocks()).all(|(x, b)| b.is_interior(x));
        Ok(Self { blocks, interior })
    }

    pub fn blocks(&self) -> &[DVector<f64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<DVector<f64>> {
        self.blocks
    }

    pub fn is_interior(&self) -> bool {
        self.interior
    }

    pub fn flatten(&self) -> DVector<f64> {
        let n = self.blocks.iter().map(|b| b.len()).sum();
        DVector::from_iterator(n, self.blocks.iter().flat_map(|b| b.iter().copied()))
    }
}

pub type DualPoint = DVector<f64>;

/// Separable problem `min Σ g_i(x_i) + φ(Σ A_i x_i)` over `x ∈ K₁ × … × K_N`.
#[derive(Debug)]
pub struct ProblemInstance {
    n_rows: usize,
    blocks: Vec<Block>,
    phi: CompositeTerm,
    nu_total: f64,
}

impl ProblemInstance {
    pub fn new(n_rows: usize, blocks: Vec<Block>, phi: CompositeTerm) -> Result<Self> {
        if phi.dim() != n_rows {
            return Err(IpldError::Dimension(format!("composite term has {} rows, coupling {n_rows}", phi.dim())));
        }
        if blocks.is_empty() {
            return Err(IpldError::InvalidArgument("instance has no blocks".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.coupling.rows().iter().any(|&r| r >= n_rows) {
                return Err(IpldError::Dimension(format!("block {i} couples rows beyond {n_rows}")));
            }
        }
        let nu_total = blocks.iter().map(|b| b.barrier.nu()).sum();
        Ok(Self { n_rows, blocks, phi, nu_total })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn phi(&self) -> &CompositeTerm {
        &self.phi
    }

    /// Total barrier parameter `ν_f = Σ ν_i`.
    pub fn nu(&self) -> f64 {
        self.nu_total
    }

    pub fn primal_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    pub fn point(&self, blocks: Vec<DVector<f64>>) -> Result<PrimalPoint> {
        PrimalPoint::new(self, blocks)
    }

    /// Barrier midpoints, the default slave warm start.
    pub fn midpoint(&self) -> PrimalPoint {
        let blocks = self.blocks.iter().map(|b| b.barrier.midpoint()).collect();
        PrimalPoint::new(self, blocks).expect("dimensions consistent by construction")
    }

    pub fn apply_a(&self, x: &PrimalPoint) -> DVector<f64> {
        let mut y = DVector::zeros(self.n_rows);
        for (b, xi) in self.blocks.iter().zip(x.blocks()) {
            b.coupling.add_apply(xi, &mut y);
        }
        y
    }

    pub fn apply_at(&self, y: &DVector<f64>) -> Vec<DVector<f64>> {
        self.blocks.iter().map(|b| b.coupling.transpose_apply(y)).collect()
    }

    pub fn dense_a(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_rows, self.primal_dim());
        let mut off = 0;
        for b in &self.blocks {
            let d = b.coupling.dense(self.n_rows);
            a.columns_mut(off, b.dim()).copy_from(&d);
            off += b.dim();
        }
        a
    }

    /// `g(x) = Σ g_i(x_i)`.
    pub fn objective(&self, x: &PrimalPoint) -> f64 {
        self.blocks.iter().zip(x.blocks()).map(|(b, xi)| b.smooth.value(xi)).sum()
    }

    pub fn grad_g(&self, x: &PrimalPoint) -> Vec<DVector<f64>> {
        self.blocks.iter().zip(x.blocks()).map(|(b, xi)| b.smooth.gradient(xi)).collect()
    }

    /// Max-norm distance of `Ax` from the set `C` of `φ = δ_C`.
    pub fn feasibility_violation(&self, x: &PrimalPoint) -> f64 {
        self.phi.violation(&self.apply_a(x))
    }

    fn check_interior(&self, x: &PrimalPoint) -> Result<()> {
        for (i, (b, xi)) in self.blocks.iter().zip(x.blocks()).enumerate() {
            if !b.is_interior(xi) {
                return Err(IpldError::Domain(format!("primal block {i} is not interior")));
            }
        }
        Ok(())
    }
}

/// Value and block derivatives of `ψ_t(·; y)`.
#[derive(Debug, Clone)]
pub struct PsiEval {
    pub value: f64,
    pub gradient: Vec<DVector<f64>>,
    pub hessian: Vec<DMatrix<f64>>,
}

/// Evaluates `ψ_t(x; y) = (1/t)[g(x) + t f(x) − yᵀAx]` for `t ∈ (0, 1]`.
pub fn evaluate_psi(instance: &ProblemInstance, t: f64, x: &PrimalPoint, y: &DualPoint) -> Result<PsiEval> {
    check_t(t)?;
    instance.check_interior(x)?;
    if y.len() != instance.n_rows() {
        return Err(IpldError::Dimension(format!("dual point has {} rows, expected {}", y.len(), instance.n_rows())));
    }
    let parts: Vec<(f64, DVector<f64>, DMatrix<f64>)> = instance
        .blocks()
        .par_iter()
        .zip(x.blocks().par_iter())
        .map(|(b, xi)| {
            let aty = b.coupling.transpose_apply(y);
            (b.psi_value(t, xi, &aty), b.psi_gradient(t, xi, &aty), b.psi_hessian(t, xi))
        })
        .collect();
    let mut value = 0.0;
    let mut gradient = Vec::with_capacity(parts.len());
    let mut hessian = Vec::with_capacity(parts.len());
    for (v, g, h) in parts {
        value += v;
        gradient.push(g);
        hessian.push(h);
    }
    Ok(PsiEval { value, gradient, hessian })
}

/// `⦀u⦀_{x,t} = (uᵀ∇²ψ_t(x)u)^{1/2}` for a block-diagonal Hessian.
pub fn primal_local_norm(hessian: &[DMatrix<f64>], u: &[DVector<f64>]) -> f64 {
    hessian.iter().zip(u).map(|(h, ui)| ui.dot(&(h * ui))).sum::<f64>().max(0.0).sqrt()
}

/// `⦀v⦀*_{x,t} = (vᵀ∇²ψ_t(x)⁻¹v)^{1/2}` from per-block factorizations.
pub fn primal_dual_norm(factors: &[SpdFactor], v: &[DVector<f64>]) -> f64 {
    factors.iter().zip(v).map(|(f, vi)| f.inv_quad(vi)).sum::<f64>().sqrt()
}

/// Factorizes each block of `∇²ψ_t(x)`.
pub fn factor_blocks(hessian: &[DMatrix<f64>]) -> Result<Vec<SpdFactor>> {
    hessian.iter().map(SpdFactor::new).collect()
}
