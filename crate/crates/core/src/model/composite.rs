use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{IpldError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositeKind {
    /// `φ = δ_{0}`, so `φ*(−y) ≡ 0`. Only useful for testing the unconstrained master step.
    Zero,
    /// `φ = δ_{b}`: the master step is a linear system.
    Point,
    /// `φ = δ_C` for a product of (possibly half-infinite) intervals.
    Box,
}

/// Indicator `φ = δ_C` of a box `C ⊂ ℝⁿ`, accessed through the dual-side map
/// `h̄(y) = φ*(−y)` and its Euclidean proximal operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeTerm {
    lower: Vec<f64>,
    upper: Vec<f64>,
    kind: CompositeKind,
}

impl CompositeTerm {
    pub fn zero(n: usize) -> Self {
        Self { lower: vec![0.0; n], upper: vec![0.0; n], kind: CompositeKind::Zero }
    }

    pub fn point(b: Vec<f64>) -> Self {
        Self { lower: b.clone(), upper: b, kind: CompositeKind::Point }
    }

    pub fn interval(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(IpldError::Dimension(format!("{} lower vs {} upper bounds", lower.len(), upper.len())));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(IpldError::InvalidArgument(format!("row {i}: empty interval [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper, kind: CompositeKind::Box })
    }

    /// `φ = δ_{(−∞, b]}`.
    pub fn upper_bounded(b: Vec<f64>) -> Self {
        let n = b.len();
        Self { lower: vec![f64::NEG_INFINITY; n], upper: b, kind: CompositeKind::Box }
    }

    pub fn kind(&self) -> CompositeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `φ*(−y) = Σ sup_{uᵢ∈[lᵢ,uᵢ]} (−yᵢ) uᵢ`, `+∞` outside the domain.
    pub fn conjugate_neg(&self, y: &DVector<f64>) -> f64 {
        let mut s = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            let w = -yi;
            let term = if w > 0.0 {
                w * self.upper[i]
            } else if w < 0.0 {
                w * self.lower[i]
            } else {
                0.0
            };
            if term == f64::INFINITY {
                return f64::INFINITY;
            }
            s += term;
        }
        s
    }

    /// Prox of `step · φ*(−·)` at `v`. By the Moreau identity this is
    /// `v + step · Π_C(−v / step)`.
    pub fn prox(&self, v: &DVector<f64>, step: f64) -> DVector<f64> {
        DVector::from_iterator(v.len(), (0..v.len()).map(|i| self.prox_coord(i, v[i], step)))
    }

    /// Coordinate-wise prox with per-coordinate steps, valid because `φ*(−·)`
    /// is separable.
    pub fn prox_diag(&self, v: &DVector<f64>, steps: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(v.len(), (0..v.len()).map(|i| self.prox_coord(i, v[i], steps[i])))
    }

    #[inline]
    fn prox_coord(&self, i: usize, v: f64, step: f64) -> f64 {
        // v + clamp(−v, step·l, step·u)
        let lo = step * self.lower[i];
        let hi = step * self.upper[i];
        v + (-v).max(lo).min(hi)
    }

    pub fn project(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(z.len(), z.iter().enumerate().map(|(i, &v)| v.max(self.lower[i]).min(self.upper[i])))
    }

    /// Max-norm distance from `z` to `C`.
    pub fn violation(&self, z: &DVector<f64>) -> f64 {
        z.iter()
            .enumerate()
            .map(|(i, &v)| (self.lower[i] - v).max(v - self.upper[i]).max(0.0))
            .fold(0.0, f64::max)
    }
}
