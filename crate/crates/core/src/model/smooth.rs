use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};

use crate::scalar::GscParams;

/// Smooth convex block function `g_i` with hand-coded derivatives.
pub trait BlockSmooth: Send + Sync + Debug {
    fn dim(&self) -> usize;

    /// Membership in the open domain of the function.
    fn in_domain(&self, _x: &DVector<f64>) -> bool {
        true
    }

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    fn gsc_params(&self) -> GscParams {
        GscParams::standard()
    }
}

/// `½ Σ wⱼ (xⱼ − cⱼ)²`.
#[derive(Debug, Clone)]
pub struct DiagonalQuadratic {
    pub center: DVector<f64>,
    pub weight: DVector<f64>,
}

impl DiagonalQuadratic {
    pub fn new(center: Vec<f64>, weight: Vec<f64>) -> Self {
        assert_eq!(center.len(), weight.len());
        Self { center: DVector::from_vec(center), weight: DVector::from_vec(weight) }
    }

    pub fn isotropic(center: Vec<f64>) -> Self {
        let n = center.len();
        Self::new(center, vec![1.0; n])
    }
}

impl BlockSmooth for DiagonalQuadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * (x - &self.center).component_mul(&(x - &self.center)).dot(&self.weight)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.center).component_mul(&self.weight)
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.weight)
    }

    fn gsc_params(&self) -> GscParams {
        // quadratics have vanishing third derivative
        GscParams { m: 0.0, theta: 3.0, mu: None }
    }
}
