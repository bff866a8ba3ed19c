use nalgebra::{DMatrix, DVector};

use crate::error::{IpldError, Result};

/// Separable logarithmic barrier for a product of intervals.
///
/// Coordinate `j` contributes `−ln(xⱼ − lⱼ)` when `lⱼ` is finite and
/// `−ln(uⱼ − xⱼ)` when `uⱼ` is finite, so a box coordinate has parameter 2
/// and a half-interval coordinate parameter 1.
#[derive(Debug, Clone)]
pub struct CoordinateBarrier {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nu: f64,
}

impl CoordinateBarrier {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(IpldError::Dimension(format!("{} lower vs {} upper bounds", lower.len(), upper.len())));
        }
        let mut nu = 0.0;
        for (j, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l >= u {
                return Err(IpldError::InvalidArgument(format!("coordinate {j}: empty interior [{l}, {u}]")));
            }
            if !l.is_finite() && !u.is_finite() {
                return Err(IpldError::InvalidArgument(format!("coordinate {j}: unbounded on both sides")));
            }
            nu += l.is_finite() as u8 as f64 + u.is_finite() as u8 as f64;
        }
        Ok(Self { lower, upper, nu })
    }

    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
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

    /// Barrier parameter `ν`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `ρ = ν + 2√ν`; kept as metadata only.
    pub fn rho(&self) -> f64 {
        self.nu + 2.0 * self.nu.sqrt()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&l, &u))| v > l && v < u)
    }

    /// Interior reference point: the midpoint of each box coordinate, or one
    /// unit inside the finite end of a half-interval.
    pub fn midpoint(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.lower.iter().zip(&self.upper).map(|(&l, &u)| match (l.is_finite(), u.is_finite()) {
                (true, true) => 0.5 * (l + u),
                (true, false) => l + 1.0,
                _ => u - 1.0,
            }),
        )
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let mut v = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            let (l, u) = (self.lower[j], self.upper[j]);
            if xj <= l || xj >= u {
                return f64::INFINITY;
            }
            if l.is_finite() {
                v -= (xj - l).ln();
            }
            if u.is_finite() {
                v -= (u - xj).ln();
            }
        }
        v
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            x.iter().enumerate().map(|(j, &xj)| {
                let (l, u) = (self.lower[j], self.upper[j]);
                let mut g = 0.0;
                if l.is_finite() {
                    g -= 1.0 / (xj - l);
                }
                if u.is_finite() {
                    g += 1.0 / (u - xj);
                }
                g
            }),
        )
    }

    pub fn hessian_diag(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            x.iter().enumerate().map(|(j, &xj)| {
                let (l, u) = (self.lower[j], self.upper[j]);
                let mut h = 0.0;
                if l.is_finite() {
                    h += 1.0 / ((xj - l) * (xj - l));
                }
                if u.is_finite() {
                    h += 1.0 / ((u - xj) * (u - xj));
                }
                h
            }),
        )
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.hessian_diag(x))
    }

    /// Squared Newton decrement `‖∇f(x)‖*²` in the barrier's own metric.
    pub fn decrement_sq(&self, x: &DVector<f64>) -> f64 {
        let g = self.gradient(x);
        let h = self.hessian_diag(x);
        g.iter().zip(h.iter()).map(|(g, h)| g * g / h).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters() {
        let b = CoordinateBarrier::new(vec![0.0, 0.0, f64::NEG_INFINITY], vec![1.0, f64::INFINITY, 3.0]).unwrap();
        assert_eq!(b.nu(), 4.0);
        assert_eq!(b.rho(), 8.0);
        let m = b.midpoint();
        assert_eq!(m.as_slice(), &[0.5, 1.0, 2.0]);
        assert!(b.contains(&m));
    }

    #[test]
    fn rejects_degenerate_intervals() {
        assert!(CoordinateBarrier::new(vec![1.0], vec![1.0]).is_err());
        assert!(CoordinateBarrier::new(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).is_err());
        assert!(CoordinateBarrier::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn boundary_points_are_not_interior() {
        let b = CoordinateBarrier::uniform_box(2, 0.0, 2.0).unwrap();
        assert!(!b.contains(&DVector::from_vec(vec![0.0, 1.0])));
        assert!(!b.contains(&DVector::from_vec(vec![1.0, 2.0])));
        assert_eq!(b.value(&DVector::from_vec(vec![2.0, 1.0])), f64::INFINITY);
    }

    #[test]
    fn blows_up_along_rays() {
        let b = CoordinateBarrier::uniform_box(1, 0.0, 2.0).unwrap();
        let mut prev = b.value(&DVector::from_element(1, 1.0));
        for k in 1..40 {
            let x = 2.0 - 0.5f64.powi(k);
            let v = b.value(&DVector::from_element(1, x));
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 20.0);
    }

    #[test]
    fn decrement_bounded_by_nu() {
        let b = CoordinateBarrier::new(vec![0.0, -1.0, 0.0], vec![1.0, 5.0, f64::INFINITY]).unwrap();
        for i in 1..50 {
            let s = i as f64 / 50.0;
            let x = DVector::from_vec(vec![s, -1.0 + 6.0 * s, 10.0 * s]);
            assert!(b.decrement_sq(&x) <= b.nu() + 1e-12);
        }
    }
}
