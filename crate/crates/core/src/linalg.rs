//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{IpldError, Result};

/// Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let chol = Cholesky::new(m.clone()).ok_or_else(|| {
            IpldError::Factorization(format!("{}x{} matrix is not positive definite", m.nrows(), m.ncols()))
        })?;
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    /// `vᵀ M⁻¹ v`, computed as `‖L⁻¹ v‖²`.
    pub fn inv_quad(&self, v: &DVector<f64>) -> f64 {
        let mut w = v.clone();
        self.chol.l_dirty().solve_lower_triangular_mut(&mut w);
        w.norm_squared()
    }

    /// `L⁻¹ B` for the lower factor `L`.
    pub fn lower_solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut w = b.clone();
        self.chol.l_dirty().solve_lower_triangular_mut(&mut w);
        w
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

pub fn quad(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    u.dot(&(m * u))
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix.
pub fn sym_extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = m.clone().symmetric_eigenvalues();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &e in ev.iter() {
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (lo, hi)
}

/// Eigenvalues of the pencil `(a, b)`, i.e. of `L⁻¹ a L⁻ᵀ` with `b = L Lᵀ`.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &SpdFactor) -> Vec<f64> {
    let la = b.lower_solve_matrix(a);
    let m = b.lower_solve_matrix(&la.transpose());
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Numerical rank of a symmetric PSD matrix with relative cutoff.
pub fn psd_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let ev = m.clone().symmetric_eigenvalues();
    ev.iter().filter(|&&e| e > rel_tol * scale).count()
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_quad_matches_solve() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let f = SpdFactor::new(&m).unwrap();
        let v = DVector::from_vec(vec![1.0, -2.0]);
        let direct = v.dot(&f.solve(&v));
        assert!((f.inv_quad(&v) - direct).abs() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_fails_to_factor() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(SpdFactor::new(&m), Err(IpldError::Factorization(_))));
    }

    #[test]
    fn generalized_eigs_of_scaled_pencil() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let a = &b * 3.0;
        let f = SpdFactor::new(&b).unwrap();
        for e in generalized_eigenvalues(&a, &f) {
            assert!((e - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_of_duplicated_rows() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(psd_rank(&(&a * a.transpose()), 1e-10), 1);
    }
}
