use nalgebra::{DMatrix, DVector};

use crate::error::{IpldError, Result};

/// Column block `A_i` of the coupling matrix, stored as a dense matrix over
/// the rows it actually touches.
#[derive(Debug, Clone)]
pub struct BlockCoupling {
    rows: Vec<usize>,
    local: DMatrix<f64>,
}

impl BlockCoupling {
    /// Builds `A_i` from `(row, column, value)` triplets; repeated entries are summed.
    pub fn from_triplets(n_rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<usize> = triplets.iter().map(|t| t.0).collect();
        rows.sort_unstable();
        rows.dedup();
        if let Some(&r) = rows.last() {
            if r >= n_rows {
                return Err(IpldError::Dimension(format!("row index {r} out of range for {n_rows} rows")));
            }
        }
        let mut local = DMatrix::zeros(rows.len(), cols);
        for &(r, c, v) in triplets {
            if c >= cols {
                return Err(IpldError::Dimension(format!("column index {c} out of range for {cols} columns")));
            }
            let lr = rows.binary_search(&r).expect("row collected above");
            local[(lr, c)] += v;
        }
        Ok(Self { rows, local })
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let rows: Vec<usize> = (0..a.nrows()).filter(|&r| a.row(r).iter().any(|&v| v != 0.0)).collect();
        let local = DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)]);
        Self { rows, local }
    }

    pub fn cols(&self) -> usize {
        self.local.ncols()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn local(&self) -> &DMatrix<f64> {
        &self.local
    }

    /// `y ← y + A_i x_i`.
    pub fn add_apply(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        let v = &self.local * x;
        for (k, &r) in self.rows.iter().enumerate() {
            y[r] += v[k];
        }
    }

    /// `A_iᵀ y`.
    pub fn transpose_apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let yl = DVector::from_iterator(self.rows.len(), self.rows.iter().map(|&r| y[r]));
        self.local.tr_mul(&yl)
    }

    pub fn dense(&self, n_rows: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n_rows, self.cols());
        for (k, &r) in self.rows.iter().enumerate() {
            a.row_mut(r).copy_from(&self.local.row(k));
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_and_transpose_agree_with_dense() {
        let b = BlockCoupling::from_triplets(4, 3, &[(0, 0, 1.0), (2, 1, 2.0), (2, 2, -1.0), (0, 2, 0.5), (0, 0, 1.0)])
            .unwrap();
        assert_eq!(b.rows(), &[0, 2]);
        let a = b.dense(4);
        assert_eq!(a[(0, 0)], 2.0);
        let x = DVector::from_vec(vec![1.0, -1.0, 2.0]);
        let mut y = DVector::zeros(4);
        b.add_apply(&x, &mut y);
        assert_eq!(y, &a * &x);
        let w = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(b.transpose_apply(&w), a.tr_mul(&w));
        assert_eq!(BlockCoupling::from_dense(&a).dense(4), a);
    }

    #[test]
    fn out_of_range_indices() {
        assert!(BlockCoupling::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(BlockCoupling::from_triplets(2, 2, &[(0, 2, 1.0)]).is_err());
    }
}
