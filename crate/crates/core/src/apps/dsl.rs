//! Spectrum management in DSL: `M` channels shared by `m` users with a total
//! power budget per user.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream, STREAM_DSL};
use crate::error::{IpldError, Result};
use crate::model::{Block, BlockCoupling, BlockSmooth, CompositeTerm, CoordinateBarrier, ProblemInstance};

/// Per-channel data of `gᵢ(x) = aᵢᵀx − cᵢᵀ ln(Hᵢx + gᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DslChannel {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub g: Vec<f64>,
    /// Row-major `m × m`.
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DslData {
    pub users: usize,
    pub channels: Vec<DslChannel>,
    /// Power budget per user.
    pub b: Vec<f64>,
    /// Per-channel power cap.
    pub cap: f64,
}

impl DslData {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.users;
        if m == 0 || self.channels.is_empty() {
            return Err(IpldError::InvalidArgument("DSL data needs at least one user and one channel".into()));
        }
        if !(self.cap > 0.0) {
            return Err(IpldError::InvalidArgument(format!("power cap {} must be positive", self.cap)));
        }
        if self.b.len() != m {
            return Err(IpldError::Dimension(format!("budget has {} entries for {m} users", self.b.len())));
        }
        for (i, ch) in self.channels.iter().enumerate() {
            if ch.a.len() != m || ch.c.len() != m || ch.g.len() != m || ch.h.len() != m * m {
                return Err(IpldError::Dimension(format!("channel {i} does not match {m} users")));
            }
            if ch.c.iter().any(|&v| v < 0.0) {
                return Err(IpldError::InvalidArgument(format!("channel {i} has a negative weight in c")));
            }
            let f = channel_function(ch, m);
            if !f.in_domain(&DVector::from_element(m, 0.5 * self.cap)) {
                return Err(IpldError::Domain(format!("channel {i}: Hx + g not positive at the box midpoint")));
            }
        }
        Ok(())
    }

    /// Objective of the source model in flat channel-major order.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let m = self.users;
        self.channels
            .iter()
            .enumerate()
            .map(|(i, ch)| channel_function(ch, m).value(&DVector::from_column_slice(&x[i * m..(i + 1) * m])))
            .sum()
    }
}

/// Seeded synthetic DSL data: diagonal gains U(0.5, 1.5) with crosstalk
/// U(0, 0.1), noise and prices U(0.1, 1), weights U(1, 2), unit cap, budgets
/// between 30% and 60% of the all-channels maximum.
pub fn generate_dsl(users: usize, channels: usize, seed: u64) -> Result<DslData> {
    if users == 0 || channels == 0 {
        return Err(IpldError::InvalidArgument("DSL generator needs users and channels".into()));
    }
    let mut rng = stream(seed, STREAM_DSL);
    let cap = 1.0;
    let m = users;
    let channels = (0..channels)
        .map(|_| {
            let a = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let c = (0..m).map(|_| rng.random_range(1.0..2.0)).collect();
            let g = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let h = (0..m * m)
                .map(|k| if k / m == k % m { rng.random_range(0.5..1.5) } else { rng.random_range(0.0..0.1) })
                .collect();
            DslChannel { a, c, g, h }
        })
        .collect::<Vec<_>>();
    let total = channels.len() as f64 * cap;
    let b = (0..m).map(|_| rng.random_range(0.3..0.6) * total).collect();
    let data = DslData { users, channels, b, cap };
    data.validate()?;
    Ok(data)
}

/// `g(x) = aᵀx − cᵀ ln(Hx + g)`.
#[derive(Debug, Clone)]
pub struct LogChannel {
    pub a: DVector<f64>,
    pub c: DVector<f64>,
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
}

impl LogChannel {
    fn arg(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h * x + &self.g
    }
}

fn channel_function(ch: &DslChannel, m: usize) -> LogChannel {
    LogChannel {
        a: DVector::from_column_slice(&ch.a),
        c: DVector::from_column_slice(&ch.c),
        g: DVector::from_column_slice(&ch.g),
        h: DMatrix::from_row_slice(m, m, &ch.h),
    }
}

impl BlockSmooth for LogChannel {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        self.arg(x).iter().zip(self.c.iter()).all(|(&s, &c)| s > 0.0 || c == 0.0)
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        if !self.in_domain(x) {
            return f64::INFINITY;
        }
        let s = self.arg(x);
        let logs: f64 = s.iter().zip(self.c.iter()).filter(|(_, &c)| c != 0.0).map(|(&s, &c)| c * s.ln()).sum();
        self.a.dot(x) - logs
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let s = self.arg(x);
        let w = self.c.zip_map(&s, |c, s| if c == 0.0 { 0.0 } else { c / s });
        &self.a - self.h.tr_mul(&w)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.arg(x);
        let w = self.c.zip_map(&s, |c, s| if c == 0.0 { 0.0 } else { c / (s * s) });
        let scaled = DMatrix::from_fn(self.h.nrows(), self.h.ncols(), |r, k| w[r] * self.h[(r, k)]);
        let hh = self.h.tr_mul(&scaled);
        (&hh + hh.transpose()) * 0.5
    }
}

/// One block per channel on `[0, cap]^m`; the coupling sums the channel
/// powers of each user and the composite enforces the budget `Σ xᵢ ≤ b`.
pub fn build_dsl_instance(data: &DslData) -> Result<ProblemInstance> {
    data.validate()?;
    let m = data.users;
    let identity = DMatrix::<f64>::identity(m, m);
    let blocks = data
        .channels
        .iter()
        .map(|ch| {
            Block::new(
                Box::new(channel_function(ch, m)),
                CoordinateBarrier::uniform_box(m, 0.0, data.cap)?,
                BlockCoupling::from_dense(&identity),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ProblemInstance::new(m, blocks, CompositeTerm::upper_bounded(data.b.clone()))
}
