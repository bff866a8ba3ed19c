use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Block, ProblemInstance};
use crate::linalg::{psd_rank, sym_extreme_eigenvalues};

const RANK_LIMIT: usize = 500;
const RANK_TOL: f64 = 1e-10;
const FD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_instance`]; never an error, just a list of checks.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

/// Numerically checks the standing assumptions on an assembled instance:
/// full row rank of `A`, hand-coded gradients against central differences,
/// Hessian symmetry and semidefiniteness, and barrier blow-up.
pub fn validate_instance(instance: &ProblemInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = instance.n_rows();
    if n <= RANK_LIMIT {
        let a = instance.dense_a();
        let aat = &a * a.transpose();
        let rank = psd_rank(&aat, RANK_TOL);
        report.push("rank", rank == n, format!("rank {rank} of {n} rows"));
    } else {
        report.push("rank", true, format!("skipped for {n} rows"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (i, b) in instance.blocks().iter().enumerate() {
        let x = sample_interior(b, &mut rng);
        let (err, ok) = gradient_check(b, &x);
        report.push(format!("gradient[{i}]"), ok, format!("relative error {err:.3e}"));

        let h = b.smooth.hessian(&x);
        let asym = (&h - h.transpose()).amax();
        let scale = h.amax().max(1.0);
        let min_ev = if h.nrows() > 0 { sym_extreme_eigenvalues(&h).0 } else { 0.0 };
        report.push(
            format!("hessian[{i}]"),
            asym <= 1e-12 * scale && min_ev >= -1e-10 * scale,
            format!("asymmetry {asym:.3e}, min eigenvalue {min_ev:.3e}"),
        );

        let dec = b.barrier.decrement_sq(&x);
        report.push(
            format!("barrier_decrement[{i}]"),
            dec <= b.barrier.nu() * (1.0 + 1e-12),
            format!("{dec:.6} vs nu {}", b.barrier.nu()),
        );

        let (blew_up, last) = blows_up(b);
        report.push(format!("barrier_blowup[{i}]"), blew_up, format!("value {last:.3e} near boundary"));
    }
    report
}

fn sample_interior(b: &Block, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let mid = b.barrier.midpoint();
    let (lo, hi) = (b.barrier.lower(), b.barrier.upper());
    for _ in 0..20 {
        let x = DVector::from_iterator(
            mid.len(),
            (0..mid.len()).map(|j| {
                if lo[j].is_finite() && hi[j].is_finite() {
                    lo[j] + (hi[j] - lo[j]) * rng.random_range(0.1..0.9)
                } else {
                    mid[j] + rng.random_range(-0.5..0.5)
                }
            }),
        );
        if b.is_interior(&x) {
            return x;
        }
    }
    mid
}

fn gradient_check(b: &Block, x: &DVector<f64>) -> (f64, bool) {
    let g = b.smooth.gradient(x);
    let mut fd = DVector::zeros(x.len());
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (b.smooth.value(&xp) - b.smooth.value(&xm)) / (2.0 * h);
    }
    let err = (&fd - &g).amax() / g.amax().max(1.0);
    (err, err <= FD_TOL)
}

// Walk from the midpoint toward the first finite bound of coordinate 0.
fn blows_up(b: &Block) -> (bool, f64) {
    let mid = b.barrier.midpoint();
    if mid.is_empty() {
        return (true, f64::INFINITY);
    }
    let (l, u) = (b.barrier.lower()[0], b.barrier.upper()[0]);
    let target = if u.is_finite() { u } else { l };
    let start = b.barrier.value(&mid);
    let mut x = mid.clone();
    let mut last = start;
    for k in 1..=40 {
        x[0] = target + (mid[0] - target) * 0.5f64.powi(k);
        last = b.barrier.value(&x);
    }
    (last > start + 20.0, last)
}
