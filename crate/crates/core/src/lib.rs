//! Inexact interior-point Lagrangian decomposition.
//!
//! Solves `min Σ gᵢ(xᵢ) + φ(Σ Aᵢxᵢ)` subject to `xᵢ ∈ Kᵢ` by smoothing the
//! Lagrange dual with self-concordant barriers and following the central path
//! with inexact proximal-Newton steps on the dual.

pub mod apps;
pub mod baseline;
pub mod error;
pub mod io;
pub mod linalg;
pub mod master;
pub mod model;
pub mod oracle;
pub mod path;
pub mod scalar;
pub mod slave;

pub use error::{IpldError, Result};
pub use path::{solve, SolverConfig};
