//! Problem data: separable blocks, barriers, coupling and the composite term.

mod barrier;
mod composite;
mod coupling;
mod instance;
mod smooth;
mod validate;

pub use barrier::CoordinateBarrier;
pub use composite::{CompositeKind, CompositeTerm};
pub use coupling::BlockCoupling;
pub use instance::{
    evaluate_psi, factor_blocks, primal_dual_norm, primal_local_norm, Block, DualPoint, PrimalPoint, ProblemInstance,
    PsiEval,
};
pub use smooth::{BlockSmooth, DiagonalQuadratic};
pub use validate::{validate_instance, Check, ValidationReport};
