//! First-order baseline used to cross-check IPLD solutions.

pub mod cp;

pub use cp::{
    build_cp_num, CP_DEFAULT_MAX_ITER, CP_DEFAULT_TAU, CP_STEP_PRODUCT, cp_solve, cp_tune, default_tau_grid, CpNum, CpProblem, CpResult, CpTerm};
