use thiserror::Error;

pub type Result<T> = std::result::Result<T, IpldError>;

#[derive(Debug, Error)]
pub enum IpldError {
    #[error("domain violation: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("ill-conditioned model: smallest eigenvalue {mu:e} below 1e-14 x largest {l:e}")]
    Conditioning { mu: f64, l: f64 },

    #[error("slave Newton did not converge in block {block} after {iters} iterations (residual {residual:e}, target {target:e})")]
    SlaveNonConvergence {
        block: usize,
        iters: usize,
        residual: f64,
        target: f64,
    },

    #[error("master prox loop did not converge after {iters} iterations (gap bound {gap_bound:e}, target {target:e})")]
    MasterNonConvergence {
        iters: usize,
        gap_bound: f64,
        target: f64,
    },

    #[error("phase 1 did not reach the neighborhood after {iters} iterations (lambda {lambda:e}, beta {beta})")]
    Phase1Failure { iters: usize, lambda: f64, beta: f64 },

    #[error("main loop exceeded {kmax} iterations")]
    IterationCap { kmax: usize },

    #[error("rank-deficient coupling matrix: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("unreachable pair ({0}, {1})")]
    Unreachable(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serde(String),
}

impl IpldError {
    /// True for failures that mean "ran out of iterations" rather than bad input.
    pub fn is_iteration_cap(&self) -> bool {
        matches!(
            self,
            IpldError::IterationCap { .. }
                | IpldError::Phase1Failure { .. }
                | IpldError::SlaveNonConvergence { .. }
                | IpldError::MasterNonConvergence { .. }
        )
    }
}
