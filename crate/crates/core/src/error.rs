use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the quadrature, oracle and solver modules.
#[derive(Debug, Error)]
pub enum HfpError {
    #[error("order too large: requested k = {requested}, configured maximum is {max}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("unsupported zeta argument {0}")]
    UnsupportedZetaArgument(i64),

    #[error("derivatives required for s=0 rule: need g^(k)(t) for k <= {needed}, have {available}")]
    MissingDerivatives { needed: usize, available: usize },

    #[error("no compact rule for (m, s) = ({m}, {s})")]
    UnsupportedCompactRule { m: u32, s: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluator returned a non-finite value at node {index} (x = {x})")]
    EvaluationFailed { index: usize, x: f64 },

    #[error("reference did not converge: last change {change:.3e} exceeds tolerance {tol:.3e}")]
    ReferenceNotConverged { change: f64, tol: f64 },

    #[error("odd n unsupported: n = {0} (the cardinal kernel is defined for even n)")]
    OddDirichletOrder(usize),

    #[error("advanced approach requires U_k(t,t), k<=3")]
    MissingDiagonalDerivatives,

    #[error("collocation matrix is singular to working precision (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("insufficient pre-floor data: {usable} usable rows, need at least {needed}")]
    InsufficientPreFloorData { usable: usize, needed: usize },

    #[error("manufactured right-hand side did not converge at t = {t}: change {change:.3e} at n = {n}")]
    RhsNotConverged { t: f64, n: usize, change: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HfpError>;
