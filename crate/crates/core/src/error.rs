use thiserror::Error;

/// Failure raised while evaluating an expression or jet.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("non-finite value produced at x = {x}")]
    NonFinite { x: f64 },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("jet order {requested} exceeds the configured bound {bound}")]
    OrderTooHigh { requested: usize, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {position}: expected one of {expected:?}")]
    Syntax {
        position: usize,
        expected: Vec<String>,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate fit: every seminorm at order {k} is below the floor {floor:e} (identically negligible)")]
    DegenerateFit { k: usize, floor: f64 },
    #[error("inconsistent evidence: order-0 negligible and moderate, but order {k} is not negligible")]
    InconsistentEvidence { k: usize },
    #[error("moment {k} residual {residual:e} exceeds tolerance {tolerance:e}")]
    MomentFailure {
        k: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("Seeley system ill-conditioned: residual {residual:e} at moment {n} (L = {len})")]
    ConditioningFailure { len: usize, n: usize, residual: f64 },
    #[error("evaluation outside the valid window: {0}")]
    OutOfDomain(String),
    #[error("no convergent subsequence: {0}")]
    NoConvergentSubsequence(String),
    #[error("uniqueness violation: {0}")]
    UniquenessViolation(String),
    #[error("Faa di Bruno order {0} exceeds the supported maximum 8")]
    OrderTooHigh(usize),
    #[error("matrix is not hyperbolic: eigenvalue real part {0:e} within tolerance of the imaginary axis")]
    NonHyperbolic(f64),
    #[error("growth certificate missing or failed: {0}")]
    NotTempered(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
