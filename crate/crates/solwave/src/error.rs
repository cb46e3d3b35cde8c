//! Error type shared across the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // ---- parsing ----
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared symbol `{name}` at {line}:{col}")]
    UndeclaredSymbol { name: String, line: usize, col: usize },
    #[error("non-polynomial input: {0}")]
    NonPolynomialInput(String),

    // ---- expression operations ----
    #[error("cyclic binding through `{0}`")]
    CyclicBinding(String),
    #[error("unbound symbol `{0}` in numeric evaluation")]
    UnboundSymbol(String),
    #[error("non-finite result in numeric evaluation")]
    NonFiniteResult,
    #[error("cannot numerically evaluate an abstract derivative of `{0}`")]
    UnevaluatedDerivative(String),

    // ---- reduction ----
    #[error("term `{0}` is not an exact xi-derivative; the once-integrated route does not apply")]
    NotExactlyIntegrable(String),
    #[error("the ODE has not been integrated; no integration constant to specialize")]
    NotIntegrated,

    // ---- ansatz ----
    #[error("ansatz order undetermined: {0}")]
    AnsatzOrderUndetermined(String),
    #[error("mixed hyperbolic scales: {0}")]
    MixedScales(String),
    #[error("collected system is identically zero; every parameter choice is a solution")]
    EmptySystem,

    // ---- solving ----
    #[error("case-split depth limit {0} exceeded")]
    DepthLimitExceeded(usize),

    // ---- verification ----
    #[error("nonzero constraints cannot be satisfied with the required margin: {0}")]
    ConstraintUnsatisfiable(String),

    #[error("{0}")]
    Internal(String),
}
