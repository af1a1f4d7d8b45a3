use thiserror::Error;

/// Errors surfaced by the symbolic engine.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("multi-index has {got} entries but the spec dimension is {dim}")]
    DimensionMismatch { dim: usize, got: usize },

    #[error("invalid rational literal {0}")]
    BadRational(String),

    #[error("basis escape in {context}: {items:?}")]
    BasisEscape { context: String, items: Vec<String> },

    #[error("character support is invalid: {0}")]
    BadCharacter(String),

    #[error("basis generation did not stabilize after {0} rounds (spec is likely supercritical)")]
    NonTermination(usize),

    #[error("Neumann series did not terminate within {0} steps; basis closure is broken")]
    NeumannDiverged(usize),

    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),

    #[error("invalid spec: {0}")]
    BadSpec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
