use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("variable {var} occurs negated under its binder")]
    Positivity { var: String },

    #[error("{fml} is not positive in {var}")]
    NotPositive { fml: String, var: String },

    #[error("substitution for {var} would be captured by binder {binder}")]
    FreeFor { var: String, binder: String },

    #[error("formula is not tidy: {0} occurs both free and bound")]
    NotTidy(String),

    #[error("formula is not clean: {0}")]
    NotClean(String),

    #[error("expected a fixpoint formula, got {0}")]
    NotFixpoint(String),

    #[error("{0} is not a subformula of the ambient formula")]
    NotSubformula(String),

    #[error("invalid parity formula: {0}")]
    InvalidParity(String),

    #[error("parity formula is not untwisted: condition {condition} fails: {detail}")]
    NotUntwisted { condition: u8, detail: String },

    #[error("parity formula carries no edge tagging")]
    MissingTagging,

    #[error("reserved variable name {0} is not allowed here")]
    ReservedVariable(String),

    #[error("guard step precondition failed: {0}")]
    GuardPrecondition(String),

    #[error("bad input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
