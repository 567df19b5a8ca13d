use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unbound variable '{0}'")]
    UnboundVariable(String),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("Lee form is not closed: {0}")]
    NonClosedLeeForm(String),

    #[error("structure matrix is singular: {0}")]
    SingularStructure(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("generating function must not depend on momenta: {0}")]
    SDependsOnP(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("model schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
