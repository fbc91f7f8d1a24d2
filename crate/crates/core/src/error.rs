use thiserror::Error;

use crate::equilibrium::EquilibriumCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments or malformed input data.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A combinatorial or iteration budget was exhausted.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The equilibrium solver could not certify its output.
    #[error("equilibrium did not converge: {reason}")]
    NonConvergence {
        reason: String,
        certificate: Box<EquilibriumCertificate>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
