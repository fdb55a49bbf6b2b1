use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("resource guard: {what} needs {requested}, limit is {limit}")]
    Resource {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("unsupported geometry: {0}")]
    Geometry(String),

    #[error("degenerate levels at the Fermi level ({0})")]
    Degenerate(String),

    #[error("non-finite objective at x = {x:?}")]
    NonFinite { x: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub(crate) fn check_modes(n_modes: usize) -> Result<()> {
    if n_modes > crate::MAX_MODES {
        return Err(Error::Resource {
            what: "modes",
            requested: n_modes,
            limit: crate::MAX_MODES,
        });
    }
    Ok(())
}
