use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("quadrature did not converge in {op}: estimate {value:e}, error estimate {abs_error:e}")]
    Quadrature { op: &'static str, value: f64, abs_error: f64 },

    #[error("density table range [{lo}, {hi}] misses {missing:e} of the mass")]
    Coverage { lo: f64, hi: f64, missing: f64 },

    #[error("numerical failure in {op}: {msg}")]
    Numerical { op: &'static str, msg: String },

    #[error("unsupported functional: {0}")]
    UnsupportedFunctional(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { op, msg: msg.into() }
}
