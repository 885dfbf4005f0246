use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("leading coefficient {a:e} is below the degeneracy threshold {tol:e}")]
    DegenerateLeadingCoefficient { a: f64, tol: f64 },

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("matrix shape {rows}x{cols} is invalid: {reason}")]
    Shape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },

    #[error("instance is infeasible: pairs {pairs:?} cannot be served on any admissible RB")]
    Infeasible { pairs: Vec<usize> },

    #[error("instance of {rows}x{cols} exceeds the exhaustive-search limit ({limit})")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("Dinkelbach iteration did not converge in {iterations} iterations (last |F|/W = {residual:e}, best EE = {best_ee:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best_ee: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}
