use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("{value} has no inverse modulo {modulus}")]
    NonInvertible { value: usize, modulus: usize },

    #[error("infeasible design: K*eta_m = {load} >= B = {b}")]
    Infeasible { load: f64, b: usize },

    #[error("no threshold pair meets P_d = {pd} and P_fa = {pfa} for any mu in [1, {t}]")]
    NoSolution { pd: f64, pfa: f64, t: usize },

    #[error("target {index} is ambiguous: {reason}")]
    Ambiguous { index: usize, reason: String },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
