use crate::field::FieldTag;
use crate::group::RootIdx;

/// Errors raised by the library layer.
///
/// Divergent integrals are not errors: they are reported through
/// [`QuadResult::converged`](crate::quadrature::QuadResult).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("field tag mismatch: {left:?} vs {right:?}")]
    TagMismatch { left: FieldTag, right: FieldTag },

    #[error("matrix is numerically singular (pivot {pivot:e}, scale {scale:e})")]
    Singular { pivot: f64, scale: f64 },

    #[error("nilpotent coordinates do not match the nilradical: missing {missing:?}, unexpected {unexpected:?}")]
    KeyMismatch {
        missing: Vec<RootIdx>,
        unexpected: Vec<RootIdx>,
    },

    #[error("invalid root index ({0}, {1})")]
    InvalidRoot(usize, usize),

    #[error("determinant is not defined over the quaternions")]
    NoDeterminant,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("partial sums decreased at shell {index} ({prev:e} -> {next:e}) for a nonnegative integrand")]
    NonMonotone { index: usize, prev: f64, next: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
