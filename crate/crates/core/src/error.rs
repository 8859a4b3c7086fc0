use alloc::string::String;
use core::fmt;

use crate::lp::LpError;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Side length odd or zero, or dimension other than 1 or 2.
    InvalidGeometry { h: usize, n: usize },
    /// Two operands live on different grids.
    GeometryMismatch,
    /// A parameter is outside its documented range.
    InvalidParameter(String),
    /// A spectrum or measurement set violates `a(-k) = conj(a(k))`.
    NotHermitian { deviation: f64 },
    /// Operation only defined for the given dimension.
    WrongDimension { expected: usize, found: usize },
    /// A value that must be binary is not 0 or 1.
    NotBinary { index: usize, value: f64 },
    /// The linear program engine failed, as opposed to the instance being infeasible.
    Lp(LpError),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry { h, n } => {
                write!(f, "invalid geometry: h={h}, N={n} (need h in {{1,2}} and N even, positive)")
            }
            Error::GeometryMismatch => write!(f, "operands have different geometries"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NotHermitian { deviation } => {
                write!(f, "spectrum is not Hermitian (relative deviation {deviation:.3e})")
            }
            Error::WrongDimension { expected, found } => {
                write!(f, "expected a {expected}D signal, got {found}D")
            }
            Error::NotBinary { index, value } => {
                write!(f, "value {value} at linear index {index} is not binary")
            }
            Error::Lp(e) => write!(f, "linear program failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

impl From<LpError> for Error {
    fn from(e: LpError) -> Self {
        Error::Lp(e)
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
