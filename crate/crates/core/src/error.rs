use alloc::string::String;
use core::fmt;

/// Errors raised by the geometric and combinatorial routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A vector had the wrong length for the space it was used in.
    DimensionMismatch { expected: usize, found: usize },
    /// Two objects that must share a shape (points, terms) did not.
    ShapeMismatch(String),
    /// A constraint system had no feasible point where one was required.
    Infeasible,
    /// A configured enumeration or term-count cap was exceeded.
    CapExceeded { cap: usize, what: &'static str },
    /// An operation precondition was violated by the caller.
    Precondition(String),
    /// A textual rational or sign could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::Infeasible => f.write_str("constraint system is infeasible"),
            Error::CapExceeded { cap, what } => write!(f, "{what} cap of {cap} exceeded"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
