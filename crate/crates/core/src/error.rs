use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    InvalidModel(String),
    InvalidCell(String),
    VariableOutOfRange(usize),
    /// Applying a move would make some cell negative.
    NegativeCell,
    IdenticalTables,
    MarginalMismatch,
    NotDegreeTwo,
    Inconsistent(String),
    NotChordal,
    NotDecomposable,
    TooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    NotABasis,
    DegreeMismatch,
    EmptyBasis,
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn too_large(what: &'static str, size: u128, cap: u128) -> Self {
        Error::TooLarge { what, size, cap }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::InvalidCell(msg) => write!(f, "invalid cell: {msg}"),
            Error::VariableOutOfRange(v) => write!(f, "variable index {v} out of range"),
            Error::NegativeCell => f.write_str("move not applicable: a cell would become negative"),
            Error::IdenticalTables => f.write_str("tables are identical"),
            Error::MarginalMismatch => f.write_str("tables do not share their marginals"),
            Error::NotDegreeTwo => f.write_str("marginal vector does not have degree two"),
            Error::Inconsistent(msg) => write!(f, "inconsistent marginals: {msg}"),
            Error::NotChordal => f.write_str("independence graph is not chordal"),
            Error::NotDecomposable => f.write_str("model is not decomposable"),
            Error::TooLarge { what, size, cap } => {
                write!(f, "{what} too large: {size} exceeds cap {cap}")
            }
            Error::NotABasis => f.write_str("vectors are not a GF(2) basis"),
            Error::DegreeMismatch => f.write_str("tables have different sample sizes"),
            Error::EmptyBasis => f.write_str("basis is empty"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
