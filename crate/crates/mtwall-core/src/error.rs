use alloc::string::String;
use core::fmt;

/// Failure modes shared by every module of the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Input data that does not describe a valid graph, path or map.
    Structural(String),
    /// An index (stratum, edge, vertex) outside the valid range.
    IndexOutOfRange {
        /// What kind of object was indexed.
        what: &'static str,
        /// The offending index.
        index: usize,
        /// Number of valid entries.
        len: usize,
    },
    /// A nonzero transition matrix that is not irreducible.
    FiltrationNotMaximal(String),
    /// The operation needs the inverse automorphism, which was not supplied.
    InverseRequired(&'static str),
    /// A point whose orbit or preimage meets a vertex.
    Singular(String),
    /// Busts that violate the hypotheses of the wall construction.
    Bust(String),
    /// A computation left the finite ball it was confined to.
    Truncated(String),
    /// A configured size cap was exceeded.
    ResourceCap {
        /// Which cap was hit.
        what: &'static str,
        /// The configured limit.
        limit: usize,
    },
    /// Two walls or a path and a wall meet without crossing transversally.
    Degenerate(String),
    /// Exact rational arithmetic overflowed its 128-bit representation.
    Overflow,
}

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(m) => write!(f, "structural error: {m}"),
            Error::IndexOutOfRange { what, index, len } => {
                write!(f, "{what} index {index} out of range (have {len})")
            }
            Error::FiltrationNotMaximal(m) => write!(f, "filtration not maximal: {m}; use compute_maximal_filtration"),
            Error::InverseRequired(op) => {
                write!(f, "{op} requires the inverse map (inverse_map) to be loaded")
            }
            Error::Singular(m) => write!(f, "singular point: {m}"),
            Error::Bust(m) => write!(f, "invalid busts: {m}"),
            Error::Truncated(m) => write!(f, "computation left the ball: {m}"),
            Error::ResourceCap { what, limit } => write!(f, "{what} exceeded cap of {limit}"),
            Error::Degenerate(m) => write!(f, "degenerate contact: {m}"),
            Error::Overflow => write!(f, "rational arithmetic overflow"),
        }
    }
}

impl core::error::Error for Error {}
