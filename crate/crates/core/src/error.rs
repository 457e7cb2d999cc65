use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter or descriptor that could not be accepted as given.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A parse failure in a registry name, descriptor or element literal.
    #[error("cannot parse {what} `{input}`: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    /// The requested computation is well-formed but has no solution with the
    /// given data (uncoverable ball, finite-index subgroup where a c.i.i. is
    /// required, BFS closing early, ...).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A configured size cap was hit.
    #[error("budget exceeded: {what} reached {reached} (limit {limit}) at depth {depth}")]
    Budget {
        what: &'static str,
        reached: usize,
        limit: usize,
        depth: usize,
    },

    /// The operation is not implemented for this (family, oracle) pairing.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A computed lower bound exceeded a computed upper bound.
    #[error("bound violation at r={r}: lower {lower} > upper {upper}")]
    BoundViolation {
        r: u64,
        lower: String,
        upper: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
