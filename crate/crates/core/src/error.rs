use thiserror::Error;

/// Errors surfaced by field, curve, surface, and ladder operations.
///
/// Mismatched field contexts (elements from different primes fed to one
/// operation) are a programming error and panic instead of returning a
/// variant here.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("element has no square root in this field")]
    NonSquare,

    #[error("point does not satisfy the curve equations")]
    NotOnCurve,

    #[error("{0}")]
    InvalidPoint(&'static str),

    #[error("group law requires a complete curve (d must be a non-square)")]
    IncompleteCurve,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate output of {0}")]
    DegenerateOutput(&'static str),

    #[error("degenerate input to {0}")]
    DegenerateInput(&'static str),

    /// Every representative of the named map vanished at the input point.
    #[error("all representatives of {map} vanish at this point")]
    ExceptionalPoint { map: &'static str },

    #[error("inconsistent point data: {0}")]
    Inconsistent(&'static str),

    #[error("the ladder requires a scalar n >= 1")]
    ZeroScalar,

    /// An error raised while processing one ladder bit, tagged with the
    /// zero-based index of the failing step.
    #[error("ladder step {step}: {source}")]
    LadderStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown section name: {0}")]
    UnknownSection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
