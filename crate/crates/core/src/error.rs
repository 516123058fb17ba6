use thiserror::Error;

use crate::oracle::GroupElementId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown group element {0}")]
    UnknownGroupElement(GroupElementId),

    /// The oracle was asked about a point it has not certified yet. Grow the
    /// window to at least `required` and retry.
    #[error("oracle window too small: need at least {required}")]
    WindowTooSmall { required: u64 },

    #[error("group element exceeds the encodable length")]
    ElementOverflow,

    #[error("word is not nice")]
    NotNice,

    #[error("partial injection is not nice")]
    NotNiceInjection,

    #[error("bit prefix too short: need {needed} bits, have {available}")]
    PrefixTooShort { needed: usize, available: usize },

    #[error("orbit length {k} must exceed the bound {bound}")]
    KTooSmall { k: usize, bound: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("tree refused to extend the node")]
    TreeRefusedExtension,

    #[error("stage extension failed: {0}")]
    StageExtensionFailed(String),

    /// A constructed extension failed its own postcondition check.
    #[error("extension postcondition failed: {0}")]
    InvalidExtension(String),

    #[error("injectivity violated by pair ({0}, {1})")]
    NotInjective(u64, u64),

    #[error("parse error: {0}")]
    Parse(String),

    /// A run failed while meeting the requirement at `step`.
    #[error("step {step}: {source}")]
    Step { step: usize, source: Box<Error> },
}

impl Error {
    pub fn window_required(&self) -> Option<u64> {
        match self {
            Error::WindowTooSmall { required } => Some(*required),
            Error::Step { source, .. } => source.window_required(),
            _ => None,
        }
    }
}
