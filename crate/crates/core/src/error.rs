use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid exponent {0}: must lie in [1, inf]")]
    InvalidExponent(f64),

    #[error("space dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sequence entries live in different spaces")]
    MixedSpaces,

    #[error("weak class at stack position {position} of {depth}; weak classes are only supported innermost")]
    UnsupportedClassPosition { position: usize, depth: usize },

    #[error("depth mismatch: stack has {expected} classes, array has depth {found}")]
    DepthMismatch { expected: usize, found: usize },

    #[error("block is empty")]
    NonvoidViolation,

    #[error("index tuple {tuple:?} out of bounds {bounds:?}")]
    OutOfBounds { tuple: Vec<usize>, bounds: Vec<usize> },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
