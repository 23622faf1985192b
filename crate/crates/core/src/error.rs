use thiserror::Error;

/// Errors raised by the samplers, transforms, distances and bound evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported domain for {0}")]
    UnsupportedDomain(&'static str),

    #[error("flats are in degenerate position (intersecting or parallel)")]
    DegeneratePosition,

    #[error("directions are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("configurations live on different spaces: {0} vs {1}")]
    SpaceMismatch(String, String),

    #[error("marginals have unequal mass: {0} vs {1}")]
    InfeasibleMarginals(f64, f64),

    #[error("sample sizes differ: {0} vs {1}")]
    SampleSizeMismatch(usize, usize),

    #[error("test function value {value} outside the declared bound [0, {bound}]")]
    UnboundedTestFunction { value: f64, bound: f64 },

    #[error("law `{0}` has no closed-form distribution function")]
    NoCdf(&'static str),

    #[error("enumeration of {subsets} subsets of arity {arity} exceeds the guard rail")]
    EnumerationTooLarge { arity: usize, subsets: f64 },

    #[error("quadrature did not converge (estimated error {0:e})")]
    QuadratureNonConvergent(f64),

    #[error("parameter regime violated: {0}")]
    Regime(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
