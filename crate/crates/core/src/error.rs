use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the metric and planning routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("fewer than two non-empty clusters")]
    SingleCluster,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero variance in rank vector")]
    ZeroVariance,
    #[error("map too small: {height}x{width}, need at least {min} per axis")]
    TooSmall { height: usize, width: usize, min: usize },
    #[error("shift radius {radius} too large for {height}x{width} map")]
    ShiftTooLarge { radius: usize, height: usize, width: usize },
    #[error("band radii must satisfy 0 < r_in < r_out (got {r_in}, {r_out})")]
    BadRadii { r_in: u32, r_out: u32 },
    #[error("grid of {grid} patches per axis is finer than the {height}x{width} map")]
    GridTooFine { grid: usize, height: usize, width: usize },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch { expected: (usize, usize), actual: (usize, usize) },
    #[error("fewer than two valid segments")]
    NoValidSegments,
    #[error("need at least two profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("master and auxiliary are the same encoder: {0}")]
    SameEncoder(alloc::string::String),
    #[error("unknown encoder: {0}")]
    UnknownEncoder(alloc::string::String),
    #[error("missing stride {0}")]
    MissingStride(u32),
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("invalid tensor: {0}")]
    InvalidTensor(&'static str),
    #[error("bad synthetic spec: {0}")]
    BadSpec(&'static str),
    #[error("input too large for the brute-force oracle: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("stride {stride}: {source}")]
    AtStride {
        stride: u32,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub fn at_stride(self, stride: u32) -> Self {
        match self {
            e @ Error::AtStride { .. } => e,
            e => Error::AtStride { stride, source: alloc::boxed::Box::new(e) },
        }
    }

    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::SingleCluster => "SingleCluster",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ZeroVariance => "ZeroVariance",
            Error::TooSmall { .. } => "TooSmall",
            Error::ShiftTooLarge { .. } => "ShiftTooLarge",
            Error::BadRadii { .. } => "BadRadii",
            Error::GridTooFine { .. } => "GridTooFine",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NoValidSegments => "NoValidSegments",
            Error::TooFewProfiles(_) => "TooFewProfiles",
            Error::SameEncoder(_) => "SameEncoder",
            Error::UnknownEncoder(_) => "UnknownEncoder",
            Error::MissingStride(_) => "MissingStride",
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidTensor(_) => "InvalidTensor",
            Error::BadSpec(_) => "BadSpec",
            Error::TooLarge { .. } => "TooLarge",
            Error::AtStride { source, .. } => source.kind(),
        }
    }

    /// The stride a failure was attributed to, if any.
    pub fn stride(&self) -> Option<u32> {
        match self {
            Error::AtStride { stride, .. } => Some(*stride),
            Error::MissingStride(s) => Some(*s),
            _ => None,
        }
    }
}
