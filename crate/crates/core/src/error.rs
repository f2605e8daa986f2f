use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("base offset {0} is outside [0, 1)")]
    OffsetOutOfRange(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cube {0} does not belong to the grid")]
    NotInGrid(String),
    #[error("supercubes {left} and {right} overlap properly; they cannot come from one supergrid")]
    ProperOverlap { left: String, right: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("measure has no items")]
    Empty,
    #[error("total mass must be finite and positive")]
    NonPositiveMass,
    #[error("atom {index} has invalid mass {mass}")]
    InvalidMass { index: usize, mass: f64 },
    #[error("cell {index} has invalid density {density}")]
    InvalidDensity { index: usize, density: f64 },
    #[error("atoms {0} and {1} coincide")]
    DuplicateAtom(usize, usize),
    #[error("cells {0} and {1} overlap")]
    OverlappingCells(usize, usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveletError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("scale window is not well ordered: fine {fine} > coarse {coarse}")]
    BadWindow { fine: i64, coarse: i64 },
    #[error("coarse scale {scale} does not enclose the support: top {top} meets {cubes} cubes of that scale")]
    CoarseScaleTooSmall { scale: i64, top: String, cubes: usize },
    #[error("fine scale {scale} does not resolve the function: residual {residual:e} on cube {cube}")]
    FineScaleTooCoarse { scale: i64, cube: String, residual: f64 },
    #[error("scale {scale} is outside the supported range [-62, 62]")]
    ScaleOutOfRange { scale: i64 },
    #[error("no scale up to 62 encloses the support")]
    NoEnclosingScale,
    #[error("cube {q} is not strictly contained in {p}")]
    NotNested { q: String, p: String },
    #[error("function vanishes mu-almost everywhere on {0}")]
    VanishingOnCube(String),
    #[error("cube {0} has zero mass")]
    ZeroMass(String),
    #[error("moment system dimension {system} does not match function dimension {function}")]
    SystemMismatch { system: usize, function: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BilinearError {
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error("split scale {scale} is smaller than the support extent {extent} of {which}")]
    SplitTooSmall { scale: i64, extent: f64, which: &'static str },
    #[error("fine cutoff {fine} exceeds split scale {split}")]
    BadWindow { fine: i64, split: i64 },
    #[error("kernel is defined for dimension {expected}, measures have dimension {found}")]
    KernelDimension { expected: usize, found: usize },
    #[error("tops form uses {count} top summands, more than 2^{n}")]
    TooManyTops { count: usize, n: usize },
}
