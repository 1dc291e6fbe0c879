use thiserror::Error;

/// Errors raised anywhere in the flux/domain pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid of {n} samples is too coarse (need at least {min})")]
    GridTooCoarse { n: usize, min: usize },

    #[error("grid size {n} is not a power of two")]
    GridNotPowerOfTwo { n: usize },

    #[error("flux sample {index} is not strictly positive ({value})")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("flux integral is {integral}, expected 1 within {tolerance}")]
    NormalizationViolation { integral: f64, tolerance: f64 },

    #[error("perimeter must be finite and positive, got {0}")]
    InvalidPerimeter(f64),

    #[error("root finding for target {target} did not converge in {iterations} iterations")]
    ConvergenceFailure { target: f64, iterations: usize },

    #[error("|z| = {radius} is too close to the unit circle for interior evaluation")]
    EvaluationTooCloseToBoundary { radius: f64 },

    #[error("|z| = {radius} lies outside the closed unit disk")]
    OutsideClosedDisk { radius: f64 },

    #[error("boundary modulus sample {index} is not strictly positive ({value})")]
    NonPositiveModulus { index: usize, value: f64 },

    #[error("power series tail bound {tail} exceeds tolerance {tolerance}")]
    SeriesNotConverged { tail: f64, tolerance: f64 },

    #[error("tangent angle jumps by {jump} between samples {index} and {next}; refine the grid")]
    UnwrapAmbiguity { index: usize, next: usize, jump: f64 },

    #[error("anchors coincide: the pole and the boundary reference must differ")]
    CoincidentAnchors,

    #[error("sampled boundary self-intersects (segments {first} and {second})")]
    SelfIntersectingBoundary { first: usize, second: usize },

    #[error("|f'| = {modulus} at theta = {theta} is degenerate")]
    DegenerateDerivative { theta: f64, modulus: f64 },

    #[error("invalid map specification: {0}")]
    InvalidMapSpec(String),

    #[error("anchors are inconsistent with the flux profile (residual {residual}, tolerance {tolerance})")]
    InconsistentAnchors { residual: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::GridNotPowerOfTwo { .. } => "GridNotPowerOfTwo",
            Error::NonPositiveSample { .. } => "NonPositiveSample",
            Error::NormalizationViolation { .. } => "NormalizationViolation",
            Error::InvalidPerimeter(_) => "InvalidPerimeter",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::EvaluationTooCloseToBoundary { .. } => "EvaluationTooCloseToBoundary",
            Error::OutsideClosedDisk { .. } => "OutsideClosedDisk",
            Error::NonPositiveModulus { .. } => "NonPositiveModulus",
            Error::SeriesNotConverged { .. } => "SeriesNotConverged",
            Error::UnwrapAmbiguity { .. } => "UnwrapAmbiguity",
            Error::CoincidentAnchors => "CoincidentAnchors",
            Error::SelfIntersectingBoundary { .. } => "SelfIntersectingBoundary",
            Error::DegenerateDerivative { .. } => "DegenerateDerivative",
            Error::InvalidMapSpec(_) => "InvalidMapSpec",
            Error::InconsistentAnchors { .. } => "InconsistentAnchors",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::MalformedInput(_) => "MalformedInput",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks the grid-size contract shared by every spectral operation.
pub(crate) fn check_grid(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::GridTooCoarse { n, min });
    }
    if !n.is_power_of_two() {
        return Err(Error::GridNotPowerOfTwo { n });
    }
    Ok(())
}
