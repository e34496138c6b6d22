use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Sphere dimension `n` must be at least 1.
    InvalidDimension(usize),
    /// Quadrature grids exist only for `n ∈ {1, 2}`.
    UnsupportedGridDimension(usize),
    /// Grid degree must be positive.
    InvalidDegree,
    /// Two objects live in different ambient dimensions.
    DimensionMismatch {
        /// Dimension that was required.
        expected: usize,
        /// Dimension that was supplied.
        found: usize,
    },
    /// A grid function was used with a grid it was not sampled on.
    GridMismatch,
    /// Argument outside the domain of a special function.
    Domain(&'static str),
    /// Harmonic index `(l, m)` outside the valid range.
    IndexOutOfRange {
        /// Degree.
        l: usize,
        /// Order.
        m: i64,
    },
    /// A model parameter violates its admissible range.
    Parameter(&'static str),
    /// The input is (numerically) a pole of a map.
    Pole(&'static str),
    /// A vector that must be normalized has zero length.
    ZeroVector,
    /// The grid does not integrate the requested band limit exactly.
    GridTooCoarse {
        /// Grid degree.
        degree: usize,
        /// Requested band limit.
        band_limit: usize,
    },
    /// Coefficient sets have different shapes.
    ShapeMismatch,
    /// Cap exclusion radius below twice the minimal node spacing.
    EpsilonTooSmall {
        /// Supplied radius.
        eps: f64,
        /// Smallest admissible radius.
        min: f64,
    },
    /// The function vanishes identically.
    ZeroFunction,
    /// A nonpositive value was met where a positive one is required.
    NonPositive,
    /// A density does not integrate to one.
    NotNormalized(f64),
    /// `|ζ|` exceeds the conditioning guard at the working band limit.
    ConditioningGuard(f64),
    /// An iterative method failed to converge.
    Divergence(&'static str),
    /// A sign change search found no crossing.
    NoSignChange,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidDimension(n) => write!(f, "invalid sphere dimension n = {n}"),
            Self::UnsupportedGridDimension(n) => {
                write!(f, "quadrature grids are only available for n = 1, 2 (got {n})")
            }
            Self::InvalidDegree => write!(f, "grid degree must be positive"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::GridMismatch => write!(f, "grid function does not live on this grid"),
            Self::Domain(what) => write!(f, "argument outside domain: {what}"),
            Self::IndexOutOfRange { l, m } => write!(f, "harmonic index (l={l}, m={m}) out of range"),
            Self::Parameter(what) => write!(f, "parameter out of range: {what}"),
            Self::Pole(what) => write!(f, "input at a pole: {what}"),
            Self::ZeroVector => write!(f, "cannot normalize a zero vector"),
            Self::GridTooCoarse { degree, band_limit } => write!(
                f,
                "grid of degree {degree} is too coarse for band limit {band_limit}"
            ),
            Self::ShapeMismatch => write!(f, "coefficient shapes differ"),
            Self::EpsilonTooSmall { eps, min } => {
                write!(f, "exclusion radius {eps:e} below minimum {min:e}")
            }
            Self::ZeroFunction => write!(f, "function vanishes identically"),
            Self::NonPositive => write!(f, "function is not strictly positive"),
            Self::NotNormalized(total) => write!(f, "density integrates to {total}, not 1"),
            Self::ConditioningGuard(z) => write!(
                f,
                "|zeta| = {z} exceeds the conditioning guard; raise the band limit"
            ),
            Self::Divergence(what) => write!(f, "no convergence: {what}"),
            Self::NoSignChange => write!(f, "no sign change found in the search interval"),
        }
    }
}

impl core::error::Error for Error {}
