use thiserror::Error;

/// Errors reported by the cubature library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {got} outside the supported range 1..={max}")]
    DimensionRange { got: usize, max: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("integer overflow while expanding polynomial coefficients for dimension {0}")]
    CoefficientOverflow(usize),

    #[error("root isolation found {found} roots, expected {expected}")]
    RootIsolation { found: usize, expected: usize },

    #[error("root refinement left residual {residual:.3e} above the bound {bound:.3e}")]
    RootResidual { residual: f64, bound: f64 },

    #[error("matrix is numerically singular (|det| = {det_abs:.3e})")]
    SingularMatrix { det_abs: f64 },

    #[error("scale n and dilation entries must be positive")]
    NonPositiveScale,

    #[error("support box is empty or has non-finite bounds")]
    EmptyBox,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("candidate box holds {candidates} integer points, more than the cap {cap}")]
    CandidateCap { candidates: u128, cap: u128 },

    #[error("function '{0}' does not vanish on the cube boundary; it needs the transformed rule")]
    BoundaryFunction(String),

    #[error("decay exponent rho = {rho} is too small for a summable tail bound (need > {min})")]
    NonSummableDecay { rho: f64, min: f64 },

    #[error("function '{0}' has no attached Fourier transform")]
    MissingFourierTransform(String),

    #[error("unknown test function '{0}'")]
    UnknownFunction(String),

    #[error("slope fit needs at least 4 rows with positive error, got {0}")]
    SlopeFit(usize),

    #[error("invalid matrix cache: {0}")]
    BadCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
