use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not symmetric: relative asymmetry {asymmetry:.3e} exceeds {tolerance:.1e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("eigenvector frame is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("operator has a negative eigenvalue {value:.6e}")]
    NotNonNegative { value: f64 },

    #[error("operator is degenerate (kernel dimension {kernel_dim}); {hint}")]
    Degenerate { kernel_dim: usize, hint: &'static str },

    #[error("vector `{name}` is not in the range: relative kernel component {ratio:.3e} exceeds {tolerance:.1e}")]
    NotInRange {
        name: String,
        ratio: f64,
        tolerance: f64,
    },

    #[error("function `{name}` has smoothness order {have}, operation needs {need}")]
    Smoothness {
        name: String,
        have: usize,
        need: usize,
    },

    #[error("directions are not orthonormal in the indexing space (Gram residual {residual:.3e})")]
    DirectionsNotOrthonormal { residual: f64 },

    #[error("form is supported on the kernel (relative kernel mass {ratio:.3e})")]
    KernelSupport { ratio: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
