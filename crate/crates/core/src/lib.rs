//! Numerical toolkit for Malliavin calculus along a self-adjoint operator `R`
//! on a finite-dimensional Hilbert space: `R`-gradients and their
//! Cameron–Martin counterparts, Malliavin derivatives in two pictures, Wiener
//! chaos, Lasry–Lions approximants and K-functional estimates.
//!
//! Start from the runnable programs in `examples/`.

pub mod config;
pub mod error;
pub mod functions;
pub mod gradients;
pub mod hilbert;
pub mod interpolation;
pub mod lasry_lions;
pub mod malliavin;
pub mod report;
pub mod sampling;
pub mod suites;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use functions::{BaseFunction, CylinderFunction, FunctionSpec};
pub use hilbert::{CameronMartinStructure, GaussianSpace, SelfAdjointOp};
pub use report::ExperimentReport;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "MALLIAVIN_KIT_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when set. Returns the
/// number of threads in use. Calling it twice is harmless.
pub fn configure_threads() -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // fails only when the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}
