//! Conversion change-point detection for spectro-temporal time series.
//!
//! The crate fits, per pixel, a segmentation of `J` years into background /
//! change / background states under a library of Gaussian land-cover classes
//! with Kronecker-structured (spectral x temporal) covariances, handling
//! missing observations by expectation rather than by external gap-filling.
//!
//! Module map:
//! - [`gaussian`] — missing-data Gaussian machinery: conditional moments,
//!   observed-data log-likelihoods, expected quadratic costs, Kronecker
//!   densification and PCA compression.
//! - [`model`] — class library, hyperparameters, change-configuration
//!   enumeration and prior, effective covariances, complete-data training.
//! - [`em`] — the block coordinate EM fit: class posteriors, mixture update,
//!   per-pixel segmentation scan, objective trace, imputation.
//! - [`simulate`] — synthetic batches with injected changes and controlled
//!   missing-data fractions.
//! - [`metrics`] — producer's/user's/overall accuracy, concordance against
//!   fractional references, batch summaries and a threshold baseline.
//!
//! All numeric code is generic over [`num::Scalar`] (`f32` or `f64`);
//! concrete `f64` aliases are exported at the crate root.

pub mod em;
pub mod gaussian;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod num;
pub mod simulate;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("numerical degeneracy in {context}: {source}")]
    Degenerate {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown class id {0}")]
    UnknownClass(u32),

    #[error("class posteriors vanished for pixel {pixel}: class library does not explain the data")]
    PosteriorUnderflow { pixel: String },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("empty region: no pixels to fit")]
    EmptyRegion,

    #[error("class {class} has {got} usable samples, need at least {need}")]
    InsufficientSamples { class: String, need: usize, got: usize },

    #[error("estimator did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("exemplar pool exhausted for {segment} years")]
    ExhaustedPool { segment: String },

    #[error("pixel id mismatch: {0}")]
    IdMismatch(String),
}

impl Error {
    /// Wrap a numerical failure with pixel/year context.
    pub fn with_context(self, context: impl Into<String>) -> Error {
        Error::Degenerate {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub use em::{fit_region, EmOptions, EmState, FitResult, PixelCache, PixelFit};
pub use gaussian::{
    conditional_moments, densify_kronecker, expected_gaussian_cost, observed_loglik, pca_compress,
    ConditionalMoments, CovModel, GaussianSpec, PcaProjection, PcaScaling, PixelSeries,
    SpectroTemporalSample,
};
pub use model::{
    config_log_prior, effective_cov, enumerate_configs, estimate_class_params, Background,
    BackgroundCov, ChangeConfig, ClassDef, ClassLibrary, Hyperparams, SpecTarget, TrainingClass,
};
pub use num::Scalar;

/// Concrete `f64` aliases for the main public types.
pub type Sample64 = gaussian::SpectroTemporalSample<f64>;
pub type Pixel64 = gaussian::PixelSeries<f64>;
pub type Spec64 = gaussian::GaussianSpec<f64>;
pub type Library64 = model::ClassLibrary<f64>;
pub type Hyperparams64 = model::Hyperparams<f64>;
pub type FitResult64 = em::FitResult<f64>;
pub type Mat64 = linalg::Mat<f64>;
