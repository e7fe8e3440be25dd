use crate::embed::Embedding;
use crate::sampler::SampleResult;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two objects that must agree on a dimension (point count, atom count,
    /// exponent) do not.
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Weights do not form a probability measure and are too far off to
    /// renormalize silently.
    #[error("weights sum to {sum}, not 1 (renormalization tolerance is 1e-9)")]
    WeightsNotProbability { sum: f64 },

    /// A NaN or infinity where a finite number is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A parameter outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every value of every point is zero, so there is no measure to
    /// renormalize against. Callers that can embed the zero set specially
    /// (e.g. [`crate::embed::reduce`]) handle this before it surfaces.
    #[error("all point values are zero")]
    ZeroSet,

    /// An atom index outside the point set.
    #[error("atom index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    /// A linear map failed the norm-window audit: the image of the named
    /// test vector has a norm outside the admissible moduli window, so the
    /// dimension lower bound does not apply to it.
    #[error(
        "audited map is not admissible: {which} {index} has norm {norm}, \
         outside [{lower}, {upper}]"
    )]
    ModuliViolated {
        which: &'static str,
        index: usize,
        norm: f64,
        lower: f64,
        upper: f64,
    },

    /// Random sampling failed to meet the error target within the configured
    /// number of attempts. Carries the best draw seen; when raised by
    /// [`crate::embed::reduce`] it also carries the embedding assembled from
    /// that draw, so callers can keep the best-effort result.
    #[error(
        "random sampling missed the error target {target} after {attempts} attempts \
         (best achieved {best_error})"
    )]
    RetriesExhausted {
        target: f64,
        attempts: u32,
        best_error: f64,
        best: Box<SampleResult>,
        embedding: Option<Box<Embedding>>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
