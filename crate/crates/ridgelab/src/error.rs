//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested value is outside the mathematical domain of the
    /// operation (non-finite input, divergent integral, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampled wavelet would keep too much energy above the Nyquist
    /// frequency of the requested grid.
    #[error(
        "aliasing: wavelet (beta={beta}, gamma={gamma}) at scale {scale} keeps \
         a fraction {above:.3e} of its energy above the Nyquist frequency \
         (limit {limit:.1e})"
    )]
    Aliasing {
        beta: f64,
        gamma: f64,
        scale: f64,
        above: f64,
        limit: f64,
    },

    /// The signal carries no information to analyze (e.g. identically zero,
    /// so the phase is undefined).
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Malformed CSV input.
    #[error("csv: {0}")]
    Csv(String),

    /// Sample times in a two-column CSV are not uniformly spaced.
    #[error("non-uniform sampling: {0}")]
    NonUniformSampling(String),

    /// Malformed configuration.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
