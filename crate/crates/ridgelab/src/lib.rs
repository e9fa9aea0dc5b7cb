//! Analytic wavelet transform analysis of modulated oscillatory signals.
//!
//! `ridgelab` implements the chain from a real-valued time series to
//! ridge-based estimates of its instantaneous amplitude, phase, frequency,
//! and bandwidth, together with perturbation-based bias diagnostics:
//!
//! - [`bell`]: complete Bell polynomials, the combinatorial engine shared by
//!   the wavelet-derivative and modulation-function computations;
//! - [`morse`]: generalized Morse wavelets with closed-form frequency-domain
//!   properties and sampled time-domain realizations;
//! - [`analytic`]: the analytic signal, its instantaneous moments, the
//!   instantaneous modulation functions, and the local stability level;
//! - [`awt`]: the analytic wavelet transform on a log-spaced scale grid and
//!   its time/scale derivatives via modified wavelets;
//! - [`ridge`]: amplitude/phase ridge detection, chaining, and along-ridge
//!   signal estimation;
//! - [`diagnostics`]: wavelet suitability checks, predicted estimator
//!   biases, predicted ridge curves, and the iterated-fidelity procedure;
//! - [`synth`]: deterministic test-signal generators with analytic ground
//!   truth;
//! - [`io`] and [`pipeline`]: CSV/JSON interchange and the end-to-end
//!   analysis used by the `ridgelab` binary.

pub mod analytic;
pub mod awt;
pub mod bell;
pub mod diagnostics;
pub mod diff;
pub mod error;
pub mod io;
pub mod morse;
pub mod pipeline;
pub mod ridge;
pub mod synth;

pub use error::{Error, Result};
pub use morse::MorseWavelet;
