//! File interchange: CSV readers/writers and the JSON configuration.
//!
//! Numeric CSV output uses 17 significant digits in scientific notation,
//! LF line endings, a mandatory header row, and no locale dependence, so
//! identical runs produce byte-identical files and values survive a
//! round-trip exactly.

pub mod config;
pub mod csv;
pub mod export;

/// Formats a float with 17 significant digits (round-trip exact for f64).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
