//! Centered finite-difference stencils shared by the moment and diagnostics
//! paths.
//!
//! All derivatives use the 4th-order five-point stencil. The first and last
//! two samples of each derivative are not defined by a centered stencil and
//! are filled with NaN; callers treat them as invalid rather than falling
//! back to one-sided formulas, so each differentiation order costs two
//! samples on either end.

use num_complex::Complex64;

/// Number of samples lost on each boundary per differentiation.
pub const STENCIL_MARGIN: usize = 2;

/// 4th-order centered first derivative of a real series.
pub fn derivative_real(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![f64::NAN; n];
    if n < 5 {
        return out;
    }
    let inv = 1.0 / (12.0 * dt);
    for k in 2..n - 2 {
        out[k] = (-x[k + 2] + 8.0 * x[k + 1] - 8.0 * x[k - 1] + x[k - 2]) * inv;
    }
    out
}

/// 4th-order centered first derivative of a complex series.
pub fn derivative_complex(x: &[Complex64], dt: f64) -> Vec<Complex64> {
    let n = x.len();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut out = vec![nan; n];
    if n < 5 {
        return out;
    }
    let inv = 1.0 / (12.0 * dt);
    for k in 2..n - 2 {
        out[k] = (-x[k + 2] + 8.0 * x[k + 1] - 8.0 * x[k - 1] + x[k - 2]) * inv;
    }
    out
}
