//! The analytic wavelet transform on a time-scale grid, with its time and
//! scale derivatives and the derived transform moment fields.
//!
//! Everything is evaluated in the frequency domain: the transform at scale
//! `s` multiplies the signal spectrum by `Psi(s omega)` on non-negative
//! frequencies only and inverse-transforms, which keeps the output exactly
//! analytic and absorbs the `1/s` normalization into the argument of `Psi`.
//! Derivatives come from modified wavelets rather than differencing:
//!
//! ```text
//! U(t,s) = (s/omega_p) dW/dt   <- multiplier  i (s omega / omega_p) Psi(s omega)
//! V(t,s) = s dW/ds             <- multiplier  (beta - gamma (s omega)^gamma) Psi(s omega)
//! ```
//!
//! so both derivative fields are themselves wavelet transforms of the
//! original signal. The transform instantaneous frequency and bandwidth are
//! the imaginary and real parts of `(omega_p/s) U/W`, and the second-order
//! moment field combines them with their time derivatives.
//!
//! Scale columns are independent and computed in parallel; output ordering
//! follows the grid, so results are deterministic.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::analytic::RealSignal;
use crate::diff::derivative_real;
use crate::error::{Error, Result};
use crate::morse::MorseWavelet;

/// Default cone-of-influence energy fraction: cells within
/// `s * L(EDGE_ALPHA)` of either record end are masked.
pub const EDGE_ALPHA_DEFAULT: f64 = 0.95;

/// Relative magnitude floor below which transform moments are masked.
pub const MAGNITUDE_FLOOR: f64 = 1e-8;

/// Log-spaced scale grid derived from target frequencies via
/// `s = omega_p / omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    peak_frequency: f64,
}

impl ScaleGrid {
    /// Builds the grid from explicit target frequencies (radians per time
    /// unit). Frequencies must be positive and distinct; the grid stores
    /// scales in ascending order and requires at least two voices per
    /// octave of spacing.
    pub fn from_frequencies(wavelet: &MorseWavelet, omegas: &[f64]) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::InvalidArgument(
                "scale grid needs at least two frequencies".into(),
            ));
        }
        if omegas.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidArgument(
                "scale grid frequencies must be positive and finite".into(),
            ));
        }
        let peak = wavelet.peak_frequency();
        let mut scales: Vec<f64> = omegas.iter().map(|&w| peak / w).collect();
        scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in scales.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidArgument(
                    "scale grid frequencies must be distinct".into(),
                ));
            }
            // Two voices per octave: adjacent log-scale steps of ln(2)/2 at
            // most (with a little slack for rounding).
            if (pair[1] / pair[0]).ln() > 0.5 * std::f64::consts::LN_2 * (1.0 + 1e-9) {
                return Err(Error::InvalidArgument(
                    "scale grid must resolve at least two voices per octave".into(),
                ));
            }
        }
        Ok(Self {
            scales,
            peak_frequency: peak,
        })
    }

    /// Builds a grid of `voices` logarithmically spaced frequencies per
    /// octave covering `[omega_min, omega_max]`.
    pub fn from_range(
        wavelet: &MorseWavelet,
        omega_min: f64,
        omega_max: f64,
        voices: u32,
    ) -> Result<Self> {
        if !(omega_min.is_finite() && omega_max.is_finite() && omega_min > 0.0 && omega_max > omega_min)
        {
            return Err(Error::InvalidArgument(format!(
                "need 0 < omega_min < omega_max, got ({omega_min}, {omega_max})"
            )));
        }
        if voices < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 voices per octave, got {voices}"
            )));
        }
        let octaves = (omega_max / omega_min).log2();
        let count = (octaves * voices as f64).ceil() as usize + 1;
        let omegas: Vec<f64> = (0..count)
            .map(|i| omega_max * 2f64.powf(-(i as f64) / voices as f64))
            .collect();
        Self::from_frequencies(wavelet, &omegas)
    }

    /// Scales in ascending order.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Scale frequency `omega_p / s` of column `j`.
    pub fn frequency(&self, j: usize) -> f64 {
        self.peak_frequency / self.scales[j]
    }

    /// Median log-scale step, used by ridge chaining as the grid unit.
    pub fn log_step(&self) -> f64 {
        let mut steps: Vec<f64> = self
            .scales
            .windows(2)
            .map(|p| (p[1] / p[0]).ln())
            .collect();
        steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        steps[steps.len() / 2]
    }
}

/// A scale that could not be evaluated, with the reason.
#[derive(Debug, Clone)]
pub struct ScaleError {
    pub scale_index: usize,
    pub scale: f64,
    pub message: String,
}

/// Complex transform values on a time-by-scale grid (rows are time samples,
/// columns are ascending scales).
#[derive(Debug, Clone)]
pub struct Scalogram {
    pub values: Array2<Complex64>,
    pub grid: ScaleGrid,
    pub wavelet: MorseWavelet,
    pub dt: f64,
    /// Cone-of-influence mask: true where the cell is clear of boundary
    /// contamination (and the scale itself was valid).
    pub edge_mask: Array2<bool>,
    pub edge_alpha: f64,
    pub scale_errors: Vec<ScaleError>,
}

impl Scalogram {
    pub fn n_times(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_scales(&self) -> usize {
        self.values.ncols()
    }
}

/// Transform instantaneous frequency, bandwidth, and second-order moment
/// fields.
#[derive(Debug, Clone)]
pub struct TransformMoments {
    pub omega: Array2<f64>,
    pub upsilon: Array2<f64>,
    pub p2: Array2<Complex64>,
    /// Validity of omega/upsilon (magnitude floor, edge mask).
    pub valid: Array2<bool>,
    /// Validity of p2 (additionally needs the time-derivative stencil).
    pub p2_valid: Array2<bool>,
}

/// Scalogram plus derivative and moment fields, all on the same grid.
#[derive(Debug, Clone)]
pub struct TransformFields {
    pub scalogram: Scalogram,
    pub u: Array2<Complex64>,
    pub v: Array2<Complex64>,
    pub moments: TransformMoments,
}

#[derive(Clone, Copy)]
enum BankKind {
    Plain,
    TimeDerivative,
    ScaleDerivative,
}

/// Frequency-domain multiplier for one filter-bank variant at `u = s omega`.
fn bank_multiplier(w: &MorseWavelet, kind: BankKind, u: f64) -> Complex64 {
    let psi = w.evaluate_frequency(u);
    match kind {
        BankKind::Plain => Complex64::new(psi, 0.0),
        // Conjugate of -i (u/omega_p) Psi(u), as applied inside the
        // integral; satisfies dW/dt = (omega_p/s) U.
        BankKind::TimeDerivative => Complex64::new(0.0, u / w.peak_frequency() * psi),
        // u Psi'(u) = (beta - gamma u^gamma) Psi(u); satisfies V = s dW/ds.
        BankKind::ScaleDerivative => {
            if u > 0.0 {
                Complex64::new((w.beta() - w.gamma() * u.powf(w.gamma())) * psi, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
    }
}

fn apply_bank(
    x: &RealSignal,
    w: &MorseWavelet,
    grid: &ScaleGrid,
    kind: BankKind,
) -> (Array2<Complex64>, Vec<ScaleError>) {
    let n = x.len();
    let dt = x.dt();
    let nyquist = std::f64::consts::PI / dt;
    let peak = w.peak_frequency();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spectrum: Vec<Complex64> = x
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    forward.process(&mut spectrum);

    let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let columns: Vec<std::result::Result<Vec<Complex64>, String>> = grid
        .scales()
        .par_iter()
        .map(|&s| {
            if peak / s >= nyquist {
                return Err(format!(
                    "scale {s} puts the peak response {:.6} at or beyond the \
                     Nyquist frequency {:.6}",
                    peak / s,
                    nyquist
                ));
            }
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (j, slot) in buf.iter_mut().enumerate().take(n / 2 + 1) {
                let u = s * j as f64 * d_omega;
                *slot = spectrum[j] * bank_multiplier(w, kind, u);
            }
            inverse.process(&mut buf);
            let scale = 1.0 / n as f64;
            for v in &mut buf {
                *v *= scale;
            }
            Ok(buf)
        })
        .collect();

    let mut out = Array2::from_elem((n, grid.len()), Complex64::new(0.0, 0.0));
    let mut errors = Vec::new();
    for (j, column) in columns.into_iter().enumerate() {
        match column {
            Ok(values) => {
                for (t, v) in values.into_iter().enumerate() {
                    out[(t, j)] = v;
                }
            }
            Err(message) => errors.push(ScaleError {
                scale_index: j,
                scale: grid.scales()[j],
                message,
            }),
        }
    }
    (out, errors)
}

fn edge_mask(
    x: &RealSignal,
    w: &MorseWavelet,
    grid: &ScaleGrid,
    edge_alpha: f64,
    errors: &[ScaleError],
) -> Result<Array2<bool>> {
    let n = x.len();
    let dt = x.dt();
    let support = w.time_support(edge_alpha)?;
    let mut mask = Array2::from_elem((n, grid.len()), false);
    for (j, &s) in grid.scales().iter().enumerate() {
        if errors.iter().any(|e| e.scale_index == j) {
            continue;
        }
        let margin = (s * support / dt).ceil() as usize;
        if 2 * margin >= n {
            continue;
        }
        for t in margin..n - margin {
            mask[(t, j)] = true;
        }
    }
    Ok(mask)
}

/// Analytic wavelet transform of `x` with the default cone-of-influence
/// fraction.
pub fn transform(x: &RealSignal, w: &MorseWavelet, grid: &ScaleGrid) -> Result<Scalogram> {
    transform_with_edge_alpha(x, w, grid, EDGE_ALPHA_DEFAULT)
}

/// Analytic wavelet transform with an explicit cone-of-influence fraction.
///
/// Scales whose peak response exceeds the Nyquist frequency are reported in
/// `scale_errors` (their columns stay zero and masked); the transform still
/// succeeds for the remaining scales.
pub fn transform_with_edge_alpha(
    x: &RealSignal,
    w: &MorseWavelet,
    grid: &ScaleGrid,
    edge_alpha: f64,
) -> Result<Scalogram> {
    if !(edge_alpha > 0.0 && edge_alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "edge_alpha must lie in (0, 1), got {edge_alpha}"
        )));
    }
    let (values, scale_errors) = apply_bank(x, w, grid, BankKind::Plain);
    let edge_mask = edge_mask(x, w, grid, edge_alpha, &scale_errors)?;
    Ok(Scalogram {
        values,
        grid: grid.clone(),
        wavelet: *w,
        dt: x.dt(),
        edge_mask,
        edge_alpha,
        scale_errors,
    })
}

/// `U(t,s) = (s/omega_p) dW/dt`, computed with the time-derivative wavelet.
pub fn transform_time_derivative(
    x: &RealSignal,
    w: &MorseWavelet,
    grid: &ScaleGrid,
) -> Result<Array2<Complex64>> {
    Ok(apply_bank(x, w, grid, BankKind::TimeDerivative).0)
}

/// `V(t,s) = s dW/ds`, computed with the scale-derivative wavelet.
pub fn transform_scale_derivative(
    x: &RealSignal,
    w: &MorseWavelet,
    grid: &ScaleGrid,
) -> Result<Array2<Complex64>> {
    Ok(apply_bank(x, w, grid, BankKind::ScaleDerivative).0)
}

/// Transform instantaneous frequency/bandwidth and the second-order moment
/// field from a scalogram and its time-derivative field.
///
/// `Omega = Im{(omega_p/s) U/W}`, `Upsilon = Re{...}`, and
/// `P2 = Upsilon^2/Omega^2 + (d_t Upsilon)/Omega^2 + i (d_t Omega)/Omega^2`
/// with 4th-order centered time differences on the fields.
pub fn transform_moments(s: &Scalogram, u: &Array2<Complex64>) -> TransformMoments {
    let (n_t, n_s) = s.values.dim();
    assert_eq!(u.dim(), (n_t, n_s), "field dimensions must agree");
    let peak = s.wavelet.peak_frequency();
    let w_max = s.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = MAGNITUDE_FLOOR * w_max;

    let mut omega = Array2::from_elem((n_t, n_s), f64::NAN);
    let mut upsilon = Array2::from_elem((n_t, n_s), f64::NAN);
    let mut valid = Array2::from_elem((n_t, n_s), false);
    for j in 0..n_s {
        let scale = s.grid.scales()[j];
        for t in 0..n_t {
            let w_val = s.values[(t, j)];
            if !s.edge_mask[(t, j)] || w_val.norm() < floor {
                continue;
            }
            let ratio = u[(t, j)] / w_val * (peak / scale);
            if ratio.re.is_finite() && ratio.im.is_finite() {
                omega[(t, j)] = ratio.im;
                upsilon[(t, j)] = ratio.re;
                valid[(t, j)] = true;
            }
        }
    }

    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut p2 = Array2::from_elem((n_t, n_s), nan);
    let mut p2_valid = Array2::from_elem((n_t, n_s), false);
    for j in 0..n_s {
        let omega_col: Vec<f64> = (0..n_t).map(|t| omega[(t, j)]).collect();
        let upsilon_col: Vec<f64> = (0..n_t).map(|t| upsilon[(t, j)]).collect();
        let d_omega = derivative_real(&omega_col, s.dt);
        let d_upsilon = derivative_real(&upsilon_col, s.dt);
        for t in 0..n_t {
            if !valid[(t, j)] {
                continue;
            }
            let w2 = omega_col[t] * omega_col[t];
            if w2 == 0.0 || !d_omega[t].is_finite() || !d_upsilon[t].is_finite() {
                continue;
            }
            let value = Complex64::new(
                (upsilon_col[t] * upsilon_col[t] + d_upsilon[t]) / w2,
                d_omega[t] / w2,
            );
            if value.re.is_finite() && value.im.is_finite() {
                p2[(t, j)] = value;
                p2_valid[(t, j)] = true;
            }
        }
    }

    TransformMoments {
        omega,
        upsilon,
        p2,
        valid,
        p2_valid,
    }
}

/// Computes the scalogram, both derivative fields, and the moment fields in
/// one call.
pub fn transform_fields(
    x: &RealSignal,
    w: &MorseWavelet,
    grid: &ScaleGrid,
    edge_alpha: f64,
) -> Result<TransformFields> {
    let scalogram = transform_with_edge_alpha(x, w, grid, edge_alpha)?;
    let u = transform_time_derivative(x, w, grid)?;
    let v = transform_scale_derivative(x, w, grid)?;
    let moments = transform_moments(&scalogram, &u);
    Ok(TransformFields {
        scalogram,
        u,
        v,
        moments,
    })
}
