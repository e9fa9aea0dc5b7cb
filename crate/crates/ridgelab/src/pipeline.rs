//! End-to-end analysis: transform, ridge extraction, estimation, and the
//! diagnostic summary, driven by one parameter set.
//!
//! The same entry point serves the command-line `analyze` command and the
//! iterated-fidelity re-analysis, so both are guaranteed to run identical
//! configurations.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::RealSignal;
use crate::awt::{transform_fields, ScaleGrid, TransformFields};
use crate::diagnostics::{check_suitability, SuitabilityVerdict};
use crate::error::{Error, Result};
use crate::morse::MorseWavelet;
use crate::ridge::{
    chain_ridges, default_min_cycles, detect_ridge_points, estimate_along_ridge, RidgeCurve,
    RidgeEstimate, RidgeKind,
};

/// Everything needed to reproduce an analysis run.
///
/// Frequencies are in radians per sample; they are divided by the record's
/// sample interval when the scale grid is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub beta: f64,
    pub gamma: f64,
    pub freq_min: f64,
    pub freq_max: f64,
    pub voices_per_octave: u32,
    pub ridge_kind: RidgeKind,
    /// Curve-length threshold in cycles; `None` selects `2 P`.
    pub min_cycles: Option<f64>,
    pub edge_alpha: f64,
    /// Truncation order for modulation-function and stability analyses
    /// of raw signals; the estimate diagnostics always use the robust
    /// second-order level.
    pub truncation: usize,
    /// Chaining jump limit in grid steps.
    pub max_jump: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            beta: 3.0,
            gamma: 3.0,
            freq_min: std::f64::consts::PI / 128.0,
            freq_max: std::f64::consts::PI / 2.0,
            voices_per_octave: 8,
            ridge_kind: RidgeKind::Amplitude,
            min_cycles: None,
            edge_alpha: 0.95,
            truncation: 4,
            max_jump: 1.5,
        }
    }
}

impl PipelineParams {
    pub fn wavelet(&self) -> Result<MorseWavelet> {
        MorseWavelet::new(self.beta, self.gamma)
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        self.wavelet()?;
        if !(self.freq_min.is_finite() && self.freq_min > 0.0 && self.freq_min < self.freq_max) {
            return Err(Error::Config(format!(
                "need 0 < freq_min < freq_max, got ({}, {})",
                self.freq_min, self.freq_max
            )));
        }
        if self.freq_max >= std::f64::consts::PI {
            return Err(Error::Config(format!(
                "freq_max = {} rad/sample is at or above Nyquist (pi)",
                self.freq_max
            )));
        }
        if self.voices_per_octave < 2 {
            return Err(Error::Config(format!(
                "voices_per_octave must be >= 2, got {}",
                self.voices_per_octave
            )));
        }
        if !(self.edge_alpha.is_finite() && self.edge_alpha > 0.0 && self.edge_alpha < 1.0) {
            return Err(Error::Config(format!(
                "edge_alpha must lie in (0, 1), got {}",
                self.edge_alpha
            )));
        }
        if self.truncation < 2 {
            return Err(Error::Config(format!(
                "truncation must be >= 2, got {}",
                self.truncation
            )));
        }
        if !(self.max_jump.is_finite() && self.max_jump > 0.0) {
            return Err(Error::Config(format!(
                "max_jump must be positive, got {}",
                self.max_jump
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("sample interval must be positive, got {dt}")));
        }
        Ok(())
    }

    /// The scale grid for a record sampled at `dt` (frequencies converted
    /// from radians per sample to radians per time unit).
    pub fn grid(&self, dt: f64) -> Result<ScaleGrid> {
        let w = self.wavelet()?;
        ScaleGrid::from_range(
            &w,
            self.freq_min / dt,
            self.freq_max / dt,
            self.voices_per_octave,
        )
    }
}

/// SHA-256 of the canonical JSON serialization, for reproducibility stamps.
pub fn params_hash(params: &PipelineParams) -> String {
    let json = serde_json::to_string(params).expect("params serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Stability and suitability of the best ridge estimate.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSummary {
    pub delta: f64,
    pub suitability: SuitabilityVerdict,
}

/// Result of a full analysis run.
#[derive(Debug)]
pub struct AnalysisOutputs {
    pub fields: TransformFields,
    pub curves: Vec<RidgeCurve>,
    pub estimates: Vec<RidgeEstimate>,
    /// Index of the longest curve (by cycle count), if any.
    pub best: Option<usize>,
    pub diagnostics: Option<DiagnosticsSummary>,
}

/// Runs transform, detection, chaining, estimation, and diagnostics.
pub fn analyze(x: &RealSignal, params: &PipelineParams) -> Result<AnalysisOutputs> {
    params.validate(x.dt())?;
    let w = params.wavelet()?;
    let grid = params.grid(x.dt())?;
    let fields = transform_fields(x, &w, &grid, params.edge_alpha)?;
    let set = detect_ridge_points(&fields, params.ridge_kind);
    let min_cycles = params.min_cycles.unwrap_or_else(|| default_min_cycles(&w));
    let curves = chain_ridges(&set, params.max_jump, min_cycles);
    let estimates: Vec<RidgeEstimate> = curves
        .iter()
        .map(|c| estimate_along_ridge(&fields, c))
        .collect();

    let best = curves
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.length_cycles.partial_cmp(&b.length_cycles).unwrap())
        .map(|(i, _)| i);

    let diagnostics = match best {
        Some(i) => estimate_diagnostics(&estimates[i], &w)?,
        None => None,
    };

    Ok(AnalysisOutputs {
        fields,
        curves,
        estimates,
        best,
        diagnostics,
    })
}

/// Stability level of a ridge estimate and the wavelet's suitability at
/// that level. Returns `None` when the estimate is too short.
///
/// The level is measured from the estimate's own field-differentiated
/// series: `|upsilon/omega|` at first order and `|rho_2 - rho_1^2|^(1/2)`
/// (the normalized first derivative of the complex instantaneous
/// frequency) at second order. Re-differentiating the interpolated
/// estimate instead would let the n-th root of the scale-interpolation
/// jitter dominate every order above the second.
pub fn estimate_diagnostics(
    est: &RidgeEstimate,
    w: &MorseWavelet,
) -> Result<Option<DiagnosticsSummary>> {
    let mut sup_rho1: f64 = 0.0;
    let mut sup_eta: f64 = 0.0;
    let mut count = 0usize;
    for i in 0..est.len() {
        if !est.valid[i] || !est.rho2_valid[i] {
            continue;
        }
        let omega = est.omega_hat[i];
        if !(omega.is_finite() && omega != 0.0) {
            continue;
        }
        let rho1 = est.upsilon_hat[i] / omega;
        let eta_term = est.rho2_hat[i] - num_complex::Complex64::new(rho1 * rho1, 0.0);
        if rho1.is_finite() && eta_term.re.is_finite() && eta_term.im.is_finite() {
            sup_rho1 = sup_rho1.max(rho1.abs());
            sup_eta = sup_eta.max(eta_term.norm());
            count += 1;
        }
    }
    if count < 32 {
        return Ok(None);
    }
    let delta = sup_rho1.max(sup_eta.sqrt());
    let suitability = check_suitability(w, delta, 10)?;
    Ok(Some(DiagnosticsSummary { delta, suitability }))
}
