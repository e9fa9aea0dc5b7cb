//! Writers for the analysis products: scalogram (CSV magnitude, JSON
//! sidecar, optional raw complex dump), ridge and estimate tables,
//! residuals, ground truth, and the diagnostics report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analytic::RealSignal;
use crate::awt::Scalogram;
use crate::diagnostics::{FidelityStats, SuitabilityVerdict};
use crate::error::Result;
use crate::io::fmt_f64;
use crate::morse::MorseWavelet;
use crate::ridge::{RidgeCurve, RidgeEstimate};
use crate::synth::GroundTruth;

/// Scalogram magnitude as CSV: `time` column then one `s<index>` column per
/// scale (scales themselves live in the sidecar).
pub fn write_scalogram_csv(path: &Path, s: &Scalogram) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "time")?;
    for j in 0..s.n_scales() {
        write!(out, ",s{j:03}")?;
    }
    writeln!(out)?;
    for t in 0..s.n_times() {
        write!(out, "{}", fmt_f64(t as f64 * s.dt))?;
        for j in 0..s.n_scales() {
            write!(out, ",{}", fmt_f64(s.values[(t, j)].norm()))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EdgePolicy {
    alpha: f64,
    description: &'static str,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    scales: &'a [f64],
    dt: f64,
    beta: f64,
    gamma: f64,
    edge_policy: EdgePolicy,
}

/// JSON sidecar shared by the CSV and raw scalogram exports.
pub fn write_scalogram_sidecar(path: &Path, s: &Scalogram) -> Result<()> {
    let sidecar = Sidecar {
        scales: s.grid.scales(),
        dt: s.dt,
        beta: s.wavelet.beta(),
        gamma: s.wavelet.gamma(),
        edge_policy: EdgePolicy {
            alpha: s.edge_alpha,
            description: "cells within scale * L(alpha) of either record end are masked",
        },
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &sidecar).map_err(std::io::Error::other)?;
    writeln!(out)?;
    Ok(())
}

/// Raw complex scalogram: interleaved little-endian f64 (re, im), row-major
/// over (time, scale).
pub fn write_scalogram_raw(path: &Path, s: &Scalogram) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for t in 0..s.n_times() {
        for j in 0..s.n_scales() {
            let v = s.values[(t, j)];
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Ridge table: every curve's points with their along-ridge estimates.
pub fn write_ridge_csv(
    path: &Path,
    peak_frequency: f64,
    dt: f64,
    curves: &[RidgeCurve],
    estimates: &[RidgeEstimate],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "time,scale,freq,re_xhat,im_xhat,omega_hat,upsilon_hat,re_rho2,im_rho2,kind,curve_id"
    )?;
    for (id, (curve, est)) in curves.iter().zip(estimates).enumerate() {
        for (i, p) in curve.points.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{id}",
                fmt_f64(p.time_index as f64 * dt),
                fmt_f64(p.scale),
                fmt_f64(peak_frequency / p.scale),
                fmt_f64(est.x_hat[i].re),
                fmt_f64(est.x_hat[i].im),
                fmt_f64(est.omega_hat[i]),
                fmt_f64(est.upsilon_hat[i]),
                fmt_f64(est.rho2_hat[i].re),
                fmt_f64(est.rho2_hat[i].im),
                curve.kind,
            )?;
        }
    }
    Ok(())
}

/// Unwraps a phase series by +-2pi accumulation (NaN samples break the
/// accumulation, mirroring the moment machinery).
fn unwrap_series(phase: &[f64]) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut out = vec![f64::NAN; phase.len()];
    let mut prev: Option<(f64, f64)> = None;
    for (k, &p) in phase.iter().enumerate() {
        if !p.is_finite() {
            prev = None;
            continue;
        }
        let u = match prev {
            None => p,
            Some((pw, pu)) => {
                let mut d = p - pw;
                d -= tau * (d / tau).round();
                pu + d
            }
        };
        out[k] = u;
        prev = Some((p, u));
    }
    out
}

/// Estimate table for one ridge curve.
pub fn write_estimate_csv(path: &Path, est: &RidgeEstimate) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "time,re_xhat,im_xhat,a_hat,phi_hat,omega_hat,upsilon_hat,re_rho2,im_rho2"
    )?;
    let unwrapped = unwrap_series(&est.phi_hat);
    for (i, &phi) in unwrapped.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(est.time_indices[i] as f64 * est.dt),
            fmt_f64(est.x_hat[i].re),
            fmt_f64(est.x_hat[i].im),
            fmt_f64(est.a_hat[i]),
            fmt_f64(phi),
            fmt_f64(est.omega_hat[i]),
            fmt_f64(est.upsilon_hat[i]),
            fmt_f64(est.rho2_hat[i].re),
            fmt_f64(est.rho2_hat[i].im),
        )?;
    }
    Ok(())
}

/// Residual between the input record and the real part of the estimate.
pub fn write_residual_csv(path: &Path, x: &RealSignal, est: &RidgeEstimate) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "time,residual")?;
    for (i, &t) in est.time_indices.iter().enumerate() {
        let residual = x.samples()[t] - est.x_hat[i].re;
        writeln!(out, "{},{}", fmt_f64(t as f64 * est.dt), fmt_f64(residual))?;
    }
    Ok(())
}

/// Two-column signal CSV (time, value).
pub fn write_signal_csv(path: &Path, x: &RealSignal) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "time,value")?;
    for (k, &v) in x.samples().iter().enumerate() {
        writeln!(out, "{},{}", fmt_f64(k as f64 * x.dt()), fmt_f64(v))?;
    }
    Ok(())
}

/// Ground-truth table matching a synthesized signal.
pub fn write_truth_csv(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "time,value,omega,upsilon,re_rho2,im_rho2")?;
    let dt = truth.signal.dt();
    for (k, &v) in truth.signal.samples().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(k as f64 * dt),
            fmt_f64(v),
            fmt_f64(truth.omega[k]),
            fmt_f64(truth.upsilon[k]),
            fmt_f64(truth.rho2[k].re),
            fmt_f64(truth.rho2[k].im),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct WaveletJson {
    beta: f64,
    gamma: f64,
    #[serde(rename = "P")]
    p: f64,
}

/// The diagnostics report written by `analyze` and printed by `suitability`
/// and `fidelity`.
#[derive(Serialize)]
pub struct DiagnosticsJson {
    wavelet: WaveletJson,
    delta: f64,
    suitability: SuitabilityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<FidelityStats>,
}

impl DiagnosticsJson {
    pub fn new(
        w: &MorseWavelet,
        delta: f64,
        suitability: SuitabilityVerdict,
        fidelity: Option<FidelityStats>,
    ) -> Self {
        Self {
            wavelet: WaveletJson {
                beta: w.beta(),
                gamma: w.gamma(),
                p: w.duration(),
            },
            delta,
            suitability,
            fidelity,
        }
    }

    pub fn to_pretty_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(self.to_pretty_string().as_bytes())?;
        writeln!(out)?;
        Ok(())
    }
}
