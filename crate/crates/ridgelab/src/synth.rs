//! Deterministic test-signal generators with analytic ground truth.
//!
//! Each generator returns the real samples together with the exact
//! instantaneous frequency, bandwidth, and second-order modulation function
//! of the underlying analytic signal, so estimator output can be scored
//! without a numerical reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::RealSignal;
use crate::error::{Error, Result};

/// Signal family selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    /// `a cos(omega0 t + phi0)`.
    Tone,
    /// Complex instantaneous frequency `omega0 (1 - m e^{i omega1 t})`:
    /// coupled sinusoidal amplitude and frequency modulation.
    Fm,
    /// Linear chirp `a cos(omega0 t + q t^2 / 2)`.
    Chirp,
    /// Gaussian envelope `a exp(-(t-tc)^2 / 2 sigma^2) cos(omega0 (t-tc))`.
    GaussianEnvelope,
}

/// Parameters for [`synthesize`]. Frequencies are radians per time unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub kind: SignalKind,
    pub n: usize,
    pub dt: f64,
    pub amplitude: f64,
    pub omega0: f64,
    /// Initial phase (tone only).
    pub phi0: f64,
    /// Modulation depth (fm).
    pub modulation: f64,
    /// Modulation frequency (fm).
    pub omega1: f64,
    /// Chirp rate (chirp).
    pub rate: f64,
    /// Envelope standard deviation in time units (gaussian-envelope).
    pub sigma: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            kind: SignalKind::Tone,
            n: 1024,
            dt: 1.0,
            amplitude: 1.0,
            omega0: 2.0 * std::f64::consts::PI / 32.0,
            phi0: 0.0,
            modulation: 0.05,
            omega1: 2.0 * std::f64::consts::PI / 512.0,
            rate: 0.0,
            sigma: 128.0,
        }
    }
}

/// A generated signal plus its exact instantaneous quantities.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub signal: RealSignal,
    pub omega: Vec<f64>,
    pub upsilon: Vec<f64>,
    pub rho2: Vec<Complex64>,
    /// The exact analytic signal, where the family defines one.
    pub analytic: Vec<Complex64>,
}

/// Generates the requested signal and its ground truth.
///
/// Fails when the instantaneous frequency would meet or exceed the Nyquist
/// frequency anywhere in the record.
pub fn synthesize(p: &SynthParams) -> Result<GroundTruth> {
    if p.n < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 samples, got {}",
            p.n
        )));
    }
    if !(p.dt.is_finite() && p.dt > 0.0) || !p.amplitude.is_finite() || p.amplitude == 0.0 {
        return Err(Error::InvalidArgument(
            "dt must be positive and amplitude nonzero".into(),
        ));
    }
    if !(p.omega0.is_finite() && p.omega0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "omega0 must be positive, got {}",
            p.omega0
        )));
    }
    let nyquist = std::f64::consts::PI / p.dt;

    let mut omega = Vec::with_capacity(p.n);
    let mut upsilon = Vec::with_capacity(p.n);
    let mut rho2 = Vec::with_capacity(p.n);
    let mut analytic = Vec::with_capacity(p.n);

    match p.kind {
        SignalKind::Tone => {
            for k in 0..p.n {
                let t = k as f64 * p.dt;
                let phase = p.omega0 * t + p.phi0;
                analytic.push(Complex64::from_polar(p.amplitude, phase));
                omega.push(p.omega0);
                upsilon.push(0.0);
                rho2.push(Complex64::new(0.0, 0.0));
            }
            check_band(p.omega0, nyquist)?;
        }
        SignalKind::Fm => {
            if !(p.modulation.is_finite() && p.modulation.abs() < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "fm modulation depth must satisfy |m| < 1, got {}",
                    p.modulation
                )));
            }
            if !(p.omega1.is_finite() && p.omega1 > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "fm modulation frequency must be positive, got {}",
                    p.omega1
                )));
            }
            let m = p.modulation;
            let ratio = m * p.omega0 / p.omega1;
            for k in 0..p.n {
                let t = k as f64 * p.dt;
                // eta = omega0 (1 - m e^{i omega1 t}) integrates to
                // phase = omega0 t - (m omega0/omega1) sin, and
                // ln a = -(m omega0/omega1) cos.
                let w = p.omega0 * (1.0 - m * (p.omega1 * t).cos());
                let u = m * p.omega0 * (p.omega1 * t).sin();
                let log_amp = -ratio * (p.omega1 * t).cos();
                let phase = p.omega0 * t - ratio * (p.omega1 * t).sin();
                analytic.push(Complex64::from_polar(p.amplitude * log_amp.exp(), phase));
                omega.push(w);
                upsilon.push(u);
                // i eta' = m omega0 omega1 e^{i omega1 t}.
                let i_eta_d = Complex64::from_polar(m * p.omega0 * p.omega1, p.omega1 * t);
                rho2.push(Complex64::new((u / w) * (u / w), 0.0) + i_eta_d / (w * w));
            }
            check_band(p.omega0 * (1.0 + m.abs()), nyquist)?;
        }
        SignalKind::Chirp => {
            for k in 0..p.n {
                let t = k as f64 * p.dt;
                let w = p.omega0 + p.rate * t;
                let phase = p.omega0 * t + 0.5 * p.rate * t * t;
                analytic.push(Complex64::from_polar(p.amplitude, phase));
                omega.push(w);
                upsilon.push(0.0);
                rho2.push(Complex64::new(0.0, p.rate / (w * w)));
            }
            let w_end = p.omega0 + p.rate * (p.n as f64 - 1.0) * p.dt;
            check_band(p.omega0.max(w_end), nyquist)?;
            if p.omega0 + p.rate * (p.n as f64 - 1.0) * p.dt <= 0.0 {
                return Err(Error::InvalidArgument(
                    "chirp sweeps through zero frequency".into(),
                ));
            }
        }
        SignalKind::GaussianEnvelope => {
            if !(p.sigma.is_finite() && p.sigma > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "sigma must be positive, got {}",
                    p.sigma
                )));
            }
            let center = 0.5 * (p.n as f64 - 1.0) * p.dt;
            let s2 = p.sigma * p.sigma;
            for k in 0..p.n {
                let t = k as f64 * p.dt - center;
                let a = p.amplitude * (-t * t / (2.0 * s2)).exp();
                analytic.push(Complex64::from_polar(a, p.omega0 * t));
                omega.push(p.omega0);
                let u = -t / s2;
                upsilon.push(u);
                // eta' = i upsilon' with upsilon' = -1/sigma^2.
                let w2 = p.omega0 * p.omega0;
                rho2.push(Complex64::new(u * u / w2 - 1.0 / (s2 * w2), 0.0));
            }
            check_band(p.omega0, nyquist)?;
        }
    }

    let samples: Vec<f64> = analytic.iter().map(|z| z.re).collect();
    Ok(GroundTruth {
        signal: RealSignal::new(samples, p.dt)?,
        omega,
        upsilon,
        rho2,
        analytic,
    })
}

fn check_band(max_omega: f64, nyquist: f64) -> Result<()> {
    if max_omega >= nyquist {
        return Err(Error::InvalidArgument(format!(
            "instantaneous frequency reaches {max_omega}, at or beyond the \
             Nyquist frequency {nyquist}"
        )));
    }
    Ok(())
}
