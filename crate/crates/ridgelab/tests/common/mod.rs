//! Shared oracles for the integration suites.
//!
//! Everything here recomputes expected values through routes that are
//! independent of the production code paths they check: finite-difference
//! stencils built from Fornberg weights, a direct O(N^2) circular
//! correlation against a sampled wavelet, and the demodulated-derivative
//! definition of the modulation functions.

#![allow(dead_code)]

use num_complex::Complex64;
use ridgelab::analytic::{AnalyticSignal, InstantaneousMoments, RealSignal};
use ridgelab::morse::MorseWavelet;

/// Fornberg's algorithm: weights of the `m`-th derivative at `z` for
/// samples on the nodes `x`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// `n`-th derivative of `f` at `x` by a 17-point centered stencil.
///
/// The step starts near the function's own frequency-domain width `x/p`
/// and shrinks until two successive estimates agree, balancing truncation
/// against rounding without a hand-tuned constant per `(n, p)`.
pub fn fd_derivative(f: &dyn Fn(f64) -> f64, x: f64, n: usize, p: f64) -> f64 {
    let eval = |h_rel: f64| -> f64 {
        let h = h_rel * x;
        let nodes: Vec<f64> = (-8..=8).map(|k| x + k as f64 * h).collect();
        let weights = fornberg_weights(x, &nodes, n);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&xi, &wi)| wi * f(xi))
            .sum()
    };
    // Short-duration wavelets are wide in frequency, so the stencil can
    // afford a larger step (smaller 1/h^n rounding amplification); the cap
    // keeps all 17 nodes strictly positive.
    let mut h_rel = (0.3 / p).min(0.1);
    let mut previous = eval(h_rel);
    let mut best = previous;
    let mut best_gap = f64::INFINITY;
    for _ in 0..10 {
        h_rel /= 1.7;
        let current = eval(h_rel);
        let gap = (current - previous).abs() / current.abs().max(1e-300);
        if gap < best_gap {
            best_gap = gap;
            // Of an agreeing pair, the larger step sits on the truncation
            // side of the plateau where rounding has not yet crept in.
            best = previous;
        }
        if gap <= 5e-9 {
            return current;
        }
        previous = current;
    }
    best
}

/// Dimensionless derivative `omega^n Psi^(n)/Psi` via finite differences on
/// the frequency response alone.
pub fn fd_dimensionless_derivative(w: &MorseWavelet, n: usize, omega: f64) -> f64 {
    let f = |u: f64| w.evaluate_frequency(u);
    let derivative = fd_derivative(&f, omega, n, w.duration());
    omega.powi(n as i32) * derivative / w.evaluate_frequency(omega)
}

/// Direct circular correlation of the record with a sampled, periodized
/// wavelet: one scalogram column computed in O(N^2).
pub fn brute_force_column(x: &RealSignal, w: &MorseWavelet, scale: f64) -> Vec<Complex64> {
    let n = x.len();
    let sampled = w
        .sample_time_domain(n, x.dt(), scale)
        .expect("oracle scale must be resolvable");
    let half = n / 2;
    (0..n)
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (tau, &value) in x.samples().iter().enumerate() {
                // psi_s((tau - t) dt), periodic in the record length.
                let idx = (tau + n + half - t) % n;
                acc += sampled.values[idx].conj() * value;
            }
            acc * x.dt()
        })
        .collect()
}

/// Modulation function of order `n` at sample `t`, straight from the
/// definition: tau-derivatives of the demodulated signal
/// `x_+(t + tau) e^{-i omega(t) tau}` at `tau = 0`, via centered stencils.
pub fn demodulated_rho(
    xa: &AnalyticSignal,
    moments: &InstantaneousMoments,
    t: usize,
    n: usize,
) -> Option<Complex64> {
    let half = 4usize;
    if t < half || t + half >= xa.len() {
        return None;
    }
    let omega = moments.omega[t];
    if !omega.is_finite() || omega == 0.0 {
        return None;
    }
    let dt = xa.dt();
    let x0 = xa.samples()[t];
    if x0.norm() == 0.0 {
        return None;
    }
    let offsets: Vec<f64> = (-(half as i64)..=half as i64)
        .map(|k| k as f64 * dt)
        .collect();
    let weights = fornberg_weights(0.0, &offsets, n);
    let mut derivative = Complex64::new(0.0, 0.0);
    for (k, &wk) in weights.iter().enumerate() {
        let j = t + k - half;
        let tau = offsets[k];
        let g = xa.samples()[j] * Complex64::new(0.0, -omega * tau).exp();
        derivative += g * wk;
    }
    Some(derivative / (omega.powi(n as i32) * x0))
}

/// Least-squares slope through the origin of complex pairs `(p, d)` and the
/// squared correlation magnitude.
pub fn complex_regression(predicted: &[Complex64], measured: &[Complex64]) -> (Complex64, f64) {
    let mut cross = Complex64::new(0.0, 0.0);
    let mut pp = 0.0;
    let mut dd = 0.0;
    for (p, d) in predicted.iter().zip(measured) {
        cross += d * p.conj();
        pp += p.norm_sqr();
        dd += d.norm_sqr();
    }
    let slope = cross / pp;
    let r2 = cross.norm_sqr() / (pp * dd);
    (slope, r2)
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

/// The coupled AM/FM family used across the acceptance криteria: complex
/// instantaneous frequency `omega0 (1 - m e^{i omega1 t})`.
pub struct FmTruth {
    pub signal: RealSignal,
    pub analytic: Vec<Complex64>,
    pub omega: Vec<f64>,
    pub rho2: Vec<Complex64>,
}

pub fn fm_family(n: usize, omega0: f64, omega1: f64, m: f64) -> FmTruth {
    let ratio = m * omega0 / omega1;
    let mut analytic = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    let mut rho2 = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64;
        let w = omega0 * (1.0 - m * (omega1 * t).cos());
        let log_amp = -ratio * (omega1 * t).cos();
        let phase = omega0 * t - ratio * (omega1 * t).sin();
        analytic.push(Complex64::from_polar(log_amp.exp(), phase));
        omega.push(w);
        let u = m * omega0 * (omega1 * t).sin();
        let i_eta_d = Complex64::from_polar(m * omega0 * omega1, omega1 * t);
        rho2.push(Complex64::new((u / w) * (u / w), 0.0) + i_eta_d / (w * w));
    }
    let samples: Vec<f64> = analytic.iter().map(|z| z.re).collect();
    FmTruth {
        signal: RealSignal::new(samples, 1.0).unwrap(),
        analytic,
        omega,
        rho2,
    }
}
