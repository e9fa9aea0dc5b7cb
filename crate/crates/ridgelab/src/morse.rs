//! Generalized Morse wavelets.
//!
//! The family is defined in the frequency domain by
//!
//! ```text
//! Psi(omega) = a * omega^beta * exp(-omega^gamma),   omega > 0
//! Psi(omega) = 0,                                    omega <= 0
//! ```
//!
//! with `beta > 0` controlling the long-time decay (`|psi(t)| ~ t^-(beta+1)`)
//! and `gamma > 0` the high-frequency decay. The normalizing constant is
//! chosen as `a = 2 (e*gamma/beta)^(beta/gamma)` so that the response at the
//! peak frequency `omega_p = (beta/gamma)^(1/gamma)` equals exactly 2; with
//! the `1/s` transform normalization this makes the transform of a unit-
//! amplitude tone have unit magnitude at the matching scale.
//!
//! Frequency-domain derivatives of any order are obtained analytically: the
//! log-derivatives of `Psi` have the closed form
//!
//! ```text
//! d^k/domega^k ln Psi = (-1)^(k-1) (k-1)! beta omega^-k
//!                       - gamma (gamma-1)...(gamma-k+1) omega^(gamma-k)
//! ```
//!
//! and the complete Bell polynomials convert them into the dimensionless
//! derivatives `omega^n Psi^(n)(omega) / Psi(omega)`.
//!
//! Time-domain realizations are periodized inverse DFTs of frequency samples;
//! no closed time-domain form exists in general. The time-support functions
//! (energy fraction, its inverse, and the second moment) are evaluated by
//! quadrature over such a realization.

use num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::gamma::{gamma, gamma_ur};

use crate::bell::complete_bell;
use crate::error::{Error, Result};

/// Fraction of wavelet energy that must fall below the Nyquist frequency
/// when sampling a time-domain realization.
pub const ALIASING_ENERGY_LIMIT: f64 = 1e-3;

/// Default grid for the time-support functions: 2^14 points with the peak
/// frequency mapped to 1/32 of Nyquist, which resolves both the central
/// window and the `beta + 1` power-law tails.
const SUPPORT_GRID_POINTS: usize = 1 << 14;
const SUPPORT_NYQUIST_FRACTION: f64 = 32.0;

/// A generalized Morse wavelet, parameterized by `(beta, gamma)`.
///
/// The struct stores only the two defining parameters; every derived
/// quantity (peak frequency, normalization, duration) is recomputed from
/// them so the triple can never fall out of sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseWavelet {
    beta: f64,
    gamma: f64,
}

impl MorseWavelet {
    /// Requires `beta > 0` and `gamma > 0`.
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !beta.is_finite() || !gamma.is_finite() || beta <= 0.0 || gamma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Morse wavelet requires beta > 0 and gamma > 0, got ({beta}, {gamma})"
            )));
        }
        Ok(Self { beta, gamma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Peak frequency `(beta/gamma)^(1/gamma)`, where `|Psi|` is maximal.
    pub fn peak_frequency(&self) -> f64 {
        (self.beta / self.gamma).powf(1.0 / self.gamma)
    }

    /// Normalizing constant `2 (e*gamma/beta)^(beta/gamma)`.
    pub fn amplitude_constant(&self) -> f64 {
        self.log_amplitude_constant().exp()
    }

    fn log_amplitude_constant(&self) -> f64 {
        let r = self.beta / self.gamma;
        std::f64::consts::LN_2 + r * (1.0 + self.gamma.ln() - self.beta.ln())
    }

    /// Dimensionless duration `P = sqrt(beta*gamma)`.
    ///
    /// `P/pi` is the number of oscillations at the peak frequency that fit
    /// inside the wavelet's central window; `P^2` equals the negated second
    /// dimensionless derivative at the peak.
    pub fn duration(&self) -> f64 {
        (self.beta * self.gamma).sqrt()
    }

    /// Power-law exponent of the long-time decay, `beta + 1`.
    pub fn decay_rate(&self) -> f64 {
        self.beta + 1.0
    }

    /// Ratio of the third to the second dimensionless derivative at the
    /// peak frequency, `gamma - 3`. Zero at `gamma = 3`, where the wavelet
    /// is symmetric about its peak to third order.
    pub fn psi3_ratio(&self) -> f64 {
        self.gamma - 3.0
    }

    /// Frequency response `Psi(omega)`; zero for `omega <= 0`.
    ///
    /// Evaluated as `exp(ln a + beta ln omega - omega^gamma)` to avoid
    /// overflow of the separate factors at extreme parameters.
    pub fn evaluate_frequency(&self, omega: f64) -> f64 {
        if !(omega.is_finite() && omega > 0.0) {
            return 0.0;
        }
        (self.log_amplitude_constant() + self.beta * omega.ln() - omega.powf(self.gamma)).exp()
    }

    /// `k`-th derivative of `ln Psi` at `omega > 0` (`k >= 1`).
    fn log_derivative(&self, k: usize, omega: f64) -> f64 {
        debug_assert!(k >= 1 && omega > 0.0);
        // (k-1)! and the falling factorial gamma (gamma-1) ... (gamma-k+1),
        // both as direct products.
        let mut fact = 1.0;
        for j in 1..k {
            fact *= j as f64;
        }
        let mut falling = 1.0;
        for j in 0..k {
            falling *= self.gamma - j as f64;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * fact * self.beta * omega.powi(-(k as i32))
            - falling * omega.powf(self.gamma - k as f64)
    }

    /// Dimensionless derivative `omega^n Psi^(n)(omega) / Psi(omega)`.
    ///
    /// Computed as `omega^n B_n(c_1, ..., c_n)` where `c_k` is the `k`-th
    /// log-derivative of `Psi`; real-valued for this family. At the peak
    /// frequency the closed forms are `0`, `-beta*gamma`, and
    /// `-(gamma-3)*beta*gamma` for `n = 1, 2, 3`.
    pub fn dimensionless_derivative(&self, n: usize, omega: f64) -> Result<f64> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::Domain(format!(
                "dimensionless derivative requires omega > 0, got {omega}"
            )));
        }
        if n == 0 {
            return Ok(1.0);
        }
        let c: Vec<Complex64> = (1..=n)
            .map(|k| Complex64::new(self.log_derivative(k, omega), 0.0))
            .collect();
        let b = complete_bell(&c, n)?;
        Ok(omega.powi(n as i32) * b.re)
    }

    /// Fraction of the wavelet's energy above `omega_cut` in the frequency
    /// domain. Used as the aliasing guard when sampling.
    fn energy_fraction_above(&self, omega_cut: f64) -> f64 {
        if omega_cut <= 0.0 {
            return 1.0;
        }
        // |Psi|^2 ~ omega^(2 beta) exp(-2 omega^gamma); substituting
        // v = 2 omega^gamma turns the tail into an upper incomplete gamma
        // with shape (2 beta + 1)/gamma.
        let shape = (2.0 * self.beta + 1.0) / self.gamma;
        let x = 2.0 * omega_cut.powf(self.gamma);
        if !x.is_finite() {
            return 0.0;
        }
        gamma_ur(shape, x)
    }

    /// Total energy `integral |psi(t)|^2 dt` of the scale-1 wavelet,
    /// evaluated in closed form through the frequency domain.
    pub fn energy(&self) -> f64 {
        let shape = (2.0 * self.beta + 1.0) / self.gamma;
        let a = self.amplitude_constant();
        a * a / (2.0 * std::f64::consts::PI * self.gamma)
            * 2.0f64.powf(-shape)
            * gamma(shape)
    }

    /// Samples `psi(t/s)/s` on a uniform grid of `n_points` (a power of two,
    /// at least 16) centered at `t = 0`, by inverse DFT of `Psi(s*omega)`.
    ///
    /// Fails with an aliasing error when more than 0.1% of the wavelet's
    /// energy would fall beyond the grid's Nyquist frequency.
    pub fn sample_time_domain(
        &self,
        n_points: usize,
        grid_spacing: f64,
        scale: f64,
    ) -> Result<SampledWavelet> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        if !(grid_spacing.is_finite() && scale.is_finite() && grid_spacing > 0.0 && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid_spacing and scale must be positive, got ({grid_spacing}, {scale})"
            )));
        }
        let nyquist = std::f64::consts::PI / grid_spacing;
        let above = self.energy_fraction_above(scale * nyquist);
        if above > ALIASING_ENERGY_LIMIT {
            return Err(Error::Aliasing {
                beta: self.beta,
                gamma: self.gamma,
                scale,
                above,
                limit: ALIASING_ENERGY_LIMIT,
            });
        }

        let n = n_points;
        let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * grid_spacing);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, slot) in buf.iter_mut().enumerate().take(n / 2 + 1) {
            let value = self.evaluate_frequency(scale * (j as f64) * d_omega);
            // (-1)^j centers the realization at index n/2.
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *slot = Complex64::new(sign * value / (n as f64 * grid_spacing), 0.0);
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(n).process(&mut buf);

        Ok(SampledWavelet {
            values: buf,
            grid_spacing,
            scale,
        })
    }

    fn support_profile(&self, n_points: usize) -> Result<EnergyProfile> {
        let dt = std::f64::consts::PI / (SUPPORT_NYQUIST_FRACTION * self.peak_frequency());
        let sampled = self.sample_time_domain(n_points, dt, 1.0)?;
        Ok(EnergyProfile::new(&sampled))
    }

    /// Energy fraction `alpha(L)`: the share of the wavelet's energy inside
    /// the window `|t| <= L`, at scale 1. Monotone non-decreasing in `L`.
    pub fn energy_fraction(&self, half_width: f64) -> Result<f64> {
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half_width must be >= 0, got {half_width}"
            )));
        }
        self.require_finite_support()?;
        let profile = self.support_profile(SUPPORT_GRID_POINTS)?;
        Ok(profile.fraction_within(half_width))
    }

    /// Time support `L(alpha)`: the half-width enclosing the fraction
    /// `alpha` of the wavelet's energy; inverse of [`energy_fraction`] by
    /// bisection on the monotone profile.
    ///
    /// [`energy_fraction`]: MorseWavelet::energy_fraction
    pub fn time_support(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie strictly inside (0, 1), got {alpha}"
            )));
        }
        self.require_finite_support()?;
        let profile = self.support_profile(SUPPORT_GRID_POINTS)?;
        let mut lo = 0.0;
        let mut hi = profile.max_half_width();
        if profile.fraction_within(hi) < alpha {
            return Err(Error::Domain(format!(
                "alpha = {alpha} is not reached within the sampled support"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = profile.fraction_within(mid);
            if f < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * profile.max_half_width() {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Second moment `sigma_t^2` of `|psi|^2` at scale 1, by quadrature over
    /// sampled realizations with the integration span doubled until two
    /// consecutive levels agree to 1e-4 relative.
    pub fn time_spread(&self) -> Result<f64> {
        self.require_finite_support()?;
        let mut previous: Option<f64> = None;
        for level in 0..3 {
            let profile = self.support_profile(SUPPORT_GRID_POINTS << level)?;
            let spread = profile.second_moment();
            if let Some(prev) = previous {
                if (spread - prev).abs() <= 1e-4 * spread.abs() {
                    return Ok(spread);
                }
            }
            previous = Some(spread);
        }
        Err(Error::Domain(format!(
            "time spread did not converge under span refinement for \
             (beta, gamma) = ({}, {})",
            self.beta, self.gamma
        )))
    }

    fn require_finite_support(&self) -> Result<()> {
        // |psi(t)|^2 ~ t^-(2 beta + 2); the t^2-weighted integrand decays
        // like t^-(2 beta), divergent for beta <= 1/2.
        if self.beta <= 0.5 {
            return Err(Error::Domain(format!(
                "time-support functions require beta > 1/2, got beta = {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// A time-domain realization of a rescaled wavelet on a uniform grid
/// centered at `t = 0` (index `n/2` holds `t = 0`).
#[derive(Debug, Clone)]
pub struct SampledWavelet {
    pub values: Vec<Complex64>,
    pub grid_spacing: f64,
    pub scale: f64,
}

impl SampledWavelet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time coordinate of sample `k`.
    pub fn time_at(&self, k: usize) -> f64 {
        (k as f64 - (self.len() / 2) as f64) * self.grid_spacing
    }
}

/// Piecewise-linear model of `|psi(t)|^2` used by the time-support
/// functions; integrals are exact for the interpolated density, which makes
/// the energy fraction continuous and strictly monotone in the half-width.
struct EnergyProfile {
    dt: f64,
    t0: f64,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl EnergyProfile {
    fn new(sampled: &SampledWavelet) -> Self {
        let dt = sampled.grid_spacing;
        let t0 = sampled.time_at(0);
        let density: Vec<f64> = sampled.values.iter().map(|v| v.norm_sqr()).collect();
        let mut cumulative = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 1..density.len() {
            acc += 0.5 * (density[k - 1] + density[k]) * dt;
            cumulative.push(acc);
        }
        Self {
            dt,
            t0,
            density,
            cumulative,
        }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn max_half_width(&self) -> f64 {
        (-self.t0).min(self.t0 + self.dt * (self.density.len() - 1) as f64)
    }

    /// Integral of the interpolated density from the grid start to `tau`.
    fn integral_to(&self, tau: f64) -> f64 {
        let n = self.density.len();
        let end = self.t0 + self.dt * (n - 1) as f64;
        if tau <= self.t0 {
            return 0.0;
        }
        if tau >= end {
            return self.total();
        }
        let pos = (tau - self.t0) / self.dt;
        let cell = (pos.floor() as usize).min(n - 2);
        let frac = pos - cell as f64;
        let e0 = self.density[cell];
        let e1 = self.density[cell + 1];
        let e_tau = e0 + (e1 - e0) * frac;
        self.cumulative[cell] + 0.5 * (e0 + e_tau) * frac * self.dt
    }

    fn fraction_within(&self, half_width: f64) -> f64 {
        let total = self.total();
        if total <= 0.0 {
            return 0.0;
        }
        ((self.integral_to(half_width) - self.integral_to(-half_width)) / total).clamp(0.0, 1.0)
    }

    fn second_moment(&self) -> f64 {
        let n = self.density.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 1..n {
            let ta = self.t0 + self.dt * (k - 1) as f64;
            let tb = self.t0 + self.dt * k as f64;
            num += 0.5 * (ta * ta * self.density[k - 1] + tb * tb * self.density[k]) * self.dt;
            den += 0.5 * (self.density[k - 1] + self.density[k]) * self.dt;
        }
        num / den
    }
}
