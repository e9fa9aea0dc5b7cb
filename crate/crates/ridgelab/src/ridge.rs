//! Ridge detection, chaining, and along-ridge signal estimation.
//!
//! An amplitude ridge point is a scale at which the transform magnitude is
//! stationary and maximal along the scale axis at fixed time; the defining
//! quantity is `Re{V/W} = s d(ln|W|)/ds`, which crosses from positive to
//! negative there. A phase ridge point is where the transform's rate of
//! phase change matches the scale frequency: `Omega - omega_p/s` crosses
//! zero, oriented so that the magnitude maximum (not minimum) is selected.
//! Crossings are refined by quadratic interpolation of the defining
//! quantity in log-scale, and field values at the refined scale come from
//! componentwise quadratic interpolation across the three nearest columns.
//!
//! Points are chained greedily across consecutive times by nearest
//! log-scale, with ties going to the larger transform magnitude. Curves
//! shorter than a cycle threshold are discarded; the default threshold is
//! `2 P` cycles of the estimated oscillation, where `P` is the wavelet
//! duration.
//!
//! The ridge estimate evaluates `W`, and the moment fields `Omega`,
//! `Upsilon`, and `P2`, along the curve; differentiation happened on the
//! full fields before the lookup, never on the extracted series.

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::awt::TransformFields;
use crate::morse::MorseWavelet;

/// Which ridge definition a point or curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RidgeKind {
    Amplitude,
    Phase,
}

impl std::fmt::Display for RidgeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RidgeKind::Amplitude => write!(f, "amplitude"),
            RidgeKind::Phase => write!(f, "phase"),
        }
    }
}

/// A single ridge point: a time sample with an interpolated (off-grid)
/// scale and the transform value there.
#[derive(Debug, Clone, Copy)]
pub struct RidgePoint {
    pub time_index: usize,
    pub scale: f64,
    pub value: Complex64,
    pub kind: RidgeKind,
}

/// Detected ridge points plus the grid context chaining needs.
#[derive(Debug, Clone)]
pub struct RidgePointSet {
    pub points: Vec<RidgePoint>,
    pub kind: RidgeKind,
    pub peak_frequency: f64,
    pub dt: f64,
    pub log_step: f64,
}

/// A time-contiguous, single-valued chain of ridge points.
#[derive(Debug, Clone)]
pub struct RidgeCurve {
    pub points: Vec<RidgePoint>,
    pub kind: RidgeKind,
    /// Integrated scale frequency along the curve, in cycles.
    pub length_cycles: f64,
}

impl RidgeCurve {
    pub fn start(&self) -> usize {
        self.points.first().map_or(0, |p| p.time_index)
    }

    pub fn end(&self) -> usize {
        self.points.last().map_or(0, |p| p.time_index)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Along-ridge estimates of the analytic signal and its instantaneous
/// quantities. All series share the curve's time base; `valid` flags
/// samples whose interpolation touched only unmasked cells, `rho2_valid`
/// additionally requires the differentiated moment field.
#[derive(Debug, Clone)]
pub struct RidgeEstimate {
    pub kind: RidgeKind,
    pub dt: f64,
    pub time_indices: Vec<usize>,
    pub scale: Vec<f64>,
    pub x_hat: Vec<Complex64>,
    pub a_hat: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub omega_hat: Vec<f64>,
    pub upsilon_hat: Vec<f64>,
    pub rho2_hat: Vec<Complex64>,
    pub valid: Vec<bool>,
    pub rho2_valid: Vec<bool>,
}

impl RidgeEstimate {
    pub fn len(&self) -> usize {
        self.time_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_indices.is_empty()
    }

    /// Longest run of consecutive valid samples, as a range of positions
    /// into the estimate's own arrays.
    pub fn longest_valid_run(&self) -> Option<Range<usize>> {
        let mut best: Option<Range<usize>> = None;
        let mut start = None;
        for (i, &ok) in self.valid.iter().enumerate() {
            match (ok, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    if best.as_ref().is_none_or(|b| i - s > b.len()) {
                        best = Some(s..i);
                    }
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            let i = self.valid.len();
            if best.as_ref().is_none_or(|b| i - s > b.len()) {
                best = Some(s..i);
            }
        }
        best
    }
}

/// Default curve-length threshold in cycles: twice the wavelet duration,
/// matching the convention of reading `2P` as a cycle count.
pub fn default_min_cycles(w: &MorseWavelet) -> f64 {
    2.0 * w.duration()
}

/// Quadratic (three-point Lagrange) interpolation of `ys` at `u`.
fn lagrange3(us: [f64; 3], ys: [f64; 3], u: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut term = ys[i];
        for m in 0..3 {
            if m != i {
                term *= (u - us[m]) / (us[i] - us[m]);
            }
        }
        acc += term;
    }
    acc
}

/// Root of the parabola through three samples inside `[lo, hi]`, if any.
fn quadratic_root(us: [f64; 3], gs: [f64; 3], lo: f64, hi: f64) -> Option<f64> {
    // Coefficients of the interpolating parabola via divided differences:
    // p(u) = g0 + d01 (u - u0) + a (u - u0)(u - u1).
    let d01 = (gs[1] - gs[0]) / (us[1] - us[0]);
    let d12 = (gs[2] - gs[1]) / (us[2] - us[1]);
    let a = (d12 - d01) / (us[2] - us[0]);
    let b = d01 - a * (us[0] + us[1]);
    let c = gs[0] - us[0] * d01 + a * us[0] * us[1];
    let eps = 1e-12 * (hi - lo);
    if a.abs() < 1e-300 {
        if b == 0.0 {
            return None;
        }
        let root = -c / b;
        return (root >= lo - eps && root <= hi + eps).then_some(root.clamp(lo, hi));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable split of the two roots.
    let q = -0.5 * (b + b.signum() * sq);
    let roots = [q / a, if q != 0.0 { c / q } else { f64::INFINITY }];
    let mid = 0.5 * (lo + hi);
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r >= lo - eps && *r <= hi + eps)
        .min_by(|x, y| (x - mid).abs().partial_cmp(&(y - mid).abs()).unwrap())
        .map(|r| r.clamp(lo, hi))
}

/// Detects ridge points of the requested kind in every time row.
pub fn detect_ridge_points(fields: &TransformFields, kind: RidgeKind) -> RidgePointSet {
    let s = &fields.scalogram;
    let (n_t, n_s) = s.values.dim();
    let peak = s.wavelet.peak_frequency();
    let scales = s.grid.scales().to_vec();
    let us: Vec<f64> = scales.iter().map(|v| v.ln()).collect();

    let rows: Vec<Vec<RidgePoint>> = (0..n_t)
        .into_par_iter()
        .map(|t| {
            // Defining quantity per column; None where the cell is masked.
            let g = |j: usize| -> Option<f64> {
                if !fields.moments.valid[(t, j)] {
                    return None;
                }
                match kind {
                    RidgeKind::Amplitude => {
                        let ratio = fields.v[(t, j)] / s.values[(t, j)];
                        ratio.re.is_finite().then_some(ratio.re)
                    }
                    RidgeKind::Phase => {
                        let r = fields.moments.omega[(t, j)] - peak / scales[j];
                        r.is_finite().then_some(r)
                    }
                }
            };
            let crossing = |a: f64, b: f64| match kind {
                // Magnitude maximum: d ln|W| / d ln s falls through zero.
                RidgeKind::Amplitude => a > 0.0 && b <= 0.0,
                // Phase-rate match, oriented toward the magnitude maximum:
                // Omega - omega_p/s rises through zero along ascending
                // scale (equivalently falls along ascending frequency).
                RidgeKind::Phase => a < 0.0 && b >= 0.0,
            };

            let mut points = Vec::new();
            for j in 0..n_s - 1 {
                let (Some(gj), Some(gj1)) = (g(j), g(j + 1)) else {
                    continue;
                };
                if !crossing(gj, gj1) {
                    continue;
                }
                let (lo, hi) = (us[j], us[j + 1]);
                // Prefer the centered triple; fall back to the forward one,
                // then to the secant through the bracket.
                let refined = if j >= 1 && g(j - 1).is_some() {
                    quadratic_root(
                        [us[j - 1], us[j], us[j + 1]],
                        [g(j - 1).unwrap(), gj, gj1],
                        lo,
                        hi,
                    )
                } else if j + 2 < n_s && g(j + 2).is_some() {
                    quadratic_root(
                        [us[j], us[j + 1], us[j + 2]],
                        [gj, gj1, g(j + 2).unwrap()],
                        lo,
                        hi,
                    )
                } else {
                    None
                };
                let u_star = refined.unwrap_or_else(|| {
                    if gj == gj1 {
                        0.5 * (lo + hi)
                    } else {
                        (lo + (hi - lo) * gj / (gj - gj1)).clamp(lo, hi)
                    }
                });

                // Transform value at the refined scale.
                let c = if u_star - us[j] <= us[j + 1] - u_star {
                    j
                } else {
                    j + 1
                }
                .clamp(1, n_s - 2);
                let nodes = [us[c - 1], us[c], us[c + 1]];
                let re = lagrange3(
                    nodes,
                    [
                        s.values[(t, c - 1)].re,
                        s.values[(t, c)].re,
                        s.values[(t, c + 1)].re,
                    ],
                    u_star,
                );
                let im = lagrange3(
                    nodes,
                    [
                        s.values[(t, c - 1)].im,
                        s.values[(t, c)].im,
                        s.values[(t, c + 1)].im,
                    ],
                    u_star,
                );
                points.push(RidgePoint {
                    time_index: t,
                    scale: u_star.exp(),
                    value: Complex64::new(re, im),
                    kind,
                });
            }
            points
        })
        .collect();

    RidgePointSet {
        points: rows.into_iter().flatten().collect(),
        kind,
        peak_frequency: peak,
        dt: s.dt,
        log_step: s.grid.log_step(),
    }
}

/// Chains ridge points into curves.
///
/// Greedy nearest-in-log-scale matching across consecutive times; a chain
/// breaks when no point lies within `max_jump_steps` grid steps, when a
/// time sample has no points at all, or when another chain wins the
/// contested point (ties in distance go to the larger transform
/// magnitude). Curves whose integrated scale frequency is shorter than
/// `min_cycles` cycles are discarded.
pub fn chain_ridges(
    set: &RidgePointSet,
    max_jump_steps: f64,
    min_cycles: f64,
) -> Vec<RidgeCurve> {
    let mut by_time: BTreeMap<usize, Vec<RidgePoint>> = BTreeMap::new();
    for p in &set.points {
        by_time.entry(p.time_index).or_default().push(*p);
    }
    let max_d = max_jump_steps * set.log_step;

    let mut active: Vec<Vec<RidgePoint>> = Vec::new();
    let mut finished: Vec<Vec<RidgePoint>> = Vec::new();
    let mut prev_time: Option<usize> = None;

    for (&t, pts) in &by_time {
        if prev_time.is_some_and(|p| t != p + 1) {
            finished.append(&mut active);
        }
        // All candidate (chain, point) pairs within reach, best first.
        let mut candidates: Vec<(f64, f64, usize, usize)> = Vec::new();
        for (ci, chain) in active.iter().enumerate() {
            let last_u = chain.last().unwrap().scale.ln();
            for (pi, p) in pts.iter().enumerate() {
                let d = (p.scale.ln() - last_u).abs();
                if d <= max_d {
                    candidates.push((d, -p.value.norm(), ci, pi));
                }
            }
        }
        candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut chain_extended = vec![false; active.len()];
        let mut point_taken = vec![false; pts.len()];
        let mut assignments: Vec<(usize, usize)> = Vec::new();
        for (_, _, ci, pi) in candidates {
            if !chain_extended[ci] && !point_taken[pi] {
                chain_extended[ci] = true;
                point_taken[pi] = true;
                assignments.push((ci, pi));
            }
        }
        for &(ci, pi) in &assignments {
            active[ci].push(pts[pi]);
        }
        // Close chains that found no continuation, keeping index order.
        let mut still_active = Vec::new();
        for (ci, chain) in active.drain(..).enumerate() {
            if chain_extended[ci] {
                still_active.push(chain);
            } else {
                finished.push(chain);
            }
        }
        active = still_active;
        for (pi, p) in pts.iter().enumerate() {
            if !point_taken[pi] {
                active.push(vec![*p]);
            }
        }
        prev_time = Some(t);
    }
    finished.append(&mut active);

    let mut curves: Vec<RidgeCurve> = finished
        .into_iter()
        .map(|points| {
            let length_cycles = points
                .iter()
                .map(|p| set.peak_frequency / p.scale * set.dt)
                .sum::<f64>()
                / (2.0 * std::f64::consts::PI);
            RidgeCurve {
                points,
                kind: set.kind,
                length_cycles,
            }
        })
        .filter(|c| c.length_cycles >= min_cycles)
        .collect();
    curves.sort_by(|a, b| {
        (a.start(), a.points[0].scale)
            .partial_cmp(&(b.start(), b.points[0].scale))
            .unwrap()
    });
    curves
}

/// Evaluates the transform and its moment fields along a ridge curve.
pub fn estimate_along_ridge(fields: &TransformFields, curve: &RidgeCurve) -> RidgeEstimate {
    let s = &fields.scalogram;
    let n_s = s.n_scales();
    let us: Vec<f64> = s.grid.scales().iter().map(|v| v.ln()).collect();
    let m = &fields.moments;

    let n = curve.len();
    let mut est = RidgeEstimate {
        kind: curve.kind,
        dt: s.dt,
        time_indices: Vec::with_capacity(n),
        scale: Vec::with_capacity(n),
        x_hat: Vec::with_capacity(n),
        a_hat: Vec::with_capacity(n),
        phi_hat: Vec::with_capacity(n),
        omega_hat: Vec::with_capacity(n),
        upsilon_hat: Vec::with_capacity(n),
        rho2_hat: Vec::with_capacity(n),
        valid: Vec::with_capacity(n),
        rho2_valid: Vec::with_capacity(n),
    };

    for p in &curve.points {
        let t = p.time_index;
        let u_star = p.scale.ln();
        let c = (0..n_s)
            .min_by(|&a, &b| {
                (us[a] - u_star)
                    .abs()
                    .partial_cmp(&(us[b] - u_star).abs())
                    .unwrap()
            })
            .unwrap()
            .clamp(1, n_s - 2);
        let nodes = [us[c - 1], us[c], us[c + 1]];
        let cols = [c - 1, c, c + 1];

        let interp_c = |field: &ndarray::Array2<Complex64>| -> Complex64 {
            let re = lagrange3(
                nodes,
                [
                    field[(t, cols[0])].re,
                    field[(t, cols[1])].re,
                    field[(t, cols[2])].re,
                ],
                u_star,
            );
            let im = lagrange3(
                nodes,
                [
                    field[(t, cols[0])].im,
                    field[(t, cols[1])].im,
                    field[(t, cols[2])].im,
                ],
                u_star,
            );
            Complex64::new(re, im)
        };
        let interp_r = |field: &ndarray::Array2<f64>| -> f64 {
            lagrange3(
                nodes,
                [field[(t, cols[0])], field[(t, cols[1])], field[(t, cols[2])]],
                u_star,
            )
        };

        let cells_ok = cols
            .iter()
            .all(|&j| s.edge_mask[(t, j)] && m.valid[(t, j)]);
        let rho2_ok = cells_ok && cols.iter().all(|&j| m.p2_valid[(t, j)]);

        let x_hat = interp_c(&s.values);
        let omega_hat = if cells_ok { interp_r(&m.omega) } else { f64::NAN };
        let upsilon_hat = if cells_ok { interp_r(&m.upsilon) } else { f64::NAN };
        let rho2_hat = if rho2_ok {
            interp_c(&m.p2)
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        };

        est.time_indices.push(t);
        est.scale.push(p.scale);
        est.x_hat.push(x_hat);
        est.a_hat.push(x_hat.norm());
        est.phi_hat.push(x_hat.arg());
        est.omega_hat.push(omega_hat);
        est.upsilon_hat.push(upsilon_hat);
        est.rho2_hat.push(rho2_hat);
        est.valid.push(cells_ok);
        est.rho2_valid.push(rho2_ok);
    }
    est
}
