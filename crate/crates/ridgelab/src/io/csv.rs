//! Signal CSV ingestion.
//!
//! Accepted layouts: a single value column, or `(time, value)` pairs whose
//! times must be uniformly spaced to a relative tolerance of 1e-6. An
//! optional header row (any line whose fields do not all parse as numbers)
//! is skipped. This parser handles untrusted input and must never panic;
//! it is exercised directly by a fuzz target.

use std::io::Read;
use std::path::Path;

use crate::analytic::RealSignal;
use crate::error::{Error, Result};

/// Relative tolerance on the spacing of an explicit time column.
pub const UNIFORM_SPACING_TOLERANCE: f64 = 1e-6;

/// Parses signal CSV text. `default_dt` applies when the file has a single
/// value column.
pub fn parse_signal_csv(text: &str, default_dt: f64) -> Result<RealSignal> {
    let mut times: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut n_columns: Option<usize> = None;
    let mut header_skipped = false;

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() > 2 {
            return Err(Error::Csv(format!(
                "line {}: expected 1 or 2 columns, found {}",
                line_no + 1,
                fields.len()
            )));
        }
        let parsed: Option<Vec<f64>> = fields
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let Some(numbers) = parsed else {
            // One non-numeric row is accepted as the header.
            if !header_skipped && values.is_empty() {
                header_skipped = true;
                continue;
            }
            return Err(Error::Csv(format!(
                "line {}: non-numeric field in {line:?}",
                line_no + 1
            )));
        };
        match n_columns {
            None => n_columns = Some(numbers.len()),
            Some(c) if c != numbers.len() => {
                return Err(Error::Csv(format!(
                    "line {}: expected {c} columns, found {}",
                    line_no + 1,
                    numbers.len()
                )));
            }
            _ => {}
        }
        match numbers.as_slice() {
            [v] => values.push(*v),
            [t, v] => {
                times.push(*t);
                values.push(*v);
            }
            _ => unreachable!("column count checked above"),
        }
    }

    if values.len() < 16 {
        return Err(Error::Csv(format!(
            "signal must have at least 16 samples, got {}",
            values.len()
        )));
    }

    let dt = if times.is_empty() {
        if !(default_dt.is_finite() && default_dt > 0.0) {
            return Err(Error::Csv(format!(
                "invalid default sample interval {default_dt}"
            )));
        }
        default_dt
    } else {
        uniform_spacing(&times)?
    };
    RealSignal::new(values, dt)
}

/// Checks uniform spacing and returns the common interval.
fn uniform_spacing(times: &[f64]) -> Result<f64> {
    let n = times.len();
    debug_assert!(n >= 2);
    let dt = (times[n - 1] - times[0]) / (n as f64 - 1.0);
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonUniformSampling(format!(
            "time column spans {} to {} over {n} samples",
            times[0],
            times[n - 1]
        )));
    }
    for (k, pair) in times.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if (step - dt).abs() > UNIFORM_SPACING_TOLERANCE * dt.abs() {
            return Err(Error::NonUniformSampling(format!(
                "step {step} at row {} deviates from the mean interval {dt}",
                k + 1
            )));
        }
    }
    Ok(dt)
}

/// Reads a signal CSV from disk.
pub fn read_signal_csv(path: &Path, default_dt: f64) -> Result<RealSignal> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_signal_csv(&text, default_dt)
}
