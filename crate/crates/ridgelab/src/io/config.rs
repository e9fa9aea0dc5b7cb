//! JSON configuration files for the analysis pipeline.
//!
//! A config file may set any subset of the pipeline parameters; values the
//! file leaves out fall back to command-line flags and then to defaults
//! (flags always win over the file). The parser handles untrusted input
//! and must never panic; it is exercised directly by a fuzz target.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pipeline::PipelineParams;
use crate::ridge::RidgeKind;

/// Partial pipeline configuration, as read from `--config <json>`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub freq_min: Option<f64>,
    pub freq_max: Option<f64>,
    pub voices_per_octave: Option<u32>,
    pub ridge_kind: Option<RidgeKind>,
    pub min_cycles: Option<f64>,
    pub edge_alpha: Option<f64>,
    pub truncation: Option<usize>,
    pub max_jump: Option<f64>,
}

/// Parses a JSON config document.
pub fn parse_config_json(text: &str) -> Result<ConfigFile> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

impl ConfigFile {
    /// Fills unset fields of `params` from this file (so explicit flags,
    /// already merged into `params`, keep precedence when `flag_set`
    /// reports them).
    pub fn apply(&self, params: &mut PipelineParams, flag_set: &FlagSet) {
        macro_rules! take {
            ($field:ident, $flag:ident) => {
                if let Some(v) = self.$field {
                    if !flag_set.$flag {
                        params.$field = v;
                    }
                }
            };
        }
        take!(beta, beta);
        take!(gamma, gamma);
        take!(freq_min, freq_min);
        take!(freq_max, freq_max);
        take!(voices_per_octave, voices_per_octave);
        take!(ridge_kind, ridge_kind);
        take!(edge_alpha, edge_alpha);
        take!(truncation, truncation);
        take!(max_jump, max_jump);
        if let Some(v) = self.min_cycles {
            if !flag_set.min_cycles {
                params.min_cycles = Some(v);
            }
        }
    }
}

/// Which parameters were set explicitly on the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlagSet {
    pub beta: bool,
    pub gamma: bool,
    pub freq_min: bool,
    pub freq_max: bool,
    pub voices_per_octave: bool,
    pub ridge_kind: bool,
    pub min_cycles: bool,
    pub edge_alpha: bool,
    pub truncation: bool,
    pub max_jump: bool,
}
