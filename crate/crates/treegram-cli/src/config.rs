//! Run configuration: serializable to a TOML file, overridable by flags.

use serde::{Deserialize, Serialize};

use treegram::tgram::{DepthMode, ExtractionConfig};

/// Every knob of a run. A value of 0 means "unbounded" for the size limits
/// and "off" for the beam settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub prehead_order: u8,
    pub max_depth: u32,
    pub max_branching: u32,
    pub max_open: u32,
    pub max_words: u32,
    pub min_freq: u64,
    pub markov: bool,
    pub depth_mode: String,
    pub unknown_threshold: u64,
    pub beam_width: usize,
    pub beam_margin: f64,
    pub jobs: usize,
    pub fallback_rightbranch: bool,
    pub treebank: Option<String>,
    pub model: Option<String>,
    pub input: Option<String>,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            prehead_order: 1,
            max_depth: 4,
            max_branching: 0,
            max_open: 4,
            max_words: 3,
            min_freq: 1,
            markov: false,
            depth_mode: "flat".into(),
            unknown_threshold: 5,
            beam_width: 0,
            beam_margin: 0.0,
            jobs: 1,
            fallback_rightbranch: false,
            treebank: None,
            model: None,
            input: None,
            output: None,
        }
    }
}

fn bound(v: u32) -> Option<u32> {
    if v == 0 {
        None
    } else {
        Some(v)
    }
}

impl RunConfig {
    pub fn extraction(&self) -> Result<ExtractionConfig, String> {
        let depth_mode = match self.depth_mode.as_str() {
            "flat" => DepthMode::Flat,
            "spine" => DepthMode::Spine,
            other => return Err(format!("unknown depth_mode {other:?} (flat or spine)")),
        };
        Ok(ExtractionConfig {
            max_depth: bound(self.max_depth),
            max_branching: bound(self.max_branching),
            max_open: bound(self.max_open),
            max_words: bound(self.max_words),
            min_freq: self.min_freq.max(1),
            depth_mode,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
