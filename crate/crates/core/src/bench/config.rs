//! Experiment configuration file.
//!
//! The file is JSON. Filter parameters omitted from a panel entry take the
//! defaults `M = 8`, `step_size = 0.01`, `regularization = 0.01`,
//! `rho = q = 0.01`, `regressor_mode = "efficient"`. A missing `snr_db`
//! means a noiseless run.
//!
//! ```json
//! {
//!   "scenario": {
//!     "filter_length": 1024,
//!     "total_samples": 60000,
//!     "seed": 1,
//!     "snr_db": 30.0,
//!     "excitation": { "kind": "ar1", "pole": 0.8 },
//!     "schedule": [
//!       { "at": 0, "clusters": [[257, 288]] },
//!       { "at": 30000, "clusters": [[257, 288], [769, 800]] }
//!     ]
//!   },
//!   "panel": [
//!     { "label": "PAPA", "variant": "papa" },
//!     { "label": "BS-PAPA", "variant": "bs-papa", "group_size": 32 }
//!   ],
//!   "trace_decimation": 10
//! }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterConfig, RegressorMode, Variant};
use crate::signal::{make_block_sparse_ir, Cluster, EchoScenario, Excitation, PathSegment};

fn default_decimation() -> usize {
    10
}

fn default_tuning() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub scenario: ScenarioFile,
    pub panel: Vec<PanelEntryFile>,
    #[serde(default = "default_decimation")]
    pub trace_decimation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub filter_length: usize,
    pub total_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub snr_db: Option<f64>,
    pub excitation: ExcitationFile,
    pub schedule: Vec<ScheduleEntryFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExcitationFile {
    White,
    Ar1 { pole: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntryFile {
    /// First sample (0-based) at which this response is active.
    pub at: usize,
    /// 1-based inclusive tap ranges.
    pub clusters: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelEntryFile {
    pub label: String,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_order: Option<usize>,
    #[serde(default = "default_tuning")]
    pub step_size: f64,
    #[serde(default = "default_tuning")]
    pub regularization: f64,
    #[serde(default = "default_tuning")]
    pub rho: f64,
    #[serde(default = "default_tuning")]
    pub q: f64,
    #[serde(default)]
    pub regressor_mode: RegressorMode,
}

impl PanelEntryFile {
    pub fn new(label: impl Into<String>, variant: Variant) -> Self {
        Self {
            label: label.into(),
            variant,
            group_size: None,
            projection_order: None,
            step_size: 0.01,
            regularization: 0.01,
            rho: 0.01,
            q: 0.01,
            regressor_mode: RegressorMode::Efficient,
        }
    }

    pub fn with_group_size(mut self, p: usize) -> Self {
        self.group_size = Some(p);
        self
    }
}

/// Command-line overrides applied on top of a file or preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub total_samples: Option<usize>,
    pub switch_at: Option<usize>,
    pub snr_db: Option<f64>,
    pub pole: Option<f64>,
    pub step_size: Option<f64>,
    pub regularization: Option<f64>,
    pub rho: Option<f64>,
    pub q: Option<f64>,
    pub projection_order: Option<usize>,
    pub trace_decimation: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, file: &mut ExperimentFile) -> Result<()> {
        let sc = &mut file.scenario;
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if let Some(n) = self.total_samples {
            sc.total_samples = n;
        }
        if let Some(at) = self.switch_at {
            match sc.schedule.get_mut(1) {
                Some(entry) => entry.at = at,
                None => {
                    return Err(Error::config(
                        "scenario.schedule",
                        "switch override needs a schedule with a second entry",
                    ))
                }
            }
        }
        if let Some(snr) = self.snr_db {
            sc.snr_db = Some(snr);
        }
        if let Some(pole) = self.pole {
            sc.excitation = ExcitationFile::Ar1 { pole };
        }
        for entry in &mut file.panel {
            if let Some(mu) = self.step_size {
                entry.step_size = mu;
            }
            if let Some(delta) = self.regularization {
                entry.regularization = delta;
            }
            if let Some(rho) = self.rho {
                entry.rho = rho;
            }
            if let Some(q) = self.q {
                entry.q = q;
            }
            if let Some(m) = self.projection_order {
                if !matches!(entry.variant, Variant::Pnlms | Variant::BsPnlms) {
                    entry.projection_order = Some(m);
                }
            }
        }
        if let Some(k) = self.trace_decimation {
            file.trace_decimation = k;
        }
        if let Some(out) = &self.output {
            file.output = Some(out.clone());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelEntry {
    pub label: String,
    pub config: FilterConfig,
}

/// Validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: EchoScenario,
    pub panel: Vec<PanelEntry>,
    pub trace_decimation: usize,
    pub output_path: Option<PathBuf>,
}

impl ExperimentFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("experiment file serializes")
    }

    /// Validates every field, reporting the first failure with its path.
    pub fn build(&self) -> Result<ExperimentConfig> {
        let sc = &self.scenario;
        let l = sc.filter_length;
        if l == 0 {
            return Err(Error::config("scenario.filter_length", "must be positive"));
        }
        if sc.total_samples == 0 {
            return Err(Error::config("scenario.total_samples", "must be positive"));
        }
        if self.trace_decimation == 0 {
            return Err(Error::config("trace_decimation", "must be positive"));
        }
        if sc.schedule.is_empty() {
            return Err(Error::config("scenario.schedule", "needs at least one entry"));
        }
        let excitation = match sc.excitation {
            ExcitationFile::White => Excitation::White,
            ExcitationFile::Ar1 { pole } => Excitation::Ar1 { pole },
        };
        excitation
            .validate()
            .map_err(|e| Error::config("scenario.excitation.pole", e.to_string()))?;

        let ir_seed = sc.seed;
        let mut schedule = Vec::with_capacity(sc.schedule.len());
        for (i, entry) in sc.schedule.iter().enumerate() {
            let path = format!("scenario.schedule[{i}]");
            if i == 0 && entry.at != 0 {
                return Err(Error::config(format!("{path}.at"), "first entry must start at 0"));
            }
            if i > 0 && entry.at <= sc.schedule[i - 1].at {
                return Err(Error::config(format!("{path}.at"), "switch samples must increase"));
            }
            if entry.at >= sc.total_samples {
                return Err(Error::config(format!("{path}.at"), "switch lies beyond the run"));
            }
            if entry.clusters.is_empty() {
                return Err(Error::config(format!("{path}.clusters"), "needs at least one cluster"));
            }
            let clusters: Vec<Cluster> = entry.clusters.iter().map(|&[s, e]| Cluster::new(s, e)).collect();
            let response = make_block_sparse_ir(l, &clusters, ir_seed)
                .map_err(|e| Error::config(format!("{path}.clusters"), e.to_string()))?;
            schedule.push(PathSegment {
                start: entry.at,
                response,
            });
        }
        let scenario = EchoScenario::new(schedule, excitation, sc.snr_db, sc.seed, sc.total_samples)
            .map_err(|e| Error::config("scenario", e.to_string()))?;

        if self.panel.is_empty() {
            return Err(Error::config("panel", "needs at least one entry"));
        }
        let mut seen = HashSet::new();
        let mut panel = Vec::with_capacity(self.panel.len());
        for (i, entry) in self.panel.iter().enumerate() {
            let path = format!("panel[{i}]");
            if entry.label.is_empty() {
                return Err(Error::config(format!("{path}.label"), "must be nonempty"));
            }
            if entry.label.contains([',', '"', '\n', '\r']) {
                return Err(Error::config(
                    format!("{path}.label"),
                    "must not contain commas, quotes or newlines",
                ));
            }
            if !seen.insert(entry.label.as_str()) {
                return Err(Error::config(
                    format!("{path}.label"),
                    format!("duplicate label {:?}", entry.label),
                ));
            }
            let mut builder = FilterConfig::builder(entry.variant, l)
                .step_size(entry.step_size)
                .regularization(entry.regularization)
                .guards(entry.rho, entry.q)
                .regressor_mode(entry.regressor_mode);
            if let Some(p) = entry.group_size {
                builder = builder.group_size(p);
            }
            if let Some(m) = entry.projection_order {
                builder = builder.projection_order(m);
            }
            let config = builder.build().map_err(|e| Error::config(path, e.to_string()))?;
            panel.push(PanelEntry {
                label: entry.label.clone(),
                config,
            });
        }

        Ok(ExperimentConfig {
            scenario,
            panel,
            trace_decimation: self.trace_decimation,
            output_path: self.output.clone(),
        })
    }
}
