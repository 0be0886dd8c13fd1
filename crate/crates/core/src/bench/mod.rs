//! Experiment harness: JSON-configured scenarios and algorithm panels,
//! per-sample misalignment traces, and CSV output.

pub mod config;
pub mod csv;
pub mod presets;
pub mod run;

pub use config::{ExperimentConfig, ExperimentFile, Overrides, PanelEntry};
pub use csv::{read_traces_csv, summary_path, write_traces_csv};
pub use presets::Preset;
pub use run::{run_experiment, ExperimentResult, MisalignmentTrace, RunRecord, RunSummary, SegmentSummary};

/// Convergence threshold reported in the summary.
pub const THRESHOLD_DB: f64 = -15.0;
