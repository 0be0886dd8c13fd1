//! Streaming experiment runner.

use crate::bench::config::{ExperimentConfig, PanelEntry};
use crate::bench::THRESHOLD_DB;
use crate::error::Result;
use crate::filter::AdaptiveFilter;
use crate::signal::{misalignment_db, EchoScenario, SynthesizedScenario};

/// Per-sample normalized misalignment of one panel entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MisalignmentTrace {
    pub label: String,
    pub samples: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    /// Zero-based index into the echo-path schedule.
    pub segment: usize,
    /// Samples from the segment start until misalignment first drops to the
    /// threshold; `None` if it never does within the segment.
    pub time_to_threshold: Option<usize>,
    /// Mean misalignment over the final 10% of the segment.
    pub steady_state_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub segments: Vec<SegmentSummary>,
    pub mults_per_step: u64,
    /// Set when the run aborted, e.g. on a singular projection system.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn segment(&self, index: usize) -> Option<&SegmentSummary> {
        self.segments.get(index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub threshold_db: f64,
    pub runs: Vec<RunRecord>,
}

impl RunSummary {
    pub fn get(&self, label: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.failure.is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub traces: Vec<MisalignmentTrace>,
    pub summary: RunSummary,
}

impl ExperimentResult {
    pub fn trace(&self, label: &str) -> Option<&MisalignmentTrace> {
        self.traces.iter().find(|t| t.label == label)
    }
}

/// Runs every panel entry over the same synthesized scenario. Entries share
/// no state; a failing entry is recorded and the rest continue.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let synth = config.scenario.synthesize()?;
    let mut traces = Vec::with_capacity(config.panel.len());
    let mut runs = Vec::with_capacity(config.panel.len());
    for entry in &config.panel {
        let (trace, record) = run_entry(&config.scenario, &synth, entry)?;
        traces.push(trace);
        runs.push(record);
    }
    Ok(ExperimentResult {
        traces,
        summary: RunSummary {
            threshold_db: THRESHOLD_DB,
            runs,
        },
    })
}

fn run_entry(
    scenario: &EchoScenario,
    synth: &SynthesizedScenario,
    entry: &PanelEntry,
) -> Result<(MisalignmentTrace, RunRecord)> {
    let mut filter = AdaptiveFilter::new(entry.config.clone());
    let mut samples = Vec::with_capacity(scenario.total_samples());
    let mut failure = None;

    let bounds = scenario.segment_bounds();
    let mut segment = 0;
    for (n, (&x, &d)) in synth.input.iter().zip(&synth.desired).enumerate() {
        if let Err(e) = filter.process(x, d) {
            failure = Some(format!("sample {n}: {e}"));
            break;
        }
        while n >= bounds[segment].1 {
            segment += 1;
        }
        let truth = scenario.schedule()[segment].response.taps();
        samples.push((n, misalignment_db(truth, filter.weights())?));
    }

    let segments = bounds
        .iter()
        .enumerate()
        .map(|(k, &(start, end))| summarize_segment(k, start, end, &samples))
        .collect();

    Ok((
        MisalignmentTrace {
            label: entry.label.clone(),
            samples,
        },
        RunRecord {
            label: entry.label.clone(),
            segments,
            mults_per_step: entry.config.regressor_multiplications(),
            failure,
        },
    ))
}

fn summarize_segment(segment: usize, start: usize, end: usize, samples: &[(usize, f64)]) -> SegmentSummary {
    let available_end = end.min(samples.len());
    let values = if start < available_end {
        &samples[start..available_end]
    } else {
        &[][..]
    };
    let time_to_threshold = values
        .iter()
        .position(|&(_, v)| v <= THRESHOLD_DB);

    let tail_len = ((end - start) / 10).max(1);
    let steady_state_db = if available_end == end && end - start >= tail_len {
        let tail = &samples[end - tail_len..end];
        Some(tail.iter().map(|&(_, v)| v).sum::<f64>() / tail.len() as f64)
    } else {
        None
    };

    SegmentSummary {
        segment,
        time_to_threshold,
        steady_state_db,
    }
}
