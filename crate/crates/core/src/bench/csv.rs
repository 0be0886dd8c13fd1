//! Trace and summary CSV files.
//!
//! Traces: `sample,label,misalignment_db`, one row per kept sample, labels in
//! panel order. Summary (written next to the trace file as
//! `<path>.summary.csv`): `label,segment,time_to_minus15db,steady_state_db,mults_per_step`
//! with 1-based segments; an aborted run gets an extra row whose segment
//! column reads `failed`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::run::{MisalignmentTrace, RunSummary};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "sample,label,misalignment_db";
pub const SUMMARY_HEADER: &str = "label,segment,time_to_minus15db,steady_state_db,mults_per_step";

/// `<path>.summary.csv`
pub fn summary_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".summary.csv");
    PathBuf::from(s)
}

/// Formats `v` with six significant digits in the style of C's `%g`.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes the decimated traces to `path` and the summary beside it. Returns
/// the summary path.
pub fn write_traces_csv(
    traces: &[MisalignmentTrace],
    summary: &RunSummary,
    path: &Path,
    decimation: usize,
) -> Result<PathBuf> {
    if traces.is_empty() {
        return Err(Error::invalid("no traces to write"));
    }
    if decimation == 0 {
        return Err(Error::invalid("decimation must be positive"));
    }

    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for trace in traces {
        for &(n, v) in trace.samples.iter().filter(|(n, _)| n % decimation == 0) {
            let _ = writeln!(out, "{n},{},{}", trace.label, format_sig6(v));
        }
    }
    write_file(path, &out)?;

    let mut sum = String::new();
    sum.push_str(SUMMARY_HEADER);
    sum.push('\n');
    for run in &summary.runs {
        for seg in &run.segments {
            let ttt = seg.time_to_threshold.map(|t| t.to_string()).unwrap_or_default();
            let ss = seg.steady_state_db.map(format_sig6).unwrap_or_default();
            let _ = writeln!(sum, "{},{},{ttt},{ss},{}", run.label, seg.segment + 1, run.mults_per_step);
        }
        if run.failure.is_some() {
            let _ = writeln!(sum, "{},failed,,,{}", run.label, run.mults_per_step);
        }
    }
    let spath = summary_path(path);
    write_file(&spath, &sum)?;
    Ok(spath)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a trace CSV back into per-label traces, in first-appearance order.
pub fn read_traces_csv(path: &Path) -> Result<Vec<MisalignmentTrace>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::invalid(format!("{}: missing trace header", path.display())));
    }
    let mut traces: Vec<MisalignmentTrace> = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || Error::invalid(format!("{}: malformed row {}", path.display(), i + 2));
        let mut parts = line.splitn(3, ',');
        let n: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let label = parts.next().ok_or_else(bad)?;
        let v: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        match traces.iter_mut().find(|t| t.label == label) {
            Some(t) => t.samples.push((n, v)),
            None => traces.push(MisalignmentTrace {
                label: label.to_string(),
                samples: vec![(n, v)],
            }),
        }
    }
    Ok(traces)
}
