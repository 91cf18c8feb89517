//! Trace CSV, summary JSON and plot emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::Scheme;
use super::monte_carlo::RunSummary;
use super::plot::{line_chart_svg, Series};
use super::trial::EpochRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epoch,t_s,scheme,trial,theta_true_deg,theta_pred1_deg,theta_pred2_deg,theta_est_deg,d_true_m,d_est_m,v_true_mps,v_est_mps,abs_delta,rate_bpshz,clamped,track_lost";

/// Trace CSV text. Floats use the shortest decimal form that round-trips;
/// booleans are written as 0/1; lines end in `\n`.
pub fn trace_csv(records: &[EpochRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.epoch,
            r.t_s,
            r.scheme,
            r.trial,
            r.theta_true_deg,
            r.theta_pred1_deg,
            r.theta_pred2_deg,
            r.theta_est_deg,
            r.d_true_m,
            r.d_est_m,
            r.v_true_mps,
            r.v_est_mps,
            r.abs_delta,
            r.rate_bpshz,
            u8::from(r.clamped),
            u8::from(r.track_lost),
        );
    }
    out
}

/// Parses text produced by [`trace_csv`].
pub fn parse_trace_csv(text: &str) -> Result<Vec<EpochRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::invalid(format!("unexpected CSV header {other:?}")));
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| parse_row(line).map_err(|e| Error::invalid(format!("row {}: {e}", i + 1))))
        .collect()
}

fn parse_row(line: &str) -> std::result::Result<EpochRecord, String> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 16 {
        return Err(format!("expected 16 fields, got {}", f.len()));
    }
    let float = |i: usize| f[i].parse::<f64>().map_err(|e| format!("field {i}: {e}"));
    let int = |i: usize| f[i].parse::<usize>().map_err(|e| format!("field {i}: {e}"));
    let flag = |i: usize| match f[i] {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("field {i}: bad flag '{other}'")),
    };
    Ok(EpochRecord {
        epoch: int(0)?,
        t_s: float(1)?,
        scheme: f[2].parse::<Scheme>().map_err(|e| e.to_string())?,
        trial: int(3)?,
        theta_true_deg: float(4)?,
        theta_pred1_deg: float(5)?,
        theta_pred2_deg: float(6)?,
        theta_est_deg: float(7)?,
        d_true_m: float(8)?,
        d_est_m: float(9)?,
        v_true_mps: float(10)?,
        v_est_mps: float(11)?,
        abs_delta: float(12)?,
        rate_bpshz: float(13)?,
        clamped: flag(14)?,
        track_lost: flag(15)?,
    })
}

pub fn summary_json(summary: &RunSummary) -> Result<String> {
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::invalid(format!("summary serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_summary_json(text: &str) -> Result<RunSummary> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad summary JSON: {e}")))
}

/// Where [`emit_outputs`] wrote things.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub trace_csv: PathBuf,
    pub summary_json: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `trace.csv`, `summary.json` and, with `plots`, the
/// `angle_error.svg`, `rate.svg` and `angle_track.svg` charts into `dir`.
pub fn emit_outputs(
    records: &[EpochRecord],
    summary: &RunSummary,
    dir: &Path,
    plots: bool,
) -> Result<Artifacts> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let trace = write(dir.join("trace.csv"), &trace_csv(records))?;
    let json = write(dir.join("summary.json"), &summary_json(summary)?)?;
    let mut charts = Vec::new();
    if plots {
        for (name, svg) in summary_charts(records, summary) {
            charts.push(write(dir.join(name), &svg)?);
        }
    }
    Ok(Artifacts {
        trace_csv: trace,
        summary_json: json,
        plots: charts,
    })
}

fn summary_charts(records: &[EpochRecord], summary: &RunSummary) -> Vec<(&'static str, String)> {
    let t = &summary.per_epoch.t_s;
    let mut err = Vec::new();
    let mut rate = Vec::new();
    for scheme in Scheme::ALL {
        if let Some(s) = summary.series(scheme) {
            err.push(Series::new(scheme.as_str(), t, &s.mean_abs_err_deg));
            rate.push(Series::new(scheme.as_str(), t, &s.mean_rate_bpshz));
        }
    }

    // Angle track of the first trial of each scheme against the truth.
    let mut track_data: Vec<(String, Vec<f64>, Vec<f64>)> = vec![(
        "truth".to_string(),
        t.clone(),
        summary.per_epoch.theta_true_deg.clone(),
    )];
    for scheme in Scheme::ALL {
        let first: Vec<&EpochRecord> = records
            .iter()
            .filter(|r| r.scheme == scheme && r.trial == 0)
            .collect();
        if !first.is_empty() {
            track_data.push((
                format!("{scheme} estimate"),
                first.iter().map(|r| r.t_s).collect(),
                first.iter().map(|r| r.theta_est_deg).collect(),
            ));
        }
    }
    let track: Vec<Series<'_>> = track_data
        .iter()
        .map(|(n, x, y)| Series::new(n, x, y))
        .collect();

    vec![
        (
            "angle_error.svg",
            line_chart_svg("Mean absolute angle error", "time (s)", "error (deg)", &err),
        ),
        (
            "rate.svg",
            line_chart_svg("Mean achievable rate", "time (s)", "rate (bit/s/Hz)", &rate),
        ),
        (
            "angle_track.svg",
            line_chart_svg("Angle tracking, trial 0", "time (s)", "angle (deg)", &track),
        ),
    ]
}
