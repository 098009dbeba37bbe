//! On-disk record, annotation and ground-truth formats.
//!
//! Records are CSV with header `t,ppg,scg[,ecg]` (time in seconds, uniform
//! step). Annotations and ground truth are JSON.

use crate::delineator::BeatAnnotation;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::synth::GroundTruth;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Largest allowed deviation of any time step from the mean step, seconds.
pub const MAX_STEP_DEVIATION_S: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RecordFile {
    pub fs: f64,
    pub t0: f64,
    pub ppg: SampledSignal,
    pub scg: SampledSignal,
    pub ecg: Option<SampledSignal>,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Snaps a derived rate onto the nearest integer when it is that close.
fn clean_rate(fs: f64) -> f64 {
    if (fs - fs.round()).abs() < 1e-6 * fs {
        fs.round()
    } else {
        fs
    }
}

pub fn parse_record(text: &str) -> Result<RecordFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse("empty record file".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| names.iter().position(|&n| n == name);
    let (Some(ti), Some(pi), Some(si)) = (col("t"), col("ppg"), col("scg")) else {
        return Err(parse_err(hline, format!("header must contain t, ppg and scg columns, got '{header}'")));
    };
    let ei = col("ecg");
    if let Some(extra) = names.iter().find(|n| !["t", "ppg", "scg", "ecg"].contains(n)) {
        return Err(parse_err(hline, format!("unknown column '{extra}'")));
    }

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut row_lines = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(parse_err(ln, format!("expected {} fields, found {}", names.len(), fields.len())));
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f.trim().parse().map_err(|_| parse_err(ln, format!("invalid number '{}'", f.trim())))?;
            if !v.is_finite() {
                return Err(parse_err(ln, "non-finite value"));
            }
            cols[c].push(v);
        }
        row_lines.push(ln);
        let t = &cols[ti];
        if t.len() >= 2 && t[t.len() - 1] <= t[t.len() - 2] {
            return Err(parse_err(ln, "time column is not strictly increasing"));
        }
    }
    let t = &cols[ti];
    if t.len() < 2 {
        return Err(Error::Parse("record needs at least two samples".into()));
    }
    let step = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    for (k, w) in t.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() >= MAX_STEP_DEVIATION_S {
            return Err(parse_err(row_lines[k + 1], "non-uniform time step"));
        }
    }
    let fs = clean_rate(1.0 / step);
    let sig = |c: usize, label: &str| SampledSignal::new(cols[c].clone(), fs, label);
    Ok(RecordFile {
        fs,
        t0: t[0],
        ppg: sig(pi, "ppg")?,
        scg: sig(si, "scg")?,
        ecg: ei.map(|e| sig(e, "ecg")).transpose()?,
    })
}

pub fn write_record(ppg: &SampledSignal, scg: &SampledSignal, ecg: Option<&SampledSignal>) -> Result<String> {
    if ppg.len() != scg.len() || ppg.fs != scg.fs || ecg.is_some_and(|e| e.len() != scg.len() || e.fs != scg.fs) {
        return Err(Error::Precondition("channels must share length and sampling rate".into()));
    }
    let mut out = String::with_capacity(scg.len() * 48);
    out.push_str(if ecg.is_some() { "t,ppg,scg,ecg\n" } else { "t,ppg,scg\n" });
    for i in 0..scg.len() {
        let t = i as f64 / scg.fs;
        write!(out, "{t},{},{}", ppg.samples[i], scg.samples[i]).expect("string write");
        if let Some(e) = ecg {
            write!(out, ",{}", e.samples[i]).expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationMeta {
    pub tool_version: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub fs: f64,
    pub beats: Vec<BeatAnnotation>,
    pub meta: AnnotationMeta,
}

impl AnnotationFile {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and checks ordering; with `n_samples` also checks index range.
    pub fn from_json(text: &str, n_samples: Option<usize>) -> Result<Self> {
        let a: AnnotationFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("annotation JSON: {e}")))?;
        if !(a.fs > 0.0) {
            return Err(Error::Parse("annotation fs must be > 0".into()));
        }
        for (i, b) in a.beats.iter().enumerate() {
            if !b.is_ordered() {
                return Err(Error::Parse(format!("beat {i}: fiducials out of order")));
            }
            if let (Some(n), Some(last)) = (n_samples, b.last()) {
                if last >= n {
                    return Err(Error::Parse(format!("beat {i}: index {last} beyond record length {n}")));
                }
            }
        }
        Ok(a)
    }
}

pub fn truth_to_json(truth: &GroundTruth) -> Result<String> {
    let mut s = serde_json::to_string_pretty(truth).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn truth_from_json(text: &str) -> Result<GroundTruth> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("ground-truth JSON: {e}")))
}
