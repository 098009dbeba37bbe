use crate::delineator::BeatAnnotation;
use crate::error::{Error, Result};
use crate::synth::GroundTruth;
use serde::{Deserialize, Serialize};

/// True positive, false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl std::ops::Add for MatchCounts {
    type Output = MatchCounts;
    fn add(self, o: MatchCounts) -> MatchCounts {
        MatchCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_ }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    #[serde(flatten)]
    pub counts: MatchCounts,
    pub se: Option<f64>,
    pub pp: Option<f64>,
    pub acc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn detection_metrics(tp: usize, fp: usize, fn_: usize) -> DetectionReport {
    DetectionReport {
        counts: MatchCounts { tp, fp, fn_ },
        se: ratio(tp, tp + fn_),
        pp: ratio(tp, tp + fp),
        acc: ratio(tp, tp + fp + fn_),
    }
}

impl From<MatchCounts> for DetectionReport {
    fn from(c: MatchCounts) -> Self {
        detection_metrics(c.tp, c.fp, c.fn_)
    }
}

/// Greedy one-to-one matching: candidate pairs within tolerance are taken
/// in ascending distance, ties broken by earlier prediction then earlier truth.
pub fn match_detections(pred: &[usize], truth: &[usize], tol_ms: f64, fs: f64) -> Result<MatchCounts> {
    if !(tol_ms > 0.0 && tol_ms.is_finite()) {
        return Err(Error::Parameter(format!("tolerance must be > 0 ms, got {tol_ms}")));
    }
    let tol = tol_ms * fs / 1000.0;
    let mut sorted_truth: Vec<(usize, usize)> = truth.iter().copied().enumerate().map(|(i, t)| (t, i)).collect();
    sorted_truth.sort_unstable();
    let mut pairs = Vec::new();
    for (pi, &p) in pred.iter().enumerate() {
        let lo = sorted_truth.partition_point(|&(t, _)| (t as f64) < p as f64 - tol);
        for &(t, ti) in &sorted_truth[lo..] {
            let d = t.abs_diff(p);
            if d as f64 > tol {
                break;
            }
            pairs.push((d, pi, ti));
        }
    }
    pairs.sort_unstable();
    let mut pred_used = vec![false; pred.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut tp = 0;
    for (_, pi, ti) in pairs {
        if !pred_used[pi] && !truth_used[ti] {
            pred_used[pi] = true;
            truth_used[ti] = true;
            tp += 1;
        }
    }
    Ok(MatchCounts { tp, fp: pred.len() - tp, fn_: truth.len() - tp })
}

/// Per-fiducial counts (IM, AO, IC, AC, pAC, MO) of one annotated record.
pub fn evaluate_fiducials(beats: &[BeatAnnotation], truth: &GroundTruth, tol_ms: f64) -> Result<[MatchCounts; 6]> {
    let mut out = [MatchCounts::default(); 6];
    for (k, slot) in out.iter_mut().enumerate() {
        let pred: Vec<usize> = beats.iter().filter_map(|b| b.points()[k]).collect();
        *slot = match_detections(&pred, &truth.fiducial(k), tol_ms, truth.fs)?;
    }
    Ok(out)
}
