//! Record-to-report classification chain: delineate, extract features,
//! normalise, select, cross-validate and score.

use super::classifier::{ClassifierKind, ClassifierParams};
use super::cv::{cross_validate, CvReport, FoldUnit};
use super::features::{extract_features, FeatureMatrix, FEATURE_COUNT, FEATURE_NAMES};
use super::roc::{roc_curve, RocCurve};
use super::selection::{select_features, FeatureSelection};
use crate::delineator::{delineate, DelineatorConfig};
use crate::error::{Error, Result};
use crate::signal::{highpass_detrend, SampledSignal};
use serde::{Deserialize, Serialize};

/// Raw per-beat features of one record, labelled `breathless`.
pub fn record_features(
    scg: &SampledSignal,
    ppg: &SampledSignal,
    breathless: bool,
    cfg: &DelineatorConfig,
) -> Result<FeatureMatrix> {
    let beats = delineate(scg, ppg, cfg)?;
    let detrended = highpass_detrend(scg, cfg.detrend_cutoff_hz)?;
    extract_features(&beats, &detrended, breathless)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub kind: ClassifierKind,
    pub selection: FeatureSelection,
    pub k_folds: usize,
    pub unit: FoldUnit,
    pub seed: u64,
}

/// Mean and standard deviation of one normalised feature in each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub name: String,
    pub normal_mean: f64,
    pub normal_sd: f64,
    pub breathless_mean: f64,
    pub breathless_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classifier: String,
    pub features: Vec<String>,
    pub n_records: usize,
    pub n_beats: usize,
    pub n_breathless: usize,
    pub cv: CvReport,
    pub roc: RocCurve,
    pub summary: Vec<FeatureSummary>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

/// Cross-validated classification of per-record feature matrices.
pub fn classify_features(
    parts: Vec<FeatureMatrix>,
    settings: &CvSettings,
    params: &ClassifierParams,
) -> Result<ClassificationReport> {
    let n_records = parts.len();
    let fm = FeatureMatrix::concat(parts);
    let n_breathless = fm.labels.iter().filter(|&&l| l).count();
    if n_breathless == 0 || n_breathless == fm.len() {
        return Err(Error::Precondition("classification needs beats from both classes".into()));
    }
    let fm = fm.normalized();
    let columns = select_features(&fm, settings.selection)?;
    if columns.is_empty() {
        return Err(Error::Degenerate("feature selection kept no columns".into()));
    }
    let x = fm.select(&columns);
    let cv = cross_validate(&x, &fm.labels, &fm.groups, settings.k_folds, settings.unit, settings.kind, params, settings.seed)?;
    let roc = roc_curve(&cv.scores, &fm.labels)?;
    let summary = (0..FEATURE_COUNT)
        .map(|c| {
            let pick = |cls: bool| -> Vec<f64> {
                fm.rows.iter().zip(&fm.labels).filter(|(_, &l)| l == cls).map(|(r, _)| r[c]).collect()
            };
            let (normal_mean, normal_sd) = mean_sd(&pick(false));
            let (breathless_mean, breathless_sd) = mean_sd(&pick(true));
            FeatureSummary { name: FEATURE_NAMES[c].to_string(), normal_mean, normal_sd, breathless_mean, breathless_sd }
        })
        .collect();
    Ok(ClassificationReport {
        classifier: settings.kind.to_string(),
        features: columns.iter().map(|&c| FEATURE_NAMES[c].to_string()).collect(),
        n_records,
        n_beats: fm.len(),
        n_breathless,
        cv,
        roc,
        summary,
    })
}
