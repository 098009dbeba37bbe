use super::classifier::{predict, train_classifier, ClassifierKind, ClassifierParams};
use super::roc::ConfusionCounts;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Unit kept together when assigning folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldUnit {
    Beat,
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub acc: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldMetrics>,
    pub mean: FoldMetrics,
    pub sd: FoldMetrics,
    /// Out-of-fold decision score per input row.
    pub scores: Vec<f64>,
    pub pooled: ConfusionCounts,
}

/// Stratified fold index per row. With `FoldUnit::Record` whole groups are
/// assigned; each group takes the label of its first row.
pub fn fold_assignment(y: &[bool], groups: &[usize], k: usize, unit: FoldUnit, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be >= 2, got {k}")));
    }
    if groups.len() != y.len() {
        return Err(Error::Parameter("groups and labels differ in length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0usize; y.len()];
    match unit {
        FoldUnit::Beat => {
            for class in [false, true] {
                let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
                if idx.len() < k {
                    return Err(Error::Precondition(format!("class has {} rows, fewer than k = {k}", idx.len())));
                }
                idx.shuffle(&mut rng);
                for (pos, i) in idx.into_iter().enumerate() {
                    fold[i] = pos % k;
                }
            }
        }
        FoldUnit::Record => {
            let mut ids: Vec<usize> = groups.to_vec();
            ids.sort_unstable();
            ids.dedup();
            for class in [false, true] {
                let mut members: Vec<usize> =
                    ids.iter().copied().filter(|g| groups.iter().position(|x| x == g).is_some_and(|i| y[i] == class)).collect();
                if members.len() < k {
                    return Err(Error::Precondition(format!("class has {} records, fewer than k = {k}", members.len())));
                }
                members.shuffle(&mut rng);
                for (pos, g) in members.into_iter().enumerate() {
                    for i in (0..y.len()).filter(|&i| groups[i] == g) {
                        fold[i] = pos % k;
                    }
                }
            }
        }
    }
    Ok(fold)
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (m, sd)
}

#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[bool],
    groups: &[usize],
    k: usize,
    unit: FoldUnit,
    kind: ClassifierKind,
    params: &ClassifierParams,
    seed: u64,
) -> Result<CvReport> {
    if x.len() != y.len() {
        return Err(Error::Parameter("rows and labels differ in length".into()));
    }
    let fold = fold_assignment(y, groups, k, unit, seed)?;
    let results: Vec<(Vec<usize>, Vec<bool>, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| fold[i] == f);
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            let model = train_classifier(kind, &tx, &ty, params)?;
            let vx: Vec<Vec<f64>> = test.iter().map(|&i| x[i].clone()).collect();
            let (labels, scores) = predict(&model, &vx)?;
            Ok((test, labels, scores))
        })
        .collect::<Result<_>>()?;

    let mut scores = vec![0.0; x.len()];
    let mut pooled = ConfusionCounts::default();
    let mut folds = Vec::with_capacity(k);
    for (test, labels, s) in results {
        let truth: Vec<bool> = test.iter().map(|&i| y[i]).collect();
        let c = ConfusionCounts::from_predictions(&labels, &truth);
        pooled.tp += c.tp;
        pooled.tn += c.tn;
        pooled.fp += c.fp;
        pooled.fn_ += c.fn_;
        folds.push(FoldMetrics {
            acc: c.accuracy().unwrap_or(0.0),
            tpr: c.tpr().unwrap_or(0.0),
            fpr: c.fpr().unwrap_or(0.0),
        });
        for (&i, v) in test.iter().zip(s) {
            scores[i] = v;
        }
    }
    let col = |f: fn(&FoldMetrics) -> f64| mean_sd(&folds.iter().map(f).collect::<Vec<_>>());
    let (acc, tpr, fpr) = (col(|m| m.acc), col(|m| m.tpr), col(|m| m.fpr));
    Ok(CvReport {
        mean: FoldMetrics { acc: acc.0, tpr: tpr.0, fpr: fpr.0 },
        sd: FoldMetrics { acc: acc.1, tpr: tpr.1, fpr: fpr.1 },
        folds,
        scores,
        pooled,
    })
}
