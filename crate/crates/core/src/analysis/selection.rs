use super::features::{FeatureMatrix, FEATURE_COUNT};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Fixed feature subset (0-based columns of f1, f2, f5, f6, f7, f9, f10, f11).
pub const SELECTED_FEATURES: [usize; 8] = [0, 1, 4, 5, 6, 8, 9, 10];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureSelection {
    All,
    Fixed,
    TTest { alpha: f64 },
}

/// Welch's unequal-variance t statistic and two-sided p-value; `None` when
/// both samples have zero variance.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 <= 0.0 {
        return None;
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((t, (2.0 * dist.sf(t.abs())).min(1.0)))
}

pub fn select_features(x: &FeatureMatrix, selection: FeatureSelection) -> Result<Vec<usize>> {
    match selection {
        FeatureSelection::All => Ok((0..FEATURE_COUNT).collect()),
        FeatureSelection::Fixed => Ok(SELECTED_FEATURES.to_vec()),
        FeatureSelection::TTest { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            let pos = x.labels.iter().filter(|&&l| l).count();
            let neg = x.labels.len() - pos;
            if pos < 2 || neg < 2 {
                return Err(Error::Precondition("t-test needs >= 2 rows per class".into()));
            }
            let mut chosen = Vec::new();
            for c in 0..FEATURE_COUNT {
                let (a, b): (Vec<(f64, bool)>, Vec<(f64, bool)>) =
                    x.rows.iter().map(|r| r[c]).zip(x.labels.iter().copied()).partition(|&(_, l)| l);
                let a: Vec<f64> = a.into_iter().map(|(v, _)| v).collect();
                let b: Vec<f64> = b.into_iter().map(|(v, _)| v).collect();
                match welch_t_test(&a, &b) {
                    Some((_, p)) if p < alpha => chosen.push(c),
                    Some(_) => {}
                    None => log::warn!("feature column {c} has zero within-class variance; test skipped"),
                }
            }
            Ok(chosen)
        }
    }
}
