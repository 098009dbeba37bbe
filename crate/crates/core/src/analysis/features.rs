use crate::delineator::BeatAnnotation;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use serde::{Deserialize, Serialize};

pub const FEATURE_COUNT: usize = 12;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "hr_bpm", "ao_ms", "ic_ms", "ac_ms", "pac_ms", "mo_ms", "amp_im", "amp_ao", "amp_ic", "amp_ac", "amp_pac", "amp_mo",
];

/// AO-AO gaps further than this factor from the record median (either way)
/// point to a missed or spurious beat and give no row.
const MAX_GAP_RATIO: f64 = 1.5;

/// One row per beat; `labels` is true for the breathless class and `groups`
/// identifies the source record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<[f64; FEATURE_COUNT]>,
    pub labels: Vec<bool>,
    pub groups: Vec<usize>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[c]).collect()
    }

    /// Stacks per-record matrices, renumbering groups by position.
    pub fn concat(parts: Vec<FeatureMatrix>) -> FeatureMatrix {
        let mut out = FeatureMatrix::default();
        for (g, p) in parts.into_iter().enumerate() {
            out.groups.extend(std::iter::repeat_n(g, p.rows.len()));
            out.rows.extend(p.rows);
            out.labels.extend(p.labels);
        }
        out
    }

    /// Per-column min-max scaling to [0, 1]; constant columns become 0.
    pub fn normalized(&self) -> FeatureMatrix {
        let mut out = self.clone();
        for c in 0..FEATURE_COUNT {
            let (lo, hi) = self.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r[c]), h.max(r[c])));
            let span = hi - lo;
            for r in &mut out.rows {
                r[c] = if span > 0.0 { ((r[c] - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
            }
        }
        out
    }

    /// Rows restricted to the given columns.
    pub fn select(&self, columns: &[usize]) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect()
    }
}

/// Raw (unnormalized) features of every complete beat that has a
/// following AO.
pub fn extract_features(beats: &[BeatAnnotation], scg: &SampledSignal, label: bool) -> Result<FeatureMatrix> {
    let fs = scg.fs;
    let x = &scg.samples;
    let complete: Vec<[usize; 6]> = beats
        .iter()
        .filter_map(|b| {
            let p = b.points();
            p.iter().all(Option::is_some).then(|| p.map(Option::unwrap))
        })
        .filter(|p| p[5] < x.len())
        .collect();
    let aos: Vec<usize> = beats.iter().filter_map(|b| b.ao).collect();
    if complete.len() < 2 || aos.len() < 2 {
        return Err(Error::Precondition(format!("need >= 2 complete beats, got {}", complete.len())));
    }
    let mut gaps: Vec<usize> = aos.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable();
    let median_gap = gaps[gaps.len() / 2] as f64;

    let mut out = FeatureMatrix::default();
    for p in &complete {
        let next = aos.partition_point(|&a| a <= p[1]);
        let Some(&next_ao) = aos.get(next) else { continue };
        let gap = (next_ao - p[1]) as f64;
        if gap > MAX_GAP_RATIO * median_gap || gap * MAX_GAP_RATIO < median_gap {
            continue;
        }
        let peak = x[p[0]..=p[5]].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            continue;
        }
        let mut row = [0.0; FEATURE_COUNT];
        row[0] = 60_000.0 / (gap / fs * 1000.0);
        for k in 1..6 {
            row[k] = (p[k] - p[0]) as f64 / fs * 1000.0;
        }
        for k in 0..6 {
            row[6 + k] = x[p[k]] / peak;
        }
        out.rows.push(row);
        out.labels.push(label);
        out.groups.push(0);
    }
    Ok(out)
}
