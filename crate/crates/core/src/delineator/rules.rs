//! Amplitude-histogram decision rules.
//!
//! Around each anchor peak `pk` the signal is split into a block before it
//! (`blockA`, default 100 ms) and one after it (`blockB`, default 200 ms).
//! In each block the local peaks are binned by amplitude relative to
//! `x[pk]` into `(80,100]`, `(60,80]`, ... `(0,20]` percent. The first
//! non-empty bin wins and its member nearest to `pk` becomes `P1`; the
//! minimum of `x` between `P1` and `pk` is the block's fiducial. Applied
//! with `pk = pAC` this yields (AC, MO); with `pk = AO`, (IM, IC).

use crate::signal::{extrema_indices, ExtremaKind, SampledSignal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRuleConfig {
    pub block_a_ms: f64,
    pub block_b_ms: f64,
    /// Number of equal-width amplitude bins covering `(0, 100]` percent.
    pub n_bins: usize,
}

impl Default for DecisionRuleConfig {
    fn default() -> Self {
        Self { block_a_ms: 100.0, block_b_ms: 200.0, n_bins: 5 }
    }
}

impl DecisionRuleConfig {
    /// Bin edges as `(lower, upper]` percentages, highest bin first.
    pub fn bin_edges(&self) -> Vec<(f64, f64)> {
        let width = 100.0 / self.n_bins as f64;
        (0..self.n_bins)
            .map(|j| (100.0 - (j + 1) as f64 * width, 100.0 - j as f64 * width))
            .collect()
    }
}

/// Minima found on either side of one anchor peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulePoints {
    pub pk: usize,
    /// Minimum in the block before `pk`.
    pub m1: usize,
    /// Minimum in the block after `pk`.
    pub m2: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleOutput {
    pub points: Vec<RulePoints>,
    /// Anchors whose blocks would leave the record.
    pub skipped: Vec<usize>,
}

/// Anchor peak with explicit inclusive block limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpan {
    pub pk: usize,
    pub start: usize,
    pub end: usize,
}

pub fn decision_rules(x: &SampledSignal, pks: &[usize], cfg: &DecisionRuleConfig) -> RuleOutput {
    let a = x.ms_to_samples(cfg.block_a_ms);
    let b = x.ms_to_samples(cfg.block_b_ms);
    let n = x.len();
    let mut out = RuleOutput::default();
    for &pk in pks {
        if pk < a || pk + b >= n {
            log::debug!("decision rules: anchor {pk} too close to the record edge, skipped");
            out.skipped.push(pk);
            continue;
        }
        out.points.push(rules_for_span(&x.samples, BlockSpan { pk, start: pk - a, end: pk + b }, cfg));
    }
    out
}

/// Decision rules with caller-provided block limits (used when blocks must
/// stop at masked regions).
pub fn decision_rules_spans(x: &[f64], spans: &[BlockSpan], cfg: &DecisionRuleConfig) -> Vec<RulePoints> {
    spans.iter().map(|&s| rules_for_span(x, s, cfg)).collect()
}

fn rules_for_span(x: &[f64], span: BlockSpan, cfg: &DecisionRuleConfig) -> RulePoints {
    let BlockSpan { pk, start, end } = span;
    debug_assert!(start <= pk && pk <= end && end < x.len());
    let edges = cfg.bin_edges();
    let reference = x[pk];

    let block_a = &x[start..=pk];
    let peaks_a: Vec<usize> = extrema_indices(block_a, ExtremaKind::Maxima).into_iter().map(|i| i + start).collect();
    let p1_a = first_bin_nearest(x, &peaks_a, reference, &edges, pk).unwrap_or(start);
    let m1 = argmin(x, p1_a, pk);

    let block_b = &x[pk..=end];
    let peaks_b: Vec<usize> = extrema_indices(block_b, ExtremaKind::Maxima).into_iter().map(|i| i + pk).collect();
    let p1_b = first_bin_nearest(x, &peaks_b, reference, &edges, pk).unwrap_or(end);
    let m2 = argmin(x, pk, p1_b);

    RulePoints { pk, m1, m2 }
}

fn first_bin_nearest(x: &[f64], peaks: &[usize], reference: f64, edges: &[(f64, f64)], pk: usize) -> Option<usize> {
    for &(lo, hi) in edges {
        let nearest = peaks
            .iter()
            .copied()
            .filter(|&i| {
                let pct = 100.0 * x[i] / reference;
                pct > lo && pct <= hi
            })
            .min_by_key(|&i| i.abs_diff(pk));
        if nearest.is_some() {
            return nearest;
        }
    }
    None
}

/// First index of the minimum of `x[lo..=hi]`.
fn argmin(x: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..=hi {
        if x[i] < x[best] {
            best = i;
        }
    }
    best
}
