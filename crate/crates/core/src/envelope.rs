//! Exponential-ratio envelope `y = (1 - e^{-qx}) / (1 + p e^{-qx})`, its
//! least-squares parameter fit, Shannon baselines, and impulse picking.

use crate::error::{Error, Result};
use crate::signal::{extrema_indices, ExtremaKind, ExtremaList, SampledSignal};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::ops::RangeInclusive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvelopeModel {
    pub p: u32,
    pub q: u32,
}

impl Default for EnvelopeModel {
    fn default() -> Self {
        Self { p: 39, q: 16 }
    }
}

impl EnvelopeModel {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Parameter(format!("p and q must be >= 1, got p={p} q={q}")));
        }
        Ok(Self { p, q })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let e = (-(self.q as f64) * x).exp();
        (1.0 - e) / (1.0 + self.p as f64 * e)
    }
}

/// Pointwise envelope transfer of a signal already mapped into `[0, 1]`.
pub fn transfer_envelope(signal01: &SampledSignal, model: EnvelopeModel) -> Result<SampledSignal> {
    if let Some(i) = signal01.samples.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Precondition(format!(
            "envelope input must lie in [0, 1]; sample {i} is {}",
            signal01.samples[i]
        )));
    }
    Ok(signal01.with_samples(signal01.samples.iter().map(|&x| model.eval(x)).collect()))
}

/// Piecewise-linear desired transfer characteristic on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetCurve {
    breakpoints: Vec<(f64, f64)>,
}

impl TargetCurve {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Parameter("target curve needs at least two breakpoints".into()));
        }
        let first = breakpoints[0].0;
        let last = breakpoints[breakpoints.len() - 1].0;
        if first != 0.0 || last != 1.0 {
            return Err(Error::Parameter("target breakpoints must span x = 0 to x = 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Parameter("target breakpoints must be strictly increasing in x".into()));
        }
        if breakpoints.iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
            return Err(Error::Parameter("target y values must lie in [0, 1]".into()));
        }
        Ok(Self { breakpoints })
    }

    /// Ramp to saturation at x = 0.3.
    pub fn shipped_default() -> Self {
        Self::new(vec![(0.0, 0.0), (0.3, 1.0), (1.0, 1.0)]).expect("valid default target")
    }

    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        let i = bp.partition_point(|&(bx, _)| bx <= x).clamp(1, bp.len() - 1);
        let (x0, y0) = bp[i - 1];
        let (x1, y1) = bp[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }
}

/// Result of the `(p, q)` grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqFit {
    pub model: EnvelopeModel,
    pub sse: f64,
    pub correlation: f64,
}

/// Fitting grid step on `x`.
pub const FIT_GRID_STEP: f64 = 0.001;

fn fit_grid() -> Vec<f64> {
    let n = (1.0 / FIT_GRID_STEP).round() as usize;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Exhaustive integer grid search for the least-squares `(p, q)`; ties go to
/// the smaller `p`, then the smaller `q`.
pub fn fit_pq(
    target: &TargetCurve,
    p_range: RangeInclusive<u32>,
    q_range: RangeInclusive<u32>,
) -> Result<PqFit> {
    if p_range.is_empty() || q_range.is_empty() || *p_range.start() == 0 || *q_range.start() == 0 {
        return Err(Error::Parameter("p and q ranges must be non-empty and start at >= 1".into()));
    }
    let xs = fit_grid();
    let ys: Vec<f64> = xs.iter().map(|&x| target.eval(x)).collect();
    let mut best: Option<(f64, EnvelopeModel)> = None;
    for p in p_range {
        for q in q_range.clone() {
            let m = EnvelopeModel { p, q };
            let sse: f64 = xs.iter().zip(&ys).map(|(&x, &y)| (m.eval(x) - y).powi(2)).sum();
            if best.is_none_or(|(b, _)| sse < b) {
                best = Some((sse, m));
            }
        }
    }
    let (sse, model) = best.expect("non-empty grid");
    let fitted: Vec<f64> = xs.iter().map(|&x| model.eval(x)).collect();
    Ok(PqFit { model, sse, correlation: pearson(&fitted, &ys) })
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Shannon entropy `-x ln x` and Shannon energy `-x^2 ln x^2` envelopes.
pub fn shannon_envelopes(signal01: &SampledSignal) -> Result<(SampledSignal, SampledSignal)> {
    if let Some(i) = signal01.samples.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Precondition(format!(
            "Shannon envelopes need input in [0, 1]; sample {i} is {}",
            signal01.samples[i]
        )));
    }
    let se = signal01.samples.iter().map(|&x| -xlogx(x)).collect();
    let see = signal01.samples.iter().map(|&x| -xlogx(x * x)).collect();
    Ok((signal01.with_samples(se), signal01.with_samples(see)))
}

/// Sliding maximum over a centred window of `2 * half + 1` samples.
pub(crate) fn moving_max(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&j| x[j] <= x[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while dq.front().is_some_and(|&j| j < lo) {
            dq.pop_front();
        }
        out.push(x[*dq.front().unwrap()]);
    }
    out
}

/// Window of the adaptive amplitude reference.
pub const THRESHOLD_WINDOW_S: f64 = 2.0;

/// Amplitude-temporal impulse picking on an envelope.
///
/// A candidate is a local maximum above `threshold_frac` times the maximum of
/// the surrounding 2 s. Candidates are accepted from the tallest down; any
/// candidate within `refractory_ms` of an accepted one is discarded.
pub fn impulse_peaks(envelope: &SampledSignal, threshold_frac: f64, refractory_ms: f64) -> Result<ExtremaList> {
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return Err(Error::Parameter(format!("threshold_frac must lie in (0, 1), got {threshold_frac}")));
    }
    if !(refractory_ms > 0.0) {
        return Err(Error::Parameter(format!("refractory_ms must be > 0, got {refractory_ms}")));
    }
    if envelope.samples.iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("envelope must be non-negative".into()));
    }
    let x = &envelope.samples;
    if x.len() < 3 {
        return Ok(ExtremaList::new(vec![], ExtremaKind::Maxima));
    }
    let half = envelope.ms_to_samples(THRESHOLD_WINDOW_S * 500.0);
    let reference = moving_max(x, half);
    let mut candidates: Vec<usize> = extrema_indices(x, ExtremaKind::Maxima)
        .into_iter()
        .filter(|&i| x[i] > 0.0 && x[i] > threshold_frac * reference[i])
        .collect();
    candidates.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap().then(a.cmp(&b)));

    let refractory = refractory_ms * envelope.fs / 1000.0;
    let mut accepted: Vec<usize> = Vec::new();
    for c in candidates {
        let pos = accepted.partition_point(|&a| a < c);
        let clash_left = pos > 0 && ((c - accepted[pos - 1]) as f64) < refractory;
        let clash_right = pos < accepted.len() && ((accepted[pos] - c) as f64) < refractory;
        if !clash_left && !clash_right {
            accepted.insert(pos, c);
        }
    }
    Ok(ExtremaList::new(accepted, ExtremaKind::Maxima))
}
