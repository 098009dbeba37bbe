//! Sampled-signal representation, normalisation and extrema search.

mod filter;
mod hilbert;

pub use filter::{bandpass, highpass_detrend, lowpass, Sos, SosFilter};
pub use hilbert::{analytic_magnitude, upper_envelope};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A uniformly sampled real-valued channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    /// Sampling rate in Hz.
    pub fs: f64,
    pub label: String,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, fs: f64, label: impl Into<String>) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::Parameter(format!("sampling rate must be > 0, got {fs}")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, fs, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same rate and label, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self { samples, fs: self.fs, label: self.label.clone() }
    }

    /// Converts a duration in milliseconds to a whole number of samples.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.fs)
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Copy of `samples[start..end]` with the same rate and label.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        self.with_samples(self.samples[start..end].to_vec())
    }

    pub fn scaled(&self, gain: f64) -> Self {
        self.with_samples(self.samples.iter().map(|v| v * gain).collect())
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::Input(format!("signal '{}' is empty", self.label)));
        }
        Ok(())
    }
}

pub fn ms_to_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremaKind {
    Maxima,
    Minima,
}

/// Sorted sample indices of local extrema of one kind.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtremaList {
    pub indices: Vec<usize>,
    pub kind: Option<ExtremaKind>,
}

impl ExtremaList {
    pub fn new(indices: Vec<usize>, kind: ExtremaKind) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices, kind: Some(kind) }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    /// Divide by the largest magnitude; result in `[-1, 1]`.
    MaxAbs,
    /// Affine map onto `[0, 1]`.
    MinMax,
}

pub fn normalize_unit(signal: &SampledSignal, mode: NormalizeMode) -> Result<SampledSignal> {
    Ok(signal.with_samples(normalize_slice(&signal.samples, mode)?))
}

pub(crate) fn normalize_slice(x: &[f64], mode: NormalizeMode) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Input("cannot normalize an empty signal".into()));
    }
    match mode {
        NormalizeMode::MaxAbs => {
            let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak == 0.0 {
                return Err(Error::Degenerate("all-zero signal under max-abs normalization".into()));
            }
            Ok(x.iter().map(|v| v / peak).collect())
        }
        NormalizeMode::MinMax => {
            let (lo, hi) = min_max(x);
            if hi == lo {
                return Err(Error::Degenerate("constant signal under min-max normalization".into()));
            }
            let span = hi - lo;
            // Pin the endpoints so the output attains exactly 0 and 1.
            Ok(x.iter()
                .map(|&v| if v == hi { 1.0 } else { ((v - lo) / span).clamp(0.0, 1.0) })
                .collect())
        }
    }
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Every strict interior local extremum of `signal`.
///
/// A plateau counts once, at its first sample, and only when the samples on
/// both sides of it lie strictly below (maxima) or above (minima) it.
pub fn local_extrema(signal: &SampledSignal, kind: ExtremaKind) -> Result<ExtremaList> {
    if signal.len() < 3 {
        return Err(Error::Input(format!(
            "local extrema need at least 3 samples, got {}",
            signal.len()
        )));
    }
    Ok(ExtremaList::new(extrema_indices(&signal.samples, kind), kind))
}

pub(crate) fn extrema_indices(x: &[f64], kind: ExtremaKind) -> Vec<usize> {
    let sign = match kind {
        ExtremaKind::Maxima => 1.0,
        ExtremaKind::Minima => -1.0,
    };
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let v = sign * x[i];
        if v > sign * x[i - 1] {
            let mut j = i + 1;
            while j < n && sign * x[j] == v {
                j += 1;
            }
            if j < n && sign * x[j] < v {
                out.push(i);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: &[f64]) -> SampledSignal {
        SampledSignal::new(v.to_vec(), 1000.0, "t").unwrap()
    }

    #[test]
    fn rejects_bad_rate_and_nan() {
        assert!(SampledSignal::new(vec![1.0], 0.0, "x").is_err());
        assert!(SampledSignal::new(vec![f64::NAN], 10.0, "x").is_err());
    }

    #[test]
    fn max_abs_example() {
        let y = normalize_unit(&sig(&[-2.0, 0.0, 4.0]), NormalizeMode::MaxAbs).unwrap();
        assert_eq!(y.samples, vec![-0.5, 0.0, 1.0]);
    }

    #[test]
    fn min_max_example() {
        let y = normalize_unit(&sig(&[1.0, 3.0]), NormalizeMode::MinMax).unwrap();
        assert_eq!(y.samples, vec![0.0, 1.0]);
    }

    #[test]
    fn min_max_degenerate() {
        let e = normalize_unit(&sig(&[0.0, 0.0, 0.0]), NormalizeMode::MinMax).unwrap_err();
        assert!(matches!(e, Error::Degenerate(_)));
        let e = normalize_unit(&sig(&[0.0, 0.0]), NormalizeMode::MaxAbs).unwrap_err();
        assert!(matches!(e, Error::Degenerate(_)));
    }

    #[test]
    fn extrema_examples() {
        let m = local_extrema(&sig(&[0.0, 1.0, 0.0, 2.0, 0.0]), ExtremaKind::Maxima).unwrap();
        assert_eq!(m.indices, vec![1, 3]);
        let m = local_extrema(&sig(&[0.0, -1.0, 0.0]), ExtremaKind::Minima).unwrap();
        assert_eq!(m.indices, vec![1]);
        let m = local_extrema(&sig(&[0.0, 1.0, 2.0, 3.0]), ExtremaKind::Maxima).unwrap();
        assert!(m.is_empty());
        assert!(local_extrema(&sig(&[0.0, 1.0]), ExtremaKind::Maxima).is_err());
    }

    #[test]
    fn plateau_first_sample() {
        let m = extrema_indices(&[0.0, 2.0, 2.0, 2.0, 1.0], ExtremaKind::Maxima);
        assert_eq!(m, vec![1]);
        // A step is not an extremum.
        assert!(extrema_indices(&[0.0, 2.0, 2.0, 3.0], ExtremaKind::Maxima).is_empty());
        // Plateau running into the end is excluded.
        assert!(extrema_indices(&[0.0, 2.0, 2.0], ExtremaKind::Maxima).is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn minima_are_maxima_of_negation(v in prop::collection::vec(-3i32..3, 3..60)) {
                let x: Vec<f64> = v.iter().map(|&a| a as f64).collect();
                let neg: Vec<f64> = x.iter().map(|a| -a).collect();
                prop_assert_eq!(
                    extrema_indices(&neg, ExtremaKind::Maxima),
                    extrema_indices(&x, ExtremaKind::Minima)
                );
            }

            #[test]
            fn normalize_is_idempotent(v in prop::collection::vec(-1e3f64..1e3, 2..50)) {
                let (lo, hi) = min_max(&v);
                prop_assume!(hi > lo);
                for mode in [NormalizeMode::MinMax, NormalizeMode::MaxAbs] {
                    let once = normalize_slice(&v, mode).unwrap();
                    let twice = normalize_slice(&once, mode).unwrap();
                    for (a, b) in once.iter().zip(&twice) {
                        prop_assert!((a - b).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
