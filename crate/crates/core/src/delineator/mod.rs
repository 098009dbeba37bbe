//! PPG-assisted SCG delineation.

mod diastole;
mod pipeline;
mod ppg;
pub mod rules;
mod systole;

pub use diastole::{delineate_diastole, locate_pac, mask_diastole, DiastoleBeat, MaskedScg};
pub use pipeline::{delineate, delineate_window};
pub use ppg::detect_ppg_peaks;
pub use rules::{decision_rules, DecisionRuleConfig, RuleOutput, RulePoints};
pub use systole::{delineate_systole, detect_ao, SystoleBeat};

use crate::envelope::EnvelopeModel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fiducial points of one heartbeat plus the derived intervals.
///
/// Any point may be absent when the beat was only partly delineated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BeatAnnotation {
    pub im: Option<usize>,
    pub ao: Option<usize>,
    pub ic: Option<usize>,
    pub ac: Option<usize>,
    pub pac: Option<usize>,
    pub mo: Option<usize>,
    /// AO to AC, milliseconds.
    pub lvet_ms: Option<f64>,
    /// AC to MO, milliseconds.
    pub ivrt_ms: Option<f64>,
}

/// The six fiducial names in temporal order.
pub const FIDUCIALS: [&str; 6] = ["IM", "AO", "IC", "AC", "pAC", "MO"];

impl BeatAnnotation {
    pub fn from_points(points: [Option<usize>; 6], fs: f64) -> Self {
        let [im, ao, ic, ac, pac, mo] = points;
        let ms = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(a), Some(b)) => Some((b as f64 - a as f64) / fs * 1000.0),
            _ => None,
        };
        Self { im, ao, ic, ac, pac, mo, lvet_ms: ms(ao, ac), ivrt_ms: ms(ac, mo) }
    }

    /// Points in `FIDUCIALS` order.
    pub fn points(&self) -> [Option<usize>; 6] {
        [self.im, self.ao, self.ic, self.ac, self.pac, self.mo]
    }

    pub fn is_complete(&self) -> bool {
        self.points().iter().all(Option::is_some)
    }

    pub fn present_count(&self) -> usize {
        self.points().iter().flatten().count()
    }

    /// Present points are strictly increasing in time.
    pub fn is_ordered(&self) -> bool {
        let present: Vec<usize> = self.points().iter().flatten().copied().collect();
        present.windows(2).all(|w| w[0] < w[1])
    }

    pub fn first(&self) -> Option<usize> {
        self.points().iter().flatten().next().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.points().iter().flatten().last().copied()
    }

    pub(crate) fn shifted(&self, offset: usize, fs: f64) -> Self {
        let p = self.points().map(|o| o.map(|i| i + offset));
        Self::from_points(p, fs)
    }
}

/// Every tunable of the delineation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelineatorConfig {
    pub detrend_cutoff_hz: f64,
    /// Optional zero-phase lowpass applied to both channels before
    /// delineation (off by default).
    pub antialias_lowpass_hz: Option<f64>,
    /// Wavelet scales in milliseconds: `scale_min_ms, +step, ..., scale_max_ms`.
    pub scale_min_ms: f64,
    pub scale_max_ms: f64,
    pub scale_step_ms: f64,
    pub envelope: EnvelopeModel,
    pub threshold_frac: f64,
    /// Minimum spacing of AO impulses.
    pub refractory_ms: f64,
    /// Minimum spacing of PPG impulses. Must exceed the apex-to-trough
    /// distance, since the squared wavelet response also peaks between pulses.
    pub ppg_refractory_ms: f64,
    pub ppg_relocate_ms: f64,
    pub pac_half_window_ms: f64,
    pub rules: DecisionRuleConfig,
    pub mask_guard_ms: f64,
    pub systole_low_hz: f64,
    pub systole_high_hz: f64,
    pub systole_order: usize,
    pub ao_correction_ms: f64,
    pub window_s: f64,
    pub window_overlap_s: f64,
    pub dedup_ms: f64,
    /// Upper bound on an AO-to-AC pairing.
    pub max_lvet_ms: f64,
}

impl Default for DelineatorConfig {
    fn default() -> Self {
        Self {
            detrend_cutoff_hz: 0.5,
            antialias_lowpass_hz: None,
            scale_min_ms: 1.0,
            scale_max_ms: 150.0,
            scale_step_ms: 1.0,
            envelope: EnvelopeModel::default(),
            threshold_frac: 0.3,
            refractory_ms: 300.0,
            ppg_refractory_ms: 500.0,
            ppg_relocate_ms: 50.0,
            pac_half_window_ms: 100.0,
            rules: DecisionRuleConfig::default(),
            mask_guard_ms: 20.0,
            systole_low_hz: 20.0,
            systole_high_hz: 30.0,
            systole_order: 4,
            ao_correction_ms: 30.0,
            window_s: 10.0,
            window_overlap_s: 1.0,
            dedup_ms: 200.0,
            max_lvet_ms: 600.0,
        }
    }
}

impl DelineatorConfig {
    /// Wavelet scales in seconds.
    pub fn scales(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let ms = self.scale_min_ms + k as f64 * self.scale_step_ms;
            if ms > self.scale_max_ms + 1e-9 {
                break;
            }
            out.push(ms / 1000.0);
            k += 1;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("detrend_cutoff_hz", self.detrend_cutoff_hz),
            ("scale_min_ms", self.scale_min_ms),
            ("scale_step_ms", self.scale_step_ms),
            ("refractory_ms", self.refractory_ms),
            ("ppg_refractory_ms", self.ppg_refractory_ms),
            ("ppg_relocate_ms", self.ppg_relocate_ms),
            ("pac_half_window_ms", self.pac_half_window_ms),
            ("block_a_ms", self.rules.block_a_ms),
            ("block_b_ms", self.rules.block_b_ms),
            ("ao_correction_ms", self.ao_correction_ms),
            ("window_s", self.window_s),
            ("dedup_ms", self.dedup_ms),
            ("max_lvet_ms", self.max_lvet_ms),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.scale_max_ms < self.scale_min_ms {
            return Err(Error::Parameter("scale_max_ms must be >= scale_min_ms".into()));
        }
        if !(self.threshold_frac > 0.0 && self.threshold_frac < 1.0) {
            return Err(Error::Parameter("threshold_frac must lie in (0, 1)".into()));
        }
        if self.mask_guard_ms < 0.0 || self.window_overlap_s < 0.0 {
            return Err(Error::Parameter("mask_guard_ms and window_overlap_s must be >= 0".into()));
        }
        if self.rules.n_bins == 0 {
            return Err(Error::Parameter("n_bins must be >= 1".into()));
        }
        EnvelopeModel::new(self.envelope.p, self.envelope.q)?;
        Ok(())
    }
}
