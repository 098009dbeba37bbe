//! Synthetic SCG + PPG records with exact fiducial ground truth.
//!
//! Each SCG beat is a sum of Gaussian-windowed cosines, one per fiducial
//! plus two flanking humps per profile. AO is a sharp 25 Hz component while
//! its neighbours in the systole are broader and slower, so the 20-30 Hz band
//! is dominated by AO. Diastolic components sit at 14 Hz. The PPG is an asymmetric pulse whose apex
//! follows AC by the transit delay. Noise is Gaussian, band-limited like an
//! acquisition front-end, and scaled to the requested SNR exactly.

use crate::error::{Error, Result};
use crate::signal::{SampledSignal, SosFilter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreathMode {
    Normal,
    Held,
}

impl BreathMode {
    /// Class label used in ground truth and classification.
    pub fn class_label(&self) -> &'static str {
        match self {
            BreathMode::Normal => "normal",
            BreathMode::Held => "breathless",
        }
    }
}

/// Nominal fiducial offsets from beat onset, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiducialOffsets {
    pub im: f64,
    pub ao: f64,
    pub ic: f64,
    pub ac: f64,
    pub pac: f64,
    pub mo: f64,
}

impl Default for FiducialOffsets {
    fn default() -> Self {
        Self { im: 30.0, ao: 60.0, ic: 90.0, ac: 360.0, pac: 400.0, mo: 460.0 }
    }
}

impl FiducialOffsets {
    pub fn as_array(&self) -> [f64; 6] {
        [self.im, self.ao, self.ic, self.ac, self.pac, self.mo]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub fs: f64,
    pub duration_s: f64,
    pub hr_mean_bpm: f64,
    /// Beat-to-beat random HR spread.
    pub hr_sd_bpm: f64,
    /// SCG signal-to-noise ratio; `+inf` disables noise.
    pub snr_db: f64,
    pub ppg_snr_db: f64,
    /// SCG noise is low-passed here before scaling; `None` leaves it white.
    pub noise_bandwidth_hz: Option<f64>,
    pub ppg_noise_bandwidth_hz: Option<f64>,
    pub drift_amplitude: f64,
    pub drift_freq_hz: f64,
    pub offsets: FiducialOffsets,
    pub offset_jitter_ms: f64,
    pub ppg_transit_ms: f64,
    pub ppg_transit_jitter_ms: f64,
    pub breath_mode: BreathMode,
    /// Respiratory modulation, applied only in normal breathing.
    pub resp_rate_hz: f64,
    pub rsa_depth_bpm: f64,
    pub resp_amplitude_depth: f64,
    pub resp_timing_depth_ms: f64,
    /// Probability that a beat's PPG pulse is missing.
    pub dropout_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            fs: 1000.0,
            duration_s: 60.0,
            hr_mean_bpm: 75.0,
            hr_sd_bpm: 1.0,
            snr_db: 20.0,
            ppg_snr_db: 30.0,
            noise_bandwidth_hz: Some(50.0),
            ppg_noise_bandwidth_hz: Some(5.0),
            drift_amplitude: 0.2,
            drift_freq_hz: 0.2,
            offsets: FiducialOffsets::default(),
            offset_jitter_ms: 2.0,
            ppg_transit_ms: 40.0,
            ppg_transit_jitter_ms: 3.0,
            breath_mode: BreathMode::Normal,
            resp_rate_hz: 0.25,
            rsa_depth_bpm: 8.0,
            resp_amplitude_depth: 0.3,
            resp_timing_depth_ms: 20.0,
            dropout_prob: 0.0,
            seed: 42,
        }
    }
}

/// HR drop of the breath-hold preset relative to normal breathing.
pub const HELD_HR_DELTA_BPM: f64 = 5.0;

impl SynthConfig {
    /// Breath-hold counterpart: lower, steadier HR and no respiratory
    /// modulation.
    pub fn held_from(normal: &SynthConfig) -> SynthConfig {
        SynthConfig {
            breath_mode: BreathMode::Held,
            hr_mean_bpm: normal.hr_mean_bpm - HELD_HR_DELTA_BPM,
            hr_sd_bpm: normal.hr_sd_bpm * 0.5,
            ..normal.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let o = self.offsets.as_array();
        if o.windows(2).any(|w| w[1] <= w[0]) || o[0] < 0.0 {
            return Err(Error::Parameter("fiducial offsets must satisfy 0 <= IM < AO < IC < AC < pAC < MO".into()));
        }
        if !(self.fs >= 200.0) {
            return Err(Error::Parameter(format!("fs must be >= 200 Hz, got {}", self.fs)));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Parameter("duration_s must be > 0".into()));
        }
        if !(self.hr_mean_bpm > 20.0 && self.hr_mean_bpm < 250.0) {
            return Err(Error::Parameter("hr_mean_bpm out of range".into()));
        }
        for (name, v) in [("snr_db", self.snr_db), ("ppg_snr_db", self.ppg_snr_db)] {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::Parameter(format!("{name} must be a number or +inf")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return Err(Error::Parameter("dropout_prob must lie in [0, 1)".into()));
        }
        let nonneg = [
            self.hr_sd_bpm,
            self.offset_jitter_ms,
            self.ppg_transit_jitter_ms,
            self.drift_amplitude,
            self.drift_freq_hz,
            self.ppg_transit_ms,
            self.rsa_depth_bpm,
            self.resp_amplitude_depth,
            self.resp_timing_depth_ms,
            self.resp_rate_hz,
        ];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Parameter("spread, drift and modulation settings must be finite and >= 0".into()));
        }
        for b in [self.noise_bandwidth_hz, self.ppg_noise_bandwidth_hz].into_iter().flatten() {
            if !(b > 0.0 && b < self.fs / 2.0) {
                return Err(Error::Parameter("noise bandwidths must lie in (0, fs/2)".into()));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.fs).round() as usize + 1
    }
}

/// Six fiducial sample indices of one true beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueBeat {
    pub im: usize,
    pub ao: usize,
    pub ic: usize,
    pub ac: usize,
    pub pac: usize,
    pub mo: usize,
    /// Apex of this beat's PPG pulse, absent on dropout.
    pub ppg_apex: Option<usize>,
}

impl TrueBeat {
    pub fn points(&self) -> [usize; 6] {
        [self.im, self.ao, self.ic, self.ac, self.pac, self.mo]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub fs: f64,
    pub label: String,
    pub seed: u64,
    pub beats: Vec<TrueBeat>,
}

impl GroundTruth {
    pub fn ppg_apices(&self) -> Vec<usize> {
        self.beats.iter().filter_map(|b| b.ppg_apex).collect()
    }

    /// Column `k` (in IM..MO order) of all beats.
    pub fn fiducial(&self, k: usize) -> Vec<usize> {
        self.beats.iter().map(|b| b.points()[k]).collect()
    }

    pub fn lvet_ms(&self) -> Vec<f64> {
        self.beats.iter().map(|b| (b.ac - b.ao) as f64 / self.fs * 1000.0).collect()
    }

    pub fn ivrt_ms(&self) -> Vec<f64> {
        self.beats.iter().map(|b| (b.mo - b.ac) as f64 / self.fs * 1000.0).collect()
    }
}

/// Separate additive parts of a generated record.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthComponents {
    pub scg_clean: Vec<f64>,
    pub scg_noise: Vec<f64>,
    pub ppg_clean: Vec<f64>,
    pub ppg_noise: Vec<f64>,
    /// Shared baseline drift, added to both channels.
    pub drift: Vec<f64>,
    pub truth: GroundTruth,
}

/// One waveform component: signed amplitude, centre (s), cosine frequency, width (s).
struct Wavelet {
    amp: f64,
    center: f64,
    freq: f64,
    sigma: f64,
}

/// (amplitude, cosine frequency Hz, width s) of each component.
const AO_WAVE: (f64, f64, f64) = (1.0, 25.0, 0.007);
const IM_IC_WAVE: (f64, f64, f64) = (-0.45, 10.0, 0.014);
const MC_RE_WAVE: (f64, f64, f64) = (0.25, 8.0, 0.018);
const DIASTOLE_HZ: f64 = 14.0;
const DIASTOLE_SIGMA_S: f64 = 0.015;
const PPG_RISE_S: f64 = 0.06;
const PPG_DECAY_S: f64 = 0.12;
const PPG_BASELINE: f64 = 2.0;
/// Minimum separation kept between jittered fiducials.
const MIN_GAP_MS: f64 = 12.0;

fn add_wavelet(out: &mut [f64], fs: f64, w: &Wavelet) {
    let reach = 5.0 * w.sigma;
    let lo = ((w.center - reach) * fs).floor().max(0.0) as usize;
    let hi = (((w.center + reach) * fs).ceil() as usize).min(out.len().saturating_sub(1));
    for (i, v) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
        let d = i as f64 / fs - w.center;
        *v += w.amp * (-0.5 * (d / w.sigma).powi(2)).exp() * (2.0 * PI * w.freq * d).cos();
    }
}

fn add_ppg_pulse(out: &mut [f64], fs: f64, apex: f64, amp: f64) {
    let lo = ((apex - 5.0 * PPG_RISE_S) * fs).floor().max(0.0) as usize;
    let hi = (((apex + 5.0 * PPG_DECAY_S) * fs).ceil() as usize).min(out.len().saturating_sub(1));
    for (i, v) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
        let d = i as f64 / fs - apex;
        let s = if d < 0.0 { PPG_RISE_S } else { PPG_DECAY_S };
        *v += amp * (-0.5 * (d / s).powi(2)).exp();
    }
}

/// Band-limited Gaussian noise with exactly `power` mean square.
fn noise(len: usize, power: f64, bandwidth: Option<f64>, cfg: &SynthConfig, stream: u64) -> Result<Vec<f64>> {
    if power == 0.0 || len == 0 {
        return Ok(vec![0.0; len]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut w: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
    if let Some(bw) = bandwidth {
        w = SosFilter::butter_lowpass(4, bw, cfg.fs)?.filtfilt(&w)?;
    }
    let ms = w.iter().map(|v| v * v).sum::<f64>() / len as f64;
    let g = (power / ms).sqrt();
    Ok(w.into_iter().map(|v| v * g).collect())
}

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64
}

/// Moves a nominal index onto the nearest extremum of the requested kind of
/// the clean waveform.
fn snap(x: &[f64], at: usize, maximum: bool, radius: usize) -> usize {
    let sign = if maximum { 1.0 } else { -1.0 };
    let lo = at.saturating_sub(radius).max(1);
    let hi = (at + radius).min(x.len().saturating_sub(2));
    (lo..=hi)
        .filter(|&i| sign * x[i] > sign * x[i - 1] && sign * x[i] >= sign * x[i + 1])
        .min_by_key(|&i| (i.abs_diff(at), i))
        .unwrap_or(at)
}

pub fn generate_components(cfg: &SynthConfig) -> Result<SynthComponents> {
    cfg.validate()?;
    let fs = cfg.fs;
    let n = cfg.n_samples();
    let duration = (n - 1) as f64 / fs;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gauss = |sd: f64| Normal::new(0.0, sd).expect("finite sd");

    let breathing = cfg.breath_mode == BreathMode::Normal;
    let resp_phase0: f64 = rng.random::<f64>() * 2.0 * PI;
    let phase_at = |t: f64| resp_phase0 + 2.0 * PI * cfg.resp_rate_hz * t;

    let mut scg = vec![0.0; n];
    let mut ppg = vec![0.0; n];
    let mut beats = Vec::new();
    let mut onset: f64 = rng.random::<f64>() * 0.5;
    let o = cfg.offsets.as_array();
    loop {
        let phase = phase_at(onset);
        // Quadrature components of the respiratory cycle at this beat.
        let (rs, rc) = if breathing { (phase.sin(), phase.cos()) } else { (0.0, 0.0) };
        let rsa = cfg.rsa_depth_bpm * rs;
        let timing_mod = cfg.resp_timing_depth_ms * rc;
        let mut off = [0.0f64; 6];
        for k in 0..6 {
            let jitter = if cfg.offset_jitter_ms > 0.0 { gauss(cfg.offset_jitter_ms).sample(&mut rng) } else { 0.0 };
            let diastolic = if k >= 3 { timing_mod } else { 0.0 };
            off[k] = o[k] + diastolic + jitter;
            if k > 0 {
                off[k] = off[k].max(off[k - 1] + MIN_GAP_MS);
            }
        }
        let hr_noise = if cfg.hr_sd_bpm > 0.0 { gauss(cfg.hr_sd_bpm).sample(&mut rng) } else { 0.0 };
        let hr = (cfg.hr_mean_bpm + rsa + hr_noise).clamp(30.0, 200.0);
        let transit_jitter =
            if cfg.ppg_transit_jitter_ms > 0.0 { gauss(cfg.ppg_transit_jitter_ms).sample(&mut rng) } else { 0.0 };
        let dropped = cfg.dropout_prob > 0.0 && rng.random::<f64>() < cfg.dropout_prob;

        if onset + off[5] / 1000.0 >= duration {
            break;
        }
        let t = |k: usize| onset + off[k] / 1000.0;
        let [im, ao, ic, ac, pac, mo] = [t(0), t(1), t(2), t(3), t(4), t(5)];
        let sys = |(amp, freq, sigma): (f64, f64, f64), c: f64| Wavelet { amp, center: c, freq, sigma };
        let dia = |amp: f64, c: f64| Wavelet { amp, center: c, freq: DIASTOLE_HZ, sigma: DIASTOLE_SIGMA_S };
        let pac_amp = 0.8 * (1.0 + cfg.resp_amplitude_depth * rc);
        let (side_amp, side_hz, side_sigma) = IM_IC_WAVE;
        let side = (side_amp * (1.0 + cfg.resp_amplitude_depth * rs), side_hz, side_sigma);
        for w in [
            sys(MC_RE_WAVE, im - 0.025),
            sys(side, im),
            sys(AO_WAVE, ao),
            sys(side, ic),
            sys(MC_RE_WAVE, ic + 0.025),
            dia(0.3, ac - 0.03),
            dia(-0.5, ac),
            dia(pac_amp, pac),
            dia(-0.5, mo),
            dia(0.3, mo + 0.04),
        ] {
            add_wavelet(&mut scg, fs, &w);
        }
        let transit = (cfg.ppg_transit_ms + transit_jitter) / 1000.0;
        let apex_t = (ac + transit).clamp(ac + 2.0 / fs, mo - 2.0 / fs);
        if !dropped {
            add_ppg_pulse(&mut ppg, fs, apex_t, 1.0);
        }
        beats.push((onset, [im, ao, ic, ac, pac, mo], (!dropped).then_some(apex_t)));
        onset += 60.0 / hr;
    }

    // Ground truth is read off the clean waveform.
    let radius = ((MIN_GAP_MS / 2.0) * fs / 1000.0).floor() as usize;
    let kinds = [false, true, false, false, true, false];
    let truth_beats: Vec<TrueBeat> = beats
        .iter()
        .map(|(_, times, apex)| {
            let mut p = [0usize; 6];
            for k in 0..6 {
                p[k] = snap(&scg, (times[k] * fs).round() as usize, kinds[k], radius);
            }
            for k in 1..6 {
                if p[k] <= p[k - 1] {
                    p[k] = p[k - 1] + 1;
                }
            }
            let apex = apex.map(|a| {
                let i = snap(&ppg, (a * fs).round() as usize, true, radius);
                i.clamp(p[3] + 1, p[5] - 1)
            });
            TrueBeat { im: p[0], ao: p[1], ic: p[2], ac: p[3], pac: p[4], mo: p[5], ppg_apex: apex }
        })
        .collect();

    let snr = |db: f64, clean: &[f64]| if db.is_infinite() { 0.0 } else { mean_square(clean) / 10f64.powf(db / 10.0) };
    let scg_noise = noise(n, snr(cfg.snr_db, &scg), cfg.noise_bandwidth_hz, cfg, 1)?;
    let ppg_clean: Vec<f64> = ppg.iter().map(|v| v + PPG_BASELINE).collect();
    // PPG SNR refers to the pulsatile part only.
    let ppg_noise = noise(n, snr(cfg.ppg_snr_db, &ppg), cfg.ppg_noise_bandwidth_hz, cfg, 2)?;
    let drift: Vec<f64> =
        (0..n).map(|i| cfg.drift_amplitude * (2.0 * PI * cfg.drift_freq_hz * i as f64 / fs).sin()).collect();

    Ok(SynthComponents {
        scg_clean: scg,
        scg_noise,
        ppg_clean,
        ppg_noise,
        drift,
        truth: GroundTruth {
            fs,
            label: cfg.breath_mode.class_label().to_string(),
            seed: cfg.seed,
            beats: truth_beats,
        },
    })
}

/// Generated SCG, PPG and ground truth.
pub fn generate(cfg: &SynthConfig) -> Result<(SampledSignal, SampledSignal, GroundTruth)> {
    let c = generate_components(cfg)?;
    let sum3 = |a: &[f64], b: &[f64], d: &[f64]| a.iter().zip(b).zip(d).map(|((x, y), z)| x + y + z).collect();
    let scg = SampledSignal::new(sum3(&c.scg_clean, &c.scg_noise, &c.drift), cfg.fs, "scg")?;
    let ppg = SampledSignal::new(sum3(&c.ppg_clean, &c.ppg_noise, &c.drift), cfg.fs, "ppg")?;
    Ok((scg, ppg, c.truth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub name: String,
    pub mode: BreathMode,
    pub scg: SampledSignal,
    pub ppg: SampledSignal,
    pub truth: GroundTruth,
}

/// Per-record HR offset range (subject variability) in the data set.
pub const DATASET_HR_SPREAD_BPM: f64 = 2.0;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n_records` per class; record seeds derive from `cfg_normal.seed`.
pub fn generate_dataset(cfg_normal: &SynthConfig, cfg_held: &SynthConfig, n_records: usize) -> Result<Vec<LabeledRecord>> {
    if n_records == 0 {
        return Err(Error::Parameter("n_records must be >= 1".into()));
    }
    let mut jobs = Vec::with_capacity(2 * n_records);
    for k in 0..n_records {
        for (c, base) in [(0u64, cfg_normal), (1u64, cfg_held)] {
            let seed = splitmix(cfg_normal.seed ^ splitmix(2 * k as u64 + c));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.hr_mean_bpm += (rng.random::<f64>() * 2.0 - 1.0) * DATASET_HR_SPREAD_BPM;
            let name = format!("{}_{:02}", if c == 0 { "nb" } else { "sb" }, k + 1);
            jobs.push((name, cfg));
        }
    }
    use rayon::prelude::*;
    jobs.into_par_iter()
        .map(|(name, cfg)| {
            let (scg, ppg, truth) = generate(&cfg)?;
            Ok(LabeledRecord { name, mode: cfg.breath_mode, scg, ppg, truth })
        })
        .collect()
}
