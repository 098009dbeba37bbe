//! Flat `key = value` configuration covering every tunable.
//!
//! Blank lines and lines starting with `#` are ignored. Generator keys carry
//! a `synth.` prefix. Unknown keys are errors.

use crate::analysis::{ClassifierKind, ClassifierParams, FeatureSelection, FoldUnit};
use crate::delineator::DelineatorConfig;
use crate::error::{Error, Result};
use crate::synth::{BreathMode, SynthConfig, HELD_HR_DELTA_BPM};
use sha2::{Digest, Sha256};
use std::fmt::Write;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub delineator: DelineatorConfig,
    pub synth: SynthConfig,
    pub held_hr_delta_bpm: f64,
    pub tol_ms: f64,
    pub classifier: ClassifierKind,
    pub classifier_params: ClassifierParams,
    pub features: FeatureSelection,
    pub k_folds: usize,
    pub fold_unit: FoldUnit,
    pub cv_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            delineator: DelineatorConfig::default(),
            synth: SynthConfig::default(),
            held_hr_delta_bpm: HELD_HR_DELTA_BPM,
            tol_ms: 50.0,
            classifier: ClassifierKind::SvmRbf,
            classifier_params: ClassifierParams::default(),
            features: FeatureSelection::Fixed,
            k_folds: 10,
            fold_unit: FoldUnit::Beat,
            cv_seed: 0,
        }
    }
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("invalid value '{v}'"))
}

fn opt_num(v: &str, none: &str) -> std::result::Result<Option<f64>, String> {
    if v == none {
        Ok(None)
    } else {
        num(v).map(Some)
    }
}

fn opt_str(v: Option<f64>, none: &str) -> String {
    v.map_or(none.to_string(), |x| x.to_string())
}

fn features_name(f: FeatureSelection) -> String {
    match f {
        FeatureSelection::All => "all".into(),
        FeatureSelection::Fixed => "selected".into(),
        FeatureSelection::TTest { alpha } => format!("ttest:{alpha}"),
    }
}

pub fn parse_features(v: &str) -> Result<FeatureSelection> {
    match v {
        "all" => Ok(FeatureSelection::All),
        "selected" => Ok(FeatureSelection::Fixed),
        "ttest" => Ok(FeatureSelection::TTest { alpha: 0.05 }),
        other => match other.strip_prefix("ttest:").and_then(|a| a.parse().ok()) {
            Some(alpha) => Ok(FeatureSelection::TTest { alpha }),
            None => Err(Error::Parameter(format!("unknown feature set '{other}'"))),
        },
    }
}

impl RunConfig {
    /// Applies one setting.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let d = &mut self.delineator;
        let s = &mut self.synth;
        match key {
            "detrend_cutoff_hz" => d.detrend_cutoff_hz = num(v)?,
            "antialias_lowpass_hz" => d.antialias_lowpass_hz = opt_num(v, "off")?,
            "scale_min_ms" => d.scale_min_ms = num(v)?,
            "scale_max_ms" => d.scale_max_ms = num(v)?,
            "scale_step_ms" => d.scale_step_ms = num(v)?,
            "envelope_p" => d.envelope.p = num(v)?,
            "envelope_q" => d.envelope.q = num(v)?,
            "threshold_frac" => d.threshold_frac = num(v)?,
            "refractory_ms" => d.refractory_ms = num(v)?,
            "ppg_refractory_ms" => d.ppg_refractory_ms = num(v)?,
            "ppg_relocate_ms" => d.ppg_relocate_ms = num(v)?,
            "pac_half_window_ms" => d.pac_half_window_ms = num(v)?,
            "block_a_ms" => d.rules.block_a_ms = num(v)?,
            "block_b_ms" => d.rules.block_b_ms = num(v)?,
            "n_bins" => d.rules.n_bins = num(v)?,
            "mask_guard_ms" => d.mask_guard_ms = num(v)?,
            "systole_low_hz" => d.systole_low_hz = num(v)?,
            "systole_high_hz" => d.systole_high_hz = num(v)?,
            "systole_order" => d.systole_order = num(v)?,
            "ao_correction_ms" => d.ao_correction_ms = num(v)?,
            "window_s" => d.window_s = num(v)?,
            "window_overlap_s" => d.window_overlap_s = num(v)?,
            "dedup_ms" => d.dedup_ms = num(v)?,
            "max_lvet_ms" => d.max_lvet_ms = num(v)?,
            "synth.fs" => s.fs = num(v)?,
            "synth.duration_s" => s.duration_s = num(v)?,
            "synth.hr_mean_bpm" => s.hr_mean_bpm = num(v)?,
            "synth.hr_sd_bpm" => s.hr_sd_bpm = num(v)?,
            "synth.snr_db" => s.snr_db = num(v)?,
            "synth.ppg_snr_db" => s.ppg_snr_db = num(v)?,
            "synth.noise_bandwidth_hz" => s.noise_bandwidth_hz = opt_num(v, "white")?,
            "synth.ppg_noise_bandwidth_hz" => s.ppg_noise_bandwidth_hz = opt_num(v, "white")?,
            "synth.drift_amplitude" => s.drift_amplitude = num(v)?,
            "synth.drift_freq_hz" => s.drift_freq_hz = num(v)?,
            "synth.offset_im_ms" => s.offsets.im = num(v)?,
            "synth.offset_ao_ms" => s.offsets.ao = num(v)?,
            "synth.offset_ic_ms" => s.offsets.ic = num(v)?,
            "synth.offset_ac_ms" => s.offsets.ac = num(v)?,
            "synth.offset_pac_ms" => s.offsets.pac = num(v)?,
            "synth.offset_mo_ms" => s.offsets.mo = num(v)?,
            "synth.offset_jitter_ms" => s.offset_jitter_ms = num(v)?,
            "synth.ppg_transit_ms" => s.ppg_transit_ms = num(v)?,
            "synth.ppg_transit_jitter_ms" => s.ppg_transit_jitter_ms = num(v)?,
            "synth.breath_mode" => {
                s.breath_mode = match v {
                    "normal" => BreathMode::Normal,
                    "held" => BreathMode::Held,
                    _ => return Err(format!("invalid breath mode '{v}'")),
                }
            }
            "synth.resp_rate_hz" => s.resp_rate_hz = num(v)?,
            "synth.rsa_depth_bpm" => s.rsa_depth_bpm = num(v)?,
            "synth.resp_amplitude_depth" => s.resp_amplitude_depth = num(v)?,
            "synth.resp_timing_depth_ms" => s.resp_timing_depth_ms = num(v)?,
            "synth.dropout_prob" => s.dropout_prob = num(v)?,
            "synth.seed" => s.seed = num(v)?,
            "synth.held_hr_delta_bpm" => self.held_hr_delta_bpm = num(v)?,
            "tol_ms" => self.tol_ms = num(v)?,
            "classifier" => self.classifier = v.parse().map_err(|e: Error| e.to_string())?,
            "svm_c" => self.classifier_params.c = num(v)?,
            "svm_gamma" => self.classifier_params.gamma = opt_num(v, "auto")?,
            "svm_tol" => self.classifier_params.tol = num(v)?,
            "lda_ridge" => self.classifier_params.lda_ridge = num(v)?,
            "features" => self.features = parse_features(v).map_err(|e| e.to_string())?,
            "k_folds" => self.k_folds = num(v)?,
            "fold_unit" => {
                self.fold_unit = match v {
                    "beat" => FoldUnit::Beat,
                    "record" => FoldUnit::Record,
                    _ => return Err(format!("invalid fold unit '{v}'")),
                }
            }
            "cv_seed" => self.cv_seed = num(v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    /// Applies every line of `text` on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|m| Error::Parse(format!("config line {}: {m}", i + 1)))?;
        }
        Ok(())
    }

    /// The held-breath generator settings paired with `synth`.
    pub fn held_synth(&self) -> SynthConfig {
        let mut held = SynthConfig::held_from(&self.synth);
        held.hr_mean_bpm = self.synth.hr_mean_bpm - self.held_hr_delta_bpm;
        held
    }

    /// Canonical listing of every key; parsing it reproduces `self`.
    pub fn render(&self) -> String {
        let d = &self.delineator;
        let s = &self.synth;
        let o = &s.offsets;
        let p = &self.classifier_params;
        let pairs: Vec<(&str, String)> = vec![
            ("detrend_cutoff_hz", d.detrend_cutoff_hz.to_string()),
            ("antialias_lowpass_hz", opt_str(d.antialias_lowpass_hz, "off")),
            ("scale_min_ms", d.scale_min_ms.to_string()),
            ("scale_max_ms", d.scale_max_ms.to_string()),
            ("scale_step_ms", d.scale_step_ms.to_string()),
            ("envelope_p", d.envelope.p.to_string()),
            ("envelope_q", d.envelope.q.to_string()),
            ("threshold_frac", d.threshold_frac.to_string()),
            ("refractory_ms", d.refractory_ms.to_string()),
            ("ppg_refractory_ms", d.ppg_refractory_ms.to_string()),
            ("ppg_relocate_ms", d.ppg_relocate_ms.to_string()),
            ("pac_half_window_ms", d.pac_half_window_ms.to_string()),
            ("block_a_ms", d.rules.block_a_ms.to_string()),
            ("block_b_ms", d.rules.block_b_ms.to_string()),
            ("n_bins", d.rules.n_bins.to_string()),
            ("mask_guard_ms", d.mask_guard_ms.to_string()),
            ("systole_low_hz", d.systole_low_hz.to_string()),
            ("systole_high_hz", d.systole_high_hz.to_string()),
            ("systole_order", d.systole_order.to_string()),
            ("ao_correction_ms", d.ao_correction_ms.to_string()),
            ("window_s", d.window_s.to_string()),
            ("window_overlap_s", d.window_overlap_s.to_string()),
            ("dedup_ms", d.dedup_ms.to_string()),
            ("max_lvet_ms", d.max_lvet_ms.to_string()),
            ("synth.fs", s.fs.to_string()),
            ("synth.duration_s", s.duration_s.to_string()),
            ("synth.hr_mean_bpm", s.hr_mean_bpm.to_string()),
            ("synth.hr_sd_bpm", s.hr_sd_bpm.to_string()),
            ("synth.snr_db", s.snr_db.to_string()),
            ("synth.ppg_snr_db", s.ppg_snr_db.to_string()),
            ("synth.noise_bandwidth_hz", opt_str(s.noise_bandwidth_hz, "white")),
            ("synth.ppg_noise_bandwidth_hz", opt_str(s.ppg_noise_bandwidth_hz, "white")),
            ("synth.drift_amplitude", s.drift_amplitude.to_string()),
            ("synth.drift_freq_hz", s.drift_freq_hz.to_string()),
            ("synth.offset_im_ms", o.im.to_string()),
            ("synth.offset_ao_ms", o.ao.to_string()),
            ("synth.offset_ic_ms", o.ic.to_string()),
            ("synth.offset_ac_ms", o.ac.to_string()),
            ("synth.offset_pac_ms", o.pac.to_string()),
            ("synth.offset_mo_ms", o.mo.to_string()),
            ("synth.offset_jitter_ms", s.offset_jitter_ms.to_string()),
            ("synth.ppg_transit_ms", s.ppg_transit_ms.to_string()),
            ("synth.ppg_transit_jitter_ms", s.ppg_transit_jitter_ms.to_string()),
            ("synth.breath_mode", s.breath_mode.class_label().replace("breathless", "held")),
            ("synth.resp_rate_hz", s.resp_rate_hz.to_string()),
            ("synth.rsa_depth_bpm", s.rsa_depth_bpm.to_string()),
            ("synth.resp_amplitude_depth", s.resp_amplitude_depth.to_string()),
            ("synth.resp_timing_depth_ms", s.resp_timing_depth_ms.to_string()),
            ("synth.dropout_prob", s.dropout_prob.to_string()),
            ("synth.seed", s.seed.to_string()),
            ("synth.held_hr_delta_bpm", self.held_hr_delta_bpm.to_string()),
            ("tol_ms", self.tol_ms.to_string()),
            ("classifier", self.classifier.to_string()),
            ("svm_c", p.c.to_string()),
            ("svm_gamma", opt_str(p.gamma, "auto")),
            ("svm_tol", p.tol.to_string()),
            ("lda_ridge", p.lda_ridge.to_string()),
            ("features", features_name(self.features)),
            ("k_folds", self.k_folds.to_string()),
            ("fold_unit", format!("{:?}", self.fold_unit).to_lowercase()),
            ("cv_seed", self.cv_seed.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            writeln!(out, "{k} = {v}").expect("string write");
        }
        out
    }

    /// SHA-256 of the canonical listing, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }
}
