use super::diastole::{check_synchronized, diastole_from_pac, locate_pac, mask_diastole, DiastoleBeat};
use super::ppg::{detect_ppg_peaks, MIN_PPG_SECONDS};
use super::systole::{delineate_systole, detect_ao, SystoleBeat};
use super::{BeatAnnotation, DelineatorConfig};
use crate::error::{Error, Result};
use crate::signal::{highpass_detrend, lowpass, SampledSignal};
use rayon::prelude::*;

/// Window boundaries `[start, end)`; the last window absorbs the remainder.
fn windows(n: usize, fs: f64, window_s: f64, overlap_s: f64) -> Vec<(usize, usize)> {
    let step = (window_s * fs).round().max(1.0) as usize;
    let overlap = (overlap_s * fs).round() as usize;
    let count = (n / step).max(1);
    (0..count)
        .map(|k| {
            let start = k * step;
            let end = if k + 1 == count { n } else { (start + step + overlap).min(n) };
            (start, end)
        })
        .collect()
}

/// Full delineation of a synchronized SCG/PPG record.
///
/// The record is processed in overlapping windows; beats seen by two windows
/// are reduced to the more complete (then more central) copy.
pub fn delineate(scg: &SampledSignal, ppg: &SampledSignal, cfg: &DelineatorConfig) -> Result<Vec<BeatAnnotation>> {
    cfg.validate()?;
    check_synchronized(scg, ppg)?;
    if cfg.window_s < MIN_PPG_SECONDS {
        return Err(Error::Parameter(format!("window_s must be >= {MIN_PPG_SECONDS} s")));
    }
    let mut scg_d = highpass_detrend(scg, cfg.detrend_cutoff_hz)?;
    let mut ppg = ppg.clone();
    if let Some(fc) = cfg.antialias_lowpass_hz {
        scg_d = lowpass(&scg_d, fc, 4)?;
        ppg = lowpass(&ppg, fc, 4)?;
    }
    let spans = windows(scg.len(), scg.fs, cfg.window_s, cfg.window_overlap_s);
    let per_window: Vec<Vec<(usize, BeatAnnotation)>> = spans
        .par_iter()
        .map(|&(s, e)| {
            let beats = delineate_window(&scg_d.slice(s, e), &ppg.slice(s, e), cfg)?;
            Ok(beats
                .into_iter()
                .map(|b| {
                    let first = b.first().unwrap_or(0);
                    let last = b.last().unwrap_or(0);
                    let margin = first.min((e - s).saturating_sub(last + 1));
                    (margin, b.shifted(s, scg.fs))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(merge_windows(per_window.into_iter().flatten().collect(), cfg.dedup_ms, scg.fs))
}

fn conflicts(a: &BeatAnnotation, b: &BeatAnnotation, tol: usize) -> bool {
    let near = |x: Option<usize>, y: Option<usize>| matches!((x, y), (Some(x), Some(y)) if x.abs_diff(y) < tol);
    near(a.ao, b.ao) || near(a.pac, b.pac) || near(a.ac, b.ac)
}

fn merge_windows(mut beats: Vec<(usize, BeatAnnotation)>, dedup_ms: f64, fs: f64) -> Vec<BeatAnnotation> {
    let tol = (dedup_ms * fs / 1000.0).round() as usize;
    beats.sort_by(|(ma, a), (mb, b)| {
        b.present_count()
            .cmp(&a.present_count())
            .then(mb.cmp(ma))
            .then(a.first().cmp(&b.first()))
    });
    let mut kept: Vec<BeatAnnotation> = Vec::new();
    for (_, b) in beats {
        if !kept.iter().any(|k| conflicts(k, &b, tol)) {
            kept.push(b);
        }
    }
    kept.sort_by_key(|b| b.first());
    kept
}

/// Delineation of one window (already detrended SCG, raw PPG).
pub fn delineate_window(scg: &SampledSignal, ppg: &SampledSignal, cfg: &DelineatorConfig) -> Result<Vec<BeatAnnotation>> {
    let peaks = detect_ppg_peaks(ppg, cfg)?;
    let pacs = locate_pac(scg, &peaks, cfg.pac_half_window_ms)?;
    let diastoles = diastole_from_pac(scg, &pacs, cfg);
    let masked = mask_diastole(scg, &diastoles, cfg.mask_guard_ms)?;
    let aos = detect_ao(&masked, scg, cfg)?;
    let systoles = delineate_systole(&masked, &aos, cfg);
    Ok(pair_beats(&systoles, &diastoles, scg.ms_to_samples(cfg.max_lvet_ms), scg.fs))
}

/// Each systole takes the nearest following unused diastole whose AC comes
/// after its IC and within `max_lvet` of its AO.
fn pair_beats(systoles: &[SystoleBeat], diastoles: &[DiastoleBeat], max_lvet: usize, fs: f64) -> Vec<BeatAnnotation> {
    let mut used = vec![false; diastoles.len()];
    let mut beats = Vec::new();
    for s in systoles {
        let pick = diastoles
            .iter()
            .enumerate()
            .filter(|(k, d)| !used[*k] && d.ac > s.ic && d.ac - s.ao <= max_lvet)
            .min_by_key(|(_, d)| d.ac)
            .map(|(k, _)| k);
        let d = pick.map(|k| {
            used[k] = true;
            diastoles[k]
        });
        beats.push(BeatAnnotation::from_points(
            [Some(s.im), Some(s.ao), Some(s.ic), d.map(|d| d.ac), d.map(|d| d.pac), d.map(|d| d.mo)],
            fs,
        ));
    }
    for (k, d) in diastoles.iter().enumerate() {
        if !used[k] {
            beats.push(BeatAnnotation::from_points([None, None, None, Some(d.ac), Some(d.pac), Some(d.mo)], fs));
        }
    }
    beats.sort_by_key(|b| b.first());
    beats
}
