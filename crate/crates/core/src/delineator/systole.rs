use super::diastole::MaskedScg;
use super::ppg::tallest_within;
use super::rules::{decision_rules_spans, BlockSpan};
use super::DelineatorConfig;
use crate::envelope::{impulse_peaks, transfer_envelope};
use crate::error::Result;
use crate::signal::{
    bandpass, extrema_indices, min_max, upper_envelope, ExtremaKind, ExtremaList, NormalizeMode, SampledSignal,
};

/// IM, AO and IC of one systole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystoleBeat {
    pub im: usize,
    pub ao: usize,
    pub ic: usize,
}

/// AO instants on a diastole-masked SCG.
///
/// The masked SCG is band-limited to the systolic band, its analytic
/// envelope squared, normalised and passed through the envelope model; the
/// resulting impulses are moved onto the tallest unmasked local maximum of
/// `original` within `ao_correction_ms`.
pub fn detect_ao(masked: &MaskedScg, original: &SampledSignal, cfg: &DelineatorConfig) -> Result<ExtremaList> {
    let empty = ExtremaList::new(vec![], ExtremaKind::Maxima);
    let sig = &masked.signal;
    if sig.samples.iter().all(|&v| v == 0.0) {
        return Ok(empty);
    }
    let band = bandpass(sig, cfg.systole_low_hz, cfg.systole_high_hz, cfg.systole_order)?;
    let env = upper_envelope(&band)?;
    let energy: Vec<f64> = env.samples.iter().map(|e| e * e).collect();
    let (lo, hi) = min_max(&energy);
    if hi == lo {
        return Ok(empty);
    }
    let unit = crate::signal::normalize_unit(&env.with_samples(energy), NormalizeMode::MinMax)?;
    let shaped = transfer_envelope(&unit, cfg.envelope)?;
    let impulses = impulse_peaks(&shaped, cfg.threshold_frac, cfg.refractory_ms)?;

    let maxima: Vec<usize> = extrema_indices(&original.samples, ExtremaKind::Maxima)
        .into_iter()
        .filter(|&i| !masked.is_masked(i))
        .collect();
    let radius = original.ms_to_samples(cfg.ao_correction_ms);
    let mut out: Vec<usize> = impulses
        .iter()
        .filter(|&c| !masked.is_masked(c))
        .map(|c| tallest_within(&maxima, &original.samples, c, radius).unwrap_or(c))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(ExtremaList::new(out, ExtremaKind::Maxima))
}

/// IM and IC from the decision rules on the masked SCG, with blocks cut at
/// the neighbouring masked regions.
pub fn delineate_systole(masked: &MaskedScg, aos: &ExtremaList, cfg: &DelineatorConfig) -> Vec<SystoleBeat> {
    let sig = &masked.signal;
    let n = sig.len();
    let a = sig.ms_to_samples(cfg.rules.block_a_ms);
    let b = sig.ms_to_samples(cfg.rules.block_b_ms);
    let spans: Vec<BlockSpan> = aos
        .iter()
        .filter_map(|ao| {
            if ao < a || ao + b >= n || masked.is_masked(ao) {
                return None;
            }
            let (prev, next) = masked.neighbours(ao);
            let start = prev.map_or(ao - a, |(_, e)| (ao - a).max(e + 1));
            let end = next.map_or(ao + b, |(s, _)| (ao + b).min(s - 1));
            (start < ao && ao < end).then_some(BlockSpan { pk: ao, start, end })
        })
        .collect();
    decision_rules_spans(&sig.samples, &spans, &cfg.rules)
        .into_iter()
        .filter(|p| p.m1 < p.pk && p.pk < p.m2)
        .map(|p| SystoleBeat { im: p.m1, ao: p.pk, ic: p.m2 })
        .collect()
}
