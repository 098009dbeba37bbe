use super::DelineatorConfig;
use crate::envelope::{impulse_peaks, transfer_envelope};
use crate::error::{Error, Result};
use crate::scalogram::mrwe_of;
use crate::signal::{
    extrema_indices, highpass_detrend, lowpass, min_max, normalize_unit, ExtremaKind, ExtremaList,
    NormalizeMode, SampledSignal,
};

pub(crate) const MIN_PPG_SECONDS: f64 = 3.0;

/// Systolic PPG apices.
///
/// The detrended PPG `d` is summed with its MRWE series rescaled onto the
/// range of `d`; the sum is min-max normalised, passed through the envelope
/// model and thresholded into impulses, which are finally moved onto the
/// tallest local maximum of `d` nearby.
pub fn detect_ppg_peaks(ppg: &SampledSignal, cfg: &DelineatorConfig) -> Result<ExtremaList> {
    let need = (MIN_PPG_SECONDS * ppg.fs).round() as usize;
    if ppg.len() < need {
        return Err(Error::Input(format!(
            "PPG record of {:.3} s is shorter than {MIN_PPG_SECONDS} s",
            ppg.duration_s()
        )));
    }
    let empty = ExtremaList::new(vec![], ExtremaKind::Maxima);
    let (lo, hi) = min_max(&ppg.samples);
    if lo == hi {
        return Ok(empty);
    }
    let mut d = highpass_detrend(ppg, cfg.detrend_cutoff_hz)?;
    if let Some(fc) = cfg.antialias_lowpass_hz {
        d = lowpass(&d, fc, 4)?;
    }
    let (dlo, dhi) = min_max(&d.samples);
    if dlo == dhi {
        return Ok(empty);
    }
    let r = mrwe_of(&d, &cfg.scales())?;
    let (rlo, rhi) = min_max(&r.values);
    let rescaled: Vec<f64> = if rhi > rlo {
        r.values.iter().map(|v| dlo + (v - rlo) / (rhi - rlo) * (dhi - dlo)).collect()
    } else {
        vec![dlo; r.values.len()]
    };
    let sum = d.with_samples(d.samples.iter().zip(&rescaled).map(|(a, b)| a + b).collect());
    let unit = normalize_unit(&sum, NormalizeMode::MinMax)?;
    let env = transfer_envelope(&unit, cfg.envelope)?;
    let impulses = impulse_peaks(&env, cfg.threshold_frac, cfg.ppg_refractory_ms)?;

    let maxima = extrema_indices(&d.samples, ExtremaKind::Maxima);
    let radius = d.ms_to_samples(cfg.ppg_relocate_ms);
    let mut out: Vec<usize> = impulses.iter().map(|c| tallest_within(&maxima, &d.samples, c, radius).unwrap_or(c)).collect();
    out.dedup();
    Ok(ExtremaList::new(out, ExtremaKind::Maxima))
}

/// Tallest of the sorted `candidates` within `radius` of `at`; ties go to
/// the one nearer `at`, then to the earlier index.
pub(crate) fn tallest_within(candidates: &[usize], x: &[f64], at: usize, radius: usize) -> Option<usize> {
    let lo = candidates.partition_point(|&c| c + radius < at);
    candidates[lo..]
        .iter()
        .take_while(|&&c| c <= at + radius)
        .copied()
        .reduce(|best, c| {
            let better = x[c] > x[best] || (x[c] == x[best] && c.abs_diff(at) < best.abs_diff(at));
            if better {
                c
            } else {
                best
            }
        })
}
