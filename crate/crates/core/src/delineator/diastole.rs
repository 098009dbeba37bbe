use super::ppg::detect_ppg_peaks;
use super::rules::decision_rules;
use super::DelineatorConfig;
use crate::error::{Error, Result};
use crate::signal::{ExtremaKind, ExtremaList, SampledSignal};

/// AC, pAC and MO of one diastole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiastoleBeat {
    pub ac: usize,
    pub pac: usize,
    pub mo: usize,
}

/// pAC is the SCG maximum inside a symmetric window around each PPG apex.
///
/// Apices whose window leaves the record are dropped; apices that land on
/// the same SCG maximum yield one pAC.
pub fn locate_pac(scg: &SampledSignal, ppg_peaks: &ExtremaList, half_window_ms: f64) -> Result<ExtremaList> {
    if !(half_window_ms > 0.0) {
        return Err(Error::Parameter(format!("half_window_ms must be > 0, got {half_window_ms}")));
    }
    let w = scg.ms_to_samples(half_window_ms);
    let x = &scg.samples;
    let mut out = Vec::new();
    for p in ppg_peaks.iter() {
        if p < w || p + w >= x.len() {
            continue;
        }
        let mut best = p - w;
        for i in p - w..=p + w {
            if x[i] > x[best] {
                best = i;
            }
        }
        out.push(best);
    }
    out.sort_unstable();
    out.dedup();
    Ok(ExtremaList::new(out, ExtremaKind::Maxima))
}

/// Diastole fiducials from pAC anchors and the decision rules.
pub(crate) fn diastole_from_pac(scg: &SampledSignal, pacs: &ExtremaList, cfg: &DelineatorConfig) -> Vec<DiastoleBeat> {
    decision_rules(scg, &pacs.indices, &cfg.rules)
        .points
        .into_iter()
        .filter(|p| p.m1 < p.pk && p.pk < p.m2)
        .map(|p| DiastoleBeat { ac: p.m1, pac: p.pk, mo: p.m2 })
        .collect()
}

pub fn delineate_diastole(scg: &SampledSignal, ppg: &SampledSignal, cfg: &DelineatorConfig) -> Result<Vec<DiastoleBeat>> {
    check_synchronized(scg, ppg)?;
    let peaks = detect_ppg_peaks(ppg, cfg)?;
    let pacs = locate_pac(scg, &peaks, cfg.pac_half_window_ms)?;
    Ok(diastole_from_pac(scg, &pacs, cfg))
}

pub(crate) fn check_synchronized(scg: &SampledSignal, ppg: &SampledSignal) -> Result<()> {
    if scg.fs != ppg.fs || scg.len() != ppg.len() {
        return Err(Error::Input(format!(
            "SCG ({} samples @ {} Hz) and PPG ({} samples @ {} Hz) are not synchronized",
            scg.len(),
            scg.fs,
            ppg.len(),
            ppg.fs
        )));
    }
    Ok(())
}

/// SCG with diastoles zeroed, and the zeroed index ranges (inclusive,
/// merged, sorted).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedScg {
    pub signal: SampledSignal,
    pub intervals: Vec<(usize, usize)>,
}

impl MaskedScg {
    pub fn is_masked(&self, i: usize) -> bool {
        let pos = self.intervals.partition_point(|&(_, e)| e < i);
        self.intervals.get(pos).is_some_and(|&(s, _)| s <= i)
    }

    /// Masked interval ending right before `i`, and the one starting right
    /// after it.
    pub(crate) fn neighbours(&self, i: usize) -> (Option<(usize, usize)>, Option<(usize, usize)>) {
        let pos = self.intervals.partition_point(|&(_, e)| e < i);
        let prev = pos.checked_sub(1).map(|k| self.intervals[k]);
        let next = self.intervals.get(pos).copied().filter(|&(s, _)| s > i);
        (prev, next)
    }
}

/// Zeroes `[ac - guard, mo + guard]` for every beat; overlapping regions merge.
pub fn mask_diastole(scg: &SampledSignal, beats: &[DiastoleBeat], guard_ms: f64) -> Result<MaskedScg> {
    if !(guard_ms >= 0.0) {
        return Err(Error::Parameter(format!("guard_ms must be >= 0, got {guard_ms}")));
    }
    let g = scg.ms_to_samples(guard_ms);
    let n = scg.len();
    let mut ranges: Vec<(usize, usize)> = beats
        .iter()
        .filter(|b| b.ac < n)
        .map(|b| (b.ac.saturating_sub(g), (b.mo + g).min(n.saturating_sub(1))))
        .collect();
    ranges.sort_unstable();
    let mut intervals: Vec<(usize, usize)> = Vec::with_capacity(ranges.len());
    for (s, e) in ranges {
        match intervals.last_mut() {
            Some(last) if s <= last.1 + 1 => last.1 = last.1.max(e),
            _ => intervals.push((s, e)),
        }
    }
    let mut samples = scg.samples.clone();
    for &(s, e) in &intervals {
        samples[s..=e].iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(MaskedScg { signal: scg.with_samples(samples), intervals })
}
