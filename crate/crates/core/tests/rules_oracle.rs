use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scg_core::delineator::rules::{decision_rules, RulePoints};
use scg_core::{DecisionRuleConfig, SampledSignal};

/// Peaks of `x[lo..=hi]` strictly inside the block; a flat top counts at its
/// first sample when both neighbours are lower.
fn block_peaks(x: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut peaks = Vec::new();
    for i in lo + 1..hi {
        if !(x[i - 1] < x[i]) {
            continue;
        }
        let mut j = i + 1;
        while j <= hi && x[j] == x[i] {
            j += 1;
        }
        if j <= hi && x[j] < x[i] {
            peaks.push(i);
        }
    }
    peaks
}

/// Straight transcription of the block procedure: scan bins from the top,
/// take the member nearest the anchor, then the first minimum between.
fn literal(x: &[f64], fs: f64, pks: &[usize], block_a_ms: f64, block_b_ms: f64) -> Vec<RulePoints> {
    let a = (block_a_ms * fs / 1000.0).round() as usize;
    let b = (block_b_ms * fs / 1000.0).round() as usize;
    let bins = [(80.0, 100.0), (60.0, 80.0), (40.0, 60.0), (20.0, 40.0), (0.0, 20.0)];
    let pick = |peaks: &[usize], pk: usize| -> Option<usize> {
        for (lo, hi) in bins {
            let mut found: Option<usize> = None;
            for &p in peaks {
                let pct = 100.0 * x[p] / x[pk];
                if pct > lo && pct <= hi && found.is_none_or(|f| p.abs_diff(pk) < f.abs_diff(pk)) {
                    found = Some(p);
                }
            }
            if found.is_some() {
                return found;
            }
        }
        None
    };
    let first_min = |lo: usize, hi: usize| -> usize {
        let mut m = lo;
        for i in lo..=hi {
            if x[i] < x[m] {
                m = i;
            }
        }
        m
    };
    let mut out = Vec::new();
    for &pk in pks {
        if pk < a || pk + b >= x.len() {
            continue;
        }
        let p1 = pick(&block_peaks(x, pk - a, pk), pk).unwrap_or(pk - a);
        let p2 = pick(&block_peaks(x, pk, pk + b), pk).unwrap_or(pk + b);
        out.push(RulePoints { pk, m1: first_min(p1, pk), m2: first_min(pk, p2) });
    }
    out
}

#[test]
fn matches_literal_procedure_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = DecisionRuleConfig::default();
    for trial in 0..1000 {
        let fs = [50.0, 100.0, 200.0, 1000.0][trial % 4];
        let n = rng.random_range(10..=(0.6 * fs) as usize + 10);
        // Coarse levels make ties, plateaus and exact bin edges common.
        let levels: f64 = [5.0, 10.0, 20.0, 1000.0][rng.random_range(0..4)];
        let x: Vec<f64> = (0..n).map(|_| (rng.random_range(-1.0..1.0) * levels).round() / levels).collect();
        let mut pks: Vec<usize> = (0..rng.random_range(1..4)).map(|_| rng.random_range(0..n)).collect();
        pks.sort_unstable();
        pks.dedup();
        let sig = SampledSignal::new(x.clone(), fs, "x").unwrap();
        let got = decision_rules(&sig, &pks, &cfg);
        let want = literal(&x, fs, &pks, cfg.block_a_ms, cfg.block_b_ms);
        assert_eq!(got.points, want, "trial {trial}: x={x:?} pks={pks:?}");
        assert_eq!(got.points.len() + got.skipped.len(), pks.len());
    }
}

#[test]
fn exact_bin_edges_follow_half_open_intervals() {
    let fs = 100.0;
    let mut x = vec![0.0; 40];
    x[15] = 1.0;
    // 80 % lands in the second bin, so the nearer 0.8 loses to the 0.85.
    x[8] = 0.85;
    x[12] = 0.8;
    x[11] = 0.79;
    x[10] = -0.5;
    x[13] = -0.2;
    let sig = SampledSignal::new(x.clone(), fs, "x").unwrap();
    let got = decision_rules(&sig, &[15], &DecisionRuleConfig::default());
    assert_eq!(got.points, literal(&x, fs, &[15], 100.0, 200.0));
    assert_eq!(got.points[0].m1, 10);
}
