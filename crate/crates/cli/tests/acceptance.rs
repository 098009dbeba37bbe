//! End-to-end acceptance suite: one PASS/FAIL line per criterion, non-zero
//! exit when any criterion fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scg_core::analysis::{
    classify_features, detection_metrics, evaluate_fiducials, record_features, ClassifierKind, ClassifierParams,
    ConfusionCounts, CvSettings, FeatureSelection, FoldUnit, MatchCounts,
};
use scg_core::delineator::rules::{decision_rules, RulePoints};
use scg_core::delineator::{delineate, FIDUCIALS};
use scg_core::envelope::{shannon_envelopes, transfer_envelope};
use scg_core::scalogram::{cwt, default_scales, mrwe_of, scalogram};
use scg_core::synth::{generate, generate_dataset};
use scg_core::{DecisionRuleConfig, DelineatorConfig, EnvelopeModel, SampledSignal, SynthConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < budget, || format!("took {t:.2?}, budget {budget:?}"))?;
    Ok(t)
}

// ---------------------------------------------------------------------------
// 1. Envelope closed form against double-double arithmetic.

#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn from(a: f64) -> Self {
        Dd(a, 0.0)
    }
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }
    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.0, o.0);
        let e = s.1 + self.1 + o.1;
        let h = s.0 + e;
        Dd(h, e - (h - s.0))
    }
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        let h = p + e;
        Dd(h, e - (h - p))
    }
    fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self.add(o.mul(Dd::from(q1)).neg());
        let q2 = r.0 / o.0;
        let r = r.add(o.mul(Dd::from(q2)).neg());
        let q3 = r.0 / o.0;
        Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
    }
    fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// `exp(-t)` for `t` in `[0, 20]`: Taylor series of `exp(-t / 256)` in
/// double-double, squared eight times.
fn exp_neg_dd(t: f64) -> Dd {
    let r = Dd::from(-t).div(Dd::from(256.0));
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    for k in 1..30 {
        term = term.mul(r).div(Dd::from(k as f64));
        sum = sum.add(term);
    }
    for _ in 0..8 {
        sum = sum.mul(sum);
    }
    sum
}

fn envelope_oracle(x: f64, p: f64, q: f64) -> f64 {
    let e = exp_neg_dd(Dd::from(q).mul(Dd::from(x)).value());
    Dd::from(1.0).add(e.neg()).div(Dd::from(1.0).add(Dd::from(p).mul(e))).value()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let sig = SampledSignal::new(grid.clone(), 1000.0, "grid").map_err(|e| e.to_string())?;
    let y = transfer_envelope(&sig, EnvelopeModel::new(39, 16).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (i, (&x, &v)) in grid.iter().zip(&y.samples).enumerate().skip(1) {
        let want = envelope_oracle(x, 39.0, 16.0);
        let rel = ((v - want) / want).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("x = {x} (index {i}): {v} vs {want}, rel {rel:e}"))?;
    }
    ensure(y.samples[0] == 0.0, || format!("y(0) = {}", y.samples[0]))?;
    ensure(y.samples.windows(2).all(|w| w[1] > w[0]), || "not strictly increasing".into())?;
    let t = within_budget(start, Duration::from_secs(1))?;
    Ok(format!("max rel err {worst:.1e}, y(0)=0, increasing, {t:.2?}"))
}

// ---------------------------------------------------------------------------
// 2. Scalogram normalisation and MRWE gain invariance.

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scales = default_scales(1000.0);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = rng.random_range(1600..2400);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let sig = SampledSignal::new(x, 1000.0, "x").map_err(|e| e.to_string())?;
        let coeffs = cwt(&sig, &scales).map_err(|e| e.to_string())?;
        let s = scalogram(&coeffs).map_err(|e| e.to_string())?;
        let dev = (s.total() - 1.0).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-9, || format!("trial {trial}: sum {}", s.total()))?;
        if trial % 10 == 0 {
            let base = mrwe_of(&sig, &scales).map_err(|e| e.to_string())?;
            for gain in [0.25, 2.0, 1024.0, -4.0] {
                let other = mrwe_of(&sig.scaled(gain), &scales).map_err(|e| e.to_string())?;
                ensure(other == base, || format!("trial {trial}: MRWE changed under gain {gain}"))?;
            }
        }
    }
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("max |sum - 1| {worst:.1e} over 100 signals, MRWE identical under gain, {t:.2?}"))
}

// ---------------------------------------------------------------------------
// 3. CWT against direct inner products; self-similarity peak.

fn hat(t: f64) -> f64 {
    2.0 / (3.0f64.sqrt() * std::f64::consts::PI.powf(0.25)) * (1.0 - t * t) * (-t * t / 2.0).exp()
}

fn mirror(j: isize, n: usize) -> usize {
    let n = n as isize;
    let mut j = j;
    while j < 0 || j >= n {
        j = if j < 0 { -j - 1 } else { 2 * n - 1 - j };
    }
    j as usize
}

fn direct_cwt(x: &[f64], fs: f64, scales: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    scales
        .iter()
        .map(|&l| {
            let w = l * fs;
            let half = (5.0 * w).floor() as isize;
            (0..n)
                .map(|m| {
                    (-half..=half).map(|k| x[mirror(m as isize + k, n)] * hat(k as f64 / w) / l.sqrt()).sum::<f64>() / fs
                })
                .collect()
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n = rng.random_range(128..=512);
        let fs = 1000.0;
        let scales: Vec<f64> = (0..rng.random_range(1..=16))
            .map(|_| rng.random_range(1.0..((n - 1) / 10) as f64) / fs)
            .collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = cwt(&SampledSignal::new(x.clone(), fs, "x").map_err(|e| e.to_string())?, &scales).map_err(|e| e.to_string())?;
        let slow = direct_cwt(&x, fs, &scales);
        for (rf, rs) in fast.coefficients.iter().zip(&slow) {
            let peak = rs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in rf.iter().zip(rs) {
                let rel = (a - b).abs() / peak;
                worst = worst.max(rel);
                ensure(rel <= 1e-9, || format!("trial {trial}: {a} vs {b}"))?;
            }
        }
    }
    let scales: Vec<f64> = (2..=40).map(|k| k as f64 / 1000.0).collect();
    for (l0, m0) in [(4usize, 256usize), (10, 180), (18, 300), (28, 256)] {
        let w = scales[l0] * 1000.0;
        let x: Vec<f64> = (0..512).map(|i| hat((i as f64 - m0 as f64) / w)).collect();
        let c = cwt(&SampledSignal::new(x, 1000.0, "x").map_err(|e| e.to_string())?, &scales).map_err(|e| e.to_string())?;
        let mut best = (0, 0, 0.0f64);
        for (s, row) in c.coefficients.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                if v.abs() > best.2 {
                    best = (s, m, v.abs());
                }
            }
        }
        ensure(best.0.abs_diff(l0) <= 1 && best.1.abs_diff(m0) <= 2, || {
            format!("self-similarity peak at ({}, {}), expected ({l0}, {m0})", best.0, best.1)
        })?;
    }
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("max rel err {worst:.1e} over 20 signals, self-similarity peaks located, {t:.2?}"))
}

// ---------------------------------------------------------------------------
// 4. Decision rules against a literal transcription.

fn literal_rules(x: &[f64], fs: f64, pks: &[usize]) -> Vec<RulePoints> {
    let a = (100.0 * fs / 1000.0).round() as usize;
    let b = (200.0 * fs / 1000.0).round() as usize;
    let bins = [(80.0, 100.0), (60.0, 80.0), (40.0, 60.0), (20.0, 40.0), (0.0, 20.0)];
    let peaks = |lo: usize, hi: usize| -> Vec<usize> {
        (lo + 1..hi)
            .filter(|&i| {
                if !(x[i - 1] < x[i]) {
                    return false;
                }
                let j = (i + 1..=hi).find(|&j| x[j] != x[i]);
                j.is_some_and(|j| x[j] < x[i])
            })
            .collect()
    };
    let choose = |cands: &[usize], pk: usize| -> Option<usize> {
        bins.iter().find_map(|&(lo, hi)| {
            let mut best: Option<usize> = None;
            for &p in cands {
                let pct = 100.0 * x[p] / x[pk];
                if pct > lo && pct <= hi && best.is_none_or(|q| p.abs_diff(pk) < q.abs_diff(pk)) {
                    best = Some(p);
                }
            }
            best
        })
    };
    let argmin = |lo: usize, hi: usize| (lo..=hi).fold(lo, |m, i| if x[i] < x[m] { i } else { m });
    pks.iter()
        .filter(|&&pk| pk >= a && pk + b < x.len())
        .map(|&pk| {
            let p1 = choose(&peaks(pk - a, pk), pk).unwrap_or(pk - a);
            let p2 = choose(&peaks(pk, pk + b), pk).unwrap_or(pk + b);
            RulePoints { pk, m1: argmin(p1, pk), m2: argmin(pk, p2) }
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = DecisionRuleConfig::default();
    let mut anchors = 0;
    for trial in 0..1000 {
        let fs = [50.0, 100.0, 250.0, 1000.0][trial % 4];
        let n = rng.random_range(12..=(0.5 * fs) as usize + 12);
        let levels: f64 = [5.0, 10.0, 50.0, 1e6][rng.random_range(0..4)];
        let x: Vec<f64> = (0..n).map(|_| (rng.random_range(-1.0..1.0) * levels).round() / levels).collect();
        let mut pks: Vec<usize> = (0..rng.random_range(1..5)).map(|_| rng.random_range(0..n)).collect();
        pks.sort_unstable();
        pks.dedup();
        let sig = SampledSignal::new(x.clone(), fs, "x").map_err(|e| e.to_string())?;
        let got = decision_rules(&sig, &pks, &cfg).points;
        let want = literal_rules(&x, fs, &pks);
        ensure(got == want, || format!("trial {trial}: {got:?} vs {want:?}"))?;
        anchors += got.len();
    }
    Ok(format!("1000 vectors, {anchors} anchors identical, {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------------------
// 5. Envelope keeps the pulse apex; Shannon energy splits it.

fn criterion_5() -> Outcome {
    let n = 201;
    let c = 100;
    let tri: Vec<f64> = (0..n).map(|i| 1.0 - (i as f64 - c as f64).abs() / c as f64).collect();
    let sig = SampledSignal::new(tri, 1000.0, "tri").map_err(|e| e.to_string())?;
    let env = transfer_envelope(&sig, EnvelopeModel::new(39, 16).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let argmax = (0..n).fold(0, |m, i| if env.samples[i] > env.samples[m] { i } else { m });
    ensure(argmax == c, || format!("envelope maximum at {argmax}, input maximum at {c}"))?;
    let (_, see) = shannon_envelopes(&sig).map_err(|e| e.to_string())?;
    let s = &see.samples;
    ensure(s[c] < s[c - 1] && s[c] < s[c + 1], || format!("SEE around apex: {} {} {}", s[c - 1], s[c], s[c + 1]))?;
    let lobe = (0..c).fold(0, |m, i| if s[i] > s[m] { i } else { m });
    Ok(format!("envelope peak at apex {c}; SEE dips to {:.3} there with lobes at {lobe}", s[c] + 0.0))
}

// ---------------------------------------------------------------------------
// 6 and 7. Synthetic end-to-end detection and interval accuracy.

struct DetectionRun {
    totals: [MatchCounts; 6],
    complete: usize,
    unordered: usize,
    lvet_err: Vec<f64>,
    ivrt_err: Vec<f64>,
    elapsed: Duration,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn detection_run() -> Result<DetectionRun, String> {
    let start = Instant::now();
    let dcfg = DelineatorConfig::default();
    let mut run = DetectionRun {
        totals: [MatchCounts::default(); 6],
        complete: 0,
        unordered: 0,
        lvet_err: Vec::new(),
        ivrt_err: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for k in 0..10u64 {
        let cfg = SynthConfig {
            hr_mean_bpm: 60.0 + 30.0 * k as f64 / 9.0,
            snr_db: 20.0,
            duration_s: 60.0,
            seed: 1000 + k,
            ..Default::default()
        };
        let (scg, ppg, truth) = generate(&cfg).map_err(|e| e.to_string())?;
        let beats = delineate(&scg, &ppg, &dcfg).map_err(|e| e.to_string())?;
        let counts = evaluate_fiducials(&beats, &truth, 50.0).map_err(|e| e.to_string())?;
        for (t, c) in run.totals.iter_mut().zip(counts) {
            *t = *t + c;
        }
        let ms = |a: usize, b: usize| (b as f64 - a as f64) / cfg.fs * 1000.0;
        for b in beats.iter().filter(|b| b.is_complete()) {
            run.complete += 1;
            if !b.is_ordered() {
                run.unordered += 1;
            }
            let ao = b.ao.unwrap_or(0);
            if let Some(t) = truth.beats.iter().find(|t| t.ao.abs_diff(ao) <= 50) {
                run.lvet_err.push((b.lvet_ms.unwrap_or(f64::NAN) - ms(t.ao, t.ac)).abs());
                run.ivrt_err.push((b.ivrt_ms.unwrap_or(f64::NAN) - ms(t.ac, t.mo)).abs());
            }
        }
    }
    run.elapsed = start.elapsed();
    Ok(run)
}

fn criterion_6(run: &Result<DetectionRun, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let mut parts = Vec::new();
    for (k, name) in FIDUCIALS.iter().enumerate() {
        let r = detection_metrics(run.totals[k].tp, run.totals[k].fp, run.totals[k].fn_);
        let (se, pp) = (r.se.unwrap_or(0.0), r.pp.unwrap_or(0.0));
        let floor = if matches!(*name, "AO" | "pAC") { 0.95 } else { 0.90 };
        ensure(se >= floor && pp >= floor, || format!("{name}: Se {se:.4} +P {pp:.4} below {floor}"))?;
        parts.push(format!("{name} {:.1}/{:.1}", 100.0 * se, 100.0 * pp));
    }
    ensure(run.complete > 0 && run.unordered == 0, || {
        format!("{} of {} complete beats out of order", run.unordered, run.complete)
    })?;
    ensure(run.elapsed < Duration::from_secs(60), || format!("took {:.2?}", run.elapsed))?;
    Ok(format!("Se/+P % {}; {} complete beats ordered; {:.2?}", parts.join(", "), run.complete, run.elapsed))
}

fn criterion_7(run: &Result<DetectionRun, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let (l, i) = (median(run.lvet_err.clone()), median(run.ivrt_err.clone()));
    ensure(l <= 20.0 && i <= 20.0, || format!("median |dLVET| {l} ms, |dIVRT| {i} ms"))?;
    Ok(format!("median |dLVET| {l:.1} ms, |dIVRT| {i:.1} ms over {} beats", run.lvet_err.len()))
}

// ---------------------------------------------------------------------------
// 8. Breathlessness classification on the synthetic data set.

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let normal = SynthConfig::default();
    let held = SynthConfig::held_from(&normal);
    let set = generate_dataset(&normal, &held, 8).map_err(|e| e.to_string())?;
    ensure(set.len() == 16, || format!("{} records", set.len()))?;
    let dcfg = DelineatorConfig::default();
    let parts = set
        .iter()
        .map(|r| record_features(&r.scg, &r.ppg, r.truth.label == "breathless", &dcfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let settings = |kind| CvSettings { kind, selection: FeatureSelection::Fixed, k_folds: 10, unit: FoldUnit::Beat, seed: 0 };
    let params = ClassifierParams::default();
    let rbf = classify_features(parts.clone(), &settings(ClassifierKind::SvmRbf), &params).map_err(|e| e.to_string())?;
    let lin = classify_features(parts, &settings(ClassifierKind::SvmLinear), &params).map_err(|e| e.to_string())?;
    let (acc, auc) = (rbf.cv.mean.acc, rbf.roc.auc);
    ensure(acc >= 0.95 && auc >= 0.99, || format!("svm-rbf ACC {acc:.4} AUC {auc:.4}"))?;
    ensure(acc > lin.cv.mean.acc && auc > lin.roc.auc, || {
        format!("svm-rbf ACC {acc:.4} AUC {auc:.4} vs svm-linear ACC {:.4} AUC {:.4}", lin.cv.mean.acc, lin.roc.auc)
    })?;
    let t = within_budget(start, Duration::from_secs(120))?;
    Ok(format!(
        "{} beats; svm-rbf ACC {:.2}% AUC {:.4}; svm-linear ACC {:.2}% AUC {:.4}; {t:.2?}",
        rbf.n_beats,
        100.0 * acc,
        auc,
        100.0 * lin.cv.mean.acc,
        lin.roc.auc
    ))
}

// ---------------------------------------------------------------------------
// 9. Metric arithmetic on fixed count tuples.

fn criterion_9() -> Outcome {
    // (TP, FP, FN) with Se = TP/(TP+FN), +P = TP/(TP+FP), Acc = TP/(TP+FP+FN).
    let detection: [((usize, usize, usize), [Option<f64>; 3]); 20] = [
        ((9, 1, 1), [Some(9.0 / 10.0), Some(9.0 / 10.0), Some(9.0 / 11.0)]),
        ((0, 0, 0), [None, None, None]),
        ((100, 0, 0), [Some(1.0), Some(1.0), Some(1.0)]),
        ((0, 5, 0), [None, Some(0.0), Some(0.0)]),
        ((0, 0, 7), [Some(0.0), None, Some(0.0)]),
        ((1, 1, 1), [Some(1.0 / 2.0), Some(1.0 / 2.0), Some(1.0 / 3.0)]),
        ((3, 0, 1), [Some(3.0 / 4.0), Some(1.0), Some(3.0 / 4.0)]),
        ((3, 1, 0), [Some(1.0), Some(3.0 / 4.0), Some(3.0 / 4.0)]),
        ((57, 2, 3), [Some(57.0 / 60.0), Some(57.0 / 59.0), Some(57.0 / 62.0)]),
        ((60, 0, 1), [Some(60.0 / 61.0), Some(1.0), Some(60.0 / 61.0)]),
        ((1, 0, 0), [Some(1.0), Some(1.0), Some(1.0)]),
        ((2, 3, 5), [Some(2.0 / 7.0), Some(2.0 / 5.0), Some(2.0 / 10.0)]),
        ((10, 10, 10), [Some(1.0 / 2.0), Some(1.0 / 2.0), Some(1.0 / 3.0)]),
        ((99, 1, 0), [Some(1.0), Some(99.0 / 100.0), Some(99.0 / 100.0)]),
        ((0, 1, 1), [Some(0.0), Some(0.0), Some(0.0)]),
        ((7, 0, 0), [Some(1.0), Some(1.0), Some(1.0)]),
        ((5, 5, 0), [Some(1.0), Some(1.0 / 2.0), Some(1.0 / 2.0)]),
        ((5, 0, 5), [Some(1.0 / 2.0), Some(1.0), Some(1.0 / 2.0)]),
        ((740, 0, 4), [Some(740.0 / 744.0), Some(1.0), Some(740.0 / 744.0)]),
        ((12, 4, 8), [Some(12.0 / 20.0), Some(12.0 / 16.0), Some(12.0 / 24.0)]),
    ];
    for ((tp, fp, fn_), want) in detection {
        let r = detection_metrics(tp, fp, fn_);
        ensure([r.se, r.pp, r.acc] == want, || format!("({tp},{fp},{fn_}): {r:?} vs {want:?}"))?;
    }
    // (TP, TN, FP, FN) with ACC, TPR, FPR.
    let classification: [((usize, usize, usize, usize), [Option<f64>; 3]); 20] = [
        ((50, 50, 0, 0), [Some(1.0), Some(1.0), Some(0.0)]),
        ((0, 0, 0, 0), [None, None, None]),
        ((45, 40, 10, 5), [Some(85.0 / 100.0), Some(45.0 / 50.0), Some(10.0 / 50.0)]),
        ((1, 1, 1, 1), [Some(1.0 / 2.0), Some(1.0 / 2.0), Some(1.0 / 2.0)]),
        ((10, 0, 0, 0), [Some(1.0), Some(1.0), None]),
        ((0, 10, 0, 0), [Some(1.0), None, Some(0.0)]),
        ((0, 0, 10, 0), [Some(0.0), None, Some(1.0)]),
        ((0, 0, 0, 10), [Some(0.0), Some(0.0), None]),
        ((546, 576, 11, 0), [Some(1122.0 / 1133.0), Some(1.0), Some(11.0 / 587.0)]),
        ((3, 4, 2, 1), [Some(7.0 / 10.0), Some(3.0 / 4.0), Some(2.0 / 6.0)]),
        ((9, 9, 1, 1), [Some(18.0 / 20.0), Some(9.0 / 10.0), Some(1.0 / 10.0)]),
        ((20, 30, 0, 5), [Some(50.0 / 55.0), Some(20.0 / 25.0), Some(0.0)]),
        ((7, 3, 3, 7), [Some(10.0 / 20.0), Some(7.0 / 14.0), Some(3.0 / 6.0)]),
        ((100, 0, 100, 0), [Some(100.0 / 200.0), Some(1.0), Some(1.0)]),
        ((0, 100, 0, 100), [Some(100.0 / 200.0), Some(0.0), Some(0.0)]),
        ((33, 66, 1, 2), [Some(99.0 / 102.0), Some(33.0 / 35.0), Some(1.0 / 67.0)]),
        ((5, 6, 7, 8), [Some(11.0 / 26.0), Some(5.0 / 13.0), Some(7.0 / 13.0)]),
        ((12, 12, 0, 1), [Some(24.0 / 25.0), Some(12.0 / 13.0), Some(0.0)]),
        ((2, 98, 2, 0), [Some(100.0 / 102.0), Some(1.0), Some(2.0 / 100.0)]),
        ((40, 41, 9, 10), [Some(81.0 / 100.0), Some(40.0 / 50.0), Some(9.0 / 50.0)]),
    ];
    for ((tp, tn, fp, fn_), want) in classification {
        let c = ConfusionCounts { tp, tn, fp, fn_ };
        let got = [c.accuracy(), c.tpr(), c.fpr()];
        ensure(got == want, || format!("({tp},{tn},{fp},{fn_}): {got:?} vs {want:?}"))?;
    }
    Ok("20 detection and 20 classification tuples exact".into())
}

// ---------------------------------------------------------------------------
// 10. CLI determinism.

fn scg(args: &[&str], cwd: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    ensure(out.status.success(), || {
        format!("scg {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn snapshot(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let p = e.map_err(|e| e.to_string())?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).map_err(|e| e.to_string())?;
                files.insert(p.strip_prefix(dir).unwrap_or(&p).to_path_buf(), bytes);
            }
        }
    }
    Ok(files)
}

fn cli_session(root: &Path) -> Result<(BTreeMap<PathBuf, Vec<u8>>, Vec<Vec<u8>>), String> {
    std::fs::create_dir_all(root).map_err(|e| e.to_string())?;
    std::fs::write(root.join("run.cfg"), "synth.duration_s = 20\nk_folds = 5\n").map_err(|e| e.to_string())?;
    let c = ["--config", "run.cfg"];
    let mut stdout = Vec::new();
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth", "--out", "single", "--seed", "42"],
        vec!["synth", "--out", "set", "--mode", "dataset", "--n", "3", "--seed", "42"],
        vec!["delineate", "single/record.csv", "--out", "ann.json"],
        vec!["eval", "ann.json", "single/record.truth.json", "--out", "eval.json"],
        vec!["classify", "set", "--out", "cls", "--seed", "3"],
        vec!["plot", "single/record.csv", "--annotations", "ann.json", "--out", "plot.svg", "--range-s", "2:8"],
    ];
    for step in steps {
        let mut args = step.clone();
        args.extend_from_slice(&c);
        stdout.push(scg(&args, root)?);
    }
    Ok((snapshot(root)?, stdout))
}

fn criterion_10() -> Outcome {
    let tmp = std::env::temp_dir().join(format!("scg-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    let result = (|| {
        let (a, out_a) = cli_session(&tmp.join("a"))?;
        let (b, out_b) = cli_session(&tmp.join("b"))?;
        ensure(a.len() > 10, || format!("only {} output files", a.len()))?;
        ensure(a.keys().eq(b.keys()), || "different file sets".into())?;
        for (k, v) in &a {
            ensure(b[k] == *v, || format!("{} differs between runs", k.display()))?;
        }
        ensure(out_a == out_b, || "stdout differs between runs".into())?;
        Ok(format!("synth, delineate, eval, classify and plot: {} files byte-identical across runs", a.len()))
    })();
    let _ = std::fs::remove_dir_all(&tmp);
    result
}

// ---------------------------------------------------------------------------

fn guarded<T>(f: impl FnOnce() -> Result<T, String> + std::panic::UnwindSafe) -> Result<T, String> {
    std::panic::catch_unwind(f).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    let detection = guarded(detection_run);
    let results: Vec<(&str, Outcome)> = vec![
        ("envelope closed form", guarded(criterion_1)),
        ("scalogram normalisation", guarded(criterion_2)),
        ("cwt oracle", guarded(criterion_3)),
        ("decision-rule oracle", guarded(criterion_4)),
        ("envelope non-bifurcation", guarded(criterion_5)),
        ("synthetic detection", criterion_6(&detection)),
        ("interval accuracy", criterion_7(&detection)),
        ("classification", guarded(criterion_8)),
        ("metric arithmetic", guarded(criterion_9)),
        ("cli determinism", guarded(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
