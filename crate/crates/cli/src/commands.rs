use crate::io::{read_text, to_json, write_atomic};
use crate::plot::{render_svg, sample_span};
use crate::SynthMode;
use rayon::prelude::*;
use scg_core::analysis::{
    classify_features, evaluate_fiducials, record_features, CvSettings, DetectionReport, FeatureMatrix,
};
use scg_core::config::RunConfig;
use scg_core::delineator::{delineate as run_delineation, FIDUCIALS};
use scg_core::formats::{
    parse_record, truth_from_json, truth_to_json, write_record, AnnotationFile, AnnotationMeta, RecordFile,
};
use scg_core::synth::{generate, generate_dataset};
use scg_core::{Error, GroundTruth, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn meta(cfg: &RunConfig) -> AnnotationMeta {
    AnnotationMeta { tool_version: TOOL_VERSION.to_string(), config_hash: cfg.hash() }
}

fn load_record(path: &Path) -> Result<RecordFile> {
    parse_record(&read_text(path)?).map_err(|e| e.context(path.display()))
}

pub fn delineate(cfg: &RunConfig, record: &Path, out: &Path) -> Result<()> {
    let rec = load_record(record)?;
    let beats = run_delineation(&rec.scg, &rec.ppg, &cfg.delineator)?;
    log::info!("{}: {} beats", record.display(), beats.len());
    let file = AnnotationFile { fs: rec.fs, beats, meta: meta(cfg) };
    write_atomic(out, &file.to_json()?)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub label: String,
    pub record: String,
    pub truth: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub meta: AnnotationMeta,
    pub records: Vec<ManifestEntry>,
}

fn write_synth_record(
    dir: &Path,
    name: &str,
    scg: &scg_core::SampledSignal,
    ppg: &scg_core::SampledSignal,
    truth: &GroundTruth,
) -> Result<ManifestEntry> {
    let record = format!("{name}.csv");
    let truth_file = format!("{name}.truth.json");
    write_atomic(&dir.join(&record), &write_record(ppg, scg, None)?)?;
    write_atomic(&dir.join(&truth_file), &truth_to_json(truth)?)?;
    Ok(ManifestEntry { name: name.to_string(), label: truth.label.clone(), record, truth: truth_file })
}

pub fn synth(cfg: &RunConfig, out: &Path, mode: SynthMode, n: usize) -> Result<()> {
    let records = match mode {
        SynthMode::Single => {
            let (scg, ppg, truth) = generate(&cfg.synth)?;
            vec![write_synth_record(out, "record", &scg, &ppg, &truth)?]
        }
        SynthMode::Dataset => {
            let set = generate_dataset(&cfg.synth, &cfg.held_synth(), n)?;
            set.par_iter()
                .map(|r| write_synth_record(out, &r.name, &r.scg, &r.ppg, &r.truth))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let manifest = Manifest { meta: meta(cfg), records };
    write_atomic(&out.join("manifest.json"), &to_json(&manifest)?)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FiducialScore {
    pub name: String,
    #[serde(flatten)]
    pub report: DetectionReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub meta: AnnotationMeta,
    pub tol_ms: f64,
    pub fiducials: Vec<FiducialScore>,
    /// Median absolute interval error over beats whose AO matched the truth.
    pub median_abs_lvet_error_ms: Option<f64>,
    pub median_abs_ivrt_error_ms: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn interval_errors(ann: &AnnotationFile, truth: &GroundTruth, tol_ms: f64) -> (Option<f64>, Option<f64>) {
    let tol = (tol_ms * truth.fs / 1000.0).round() as usize;
    let (mut lvet, mut ivrt) = (Vec::new(), Vec::new());
    for b in &ann.beats {
        let Some(ao) = b.ao.or(b.pac) else { continue };
        let key = |t: &scg_core::synth::TrueBeat| if b.ao.is_some() { t.ao } else { t.pac };
        let Some(t) = truth.beats.iter().min_by_key(|t| key(t).abs_diff(ao)) else { continue };
        if key(t).abs_diff(ao) > tol {
            continue;
        }
        let ms = |a: usize, c: usize| (c as f64 - a as f64) / truth.fs * 1000.0;
        if let Some(v) = b.lvet_ms {
            lvet.push((v - ms(t.ao, t.ac)).abs());
        }
        if let Some(v) = b.ivrt_ms {
            ivrt.push((v - ms(t.ac, t.mo)).abs());
        }
    }
    (median(lvet), median(ivrt))
}

pub fn eval_table(report: &EvalReport) -> String {
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}", 100.0 * x));
    let mut s = String::new();
    let _ = writeln!(s, "{:<6}{:>7}{:>7}{:>7}{:>9}{:>9}{:>9}", "point", "TP", "FP", "FN", "Se(%)", "+P(%)", "Acc(%)");
    for f in &report.fiducials {
        let c = &f.report.counts;
        let _ = writeln!(
            s,
            "{:<6}{:>7}{:>7}{:>7}{:>9}{:>9}{:>9}",
            f.name,
            c.tp,
            c.fp,
            c.fn_,
            pct(f.report.se),
            pct(f.report.pp),
            pct(f.report.acc)
        );
    }
    let ms = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1} ms"));
    let _ = writeln!(s, "median |LVET error| {}", ms(report.median_abs_lvet_error_ms));
    let _ = writeln!(s, "median |IVRT error| {}", ms(report.median_abs_ivrt_error_ms));
    s
}

pub fn eval(cfg: &RunConfig, annotations: &Path, truth: &Path, out: Option<&Path>) -> Result<()> {
    let ann = AnnotationFile::from_json(&read_text(annotations)?, None)?;
    let truth = truth_from_json(&read_text(truth)?)?;
    if (ann.fs - truth.fs).abs() > 1e-9 * truth.fs {
        return Err(Error::Precondition(format!("annotation fs {} differs from truth fs {}", ann.fs, truth.fs)));
    }
    let counts = evaluate_fiducials(&ann.beats, &truth, cfg.tol_ms)?;
    let fiducials = FIDUCIALS
        .iter()
        .zip(counts)
        .map(|(name, c)| FiducialScore { name: name.to_string(), report: c.into() })
        .collect();
    let (lvet, ivrt) = interval_errors(&ann, &truth, cfg.tol_ms);
    let report = EvalReport {
        meta: meta(cfg),
        tol_ms: cfg.tol_ms,
        fiducials,
        median_abs_lvet_error_ms: lvet,
        median_abs_ivrt_error_ms: ivrt,
    };
    print!("{}", eval_table(&report));
    if let Some(path) = out {
        write_atomic(path, &to_json(&report)?)?;
    }
    Ok(())
}

fn parse_label(label: &str, path: &Path) -> Result<bool> {
    match label {
        "normal" => Ok(false),
        "breathless" => Ok(true),
        other => Err(Error::Parse(format!("{}: unknown class label '{other}'", path.display()))),
    }
}

/// `(record path, breathless)` for every CSV record in `dir`, by file name.
fn labelled_records(dir: &Path) -> Result<Vec<(PathBuf, bool)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut records: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    records.sort();
    if records.is_empty() {
        return Err(Error::Input(format!("no .csv records in {}", dir.display())));
    }
    records
        .into_iter()
        .map(|p| {
            let truth_path = p.with_extension("truth.json");
            let truth = truth_from_json(&read_text(&truth_path)?)?;
            let label = parse_label(&truth.label, &truth_path)?;
            Ok((p, label))
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct ClassifyOutput<'a> {
    meta: AnnotationMeta,
    records: Vec<String>,
    #[serde(flatten)]
    report: &'a scg_core::analysis::ClassificationReport,
}

pub fn classify_table(r: &scg_core::analysis::ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "classifier {}  features {}", r.classifier, r.features.join(","));
    let _ = writeln!(s, "records {}  beats {}  breathless beats {}", r.n_records, r.n_beats, r.n_breathless);
    let _ = writeln!(s, "{:<8}{:>10}{:>10}", "metric", "mean(%)", "sd(%)");
    for (name, m, d) in [
        ("ACC", r.cv.mean.acc, r.cv.sd.acc),
        ("TPR", r.cv.mean.tpr, r.cv.sd.tpr),
        ("FPR", r.cv.mean.fpr, r.cv.sd.fpr),
    ] {
        let _ = writeln!(s, "{:<8}{:>10.2}{:>10.2}", name, 100.0 * m, 100.0 * d);
    }
    let _ = writeln!(s, "AUC {:.4}", r.roc.auc);
    s
}

pub fn classify(cfg: &RunConfig, dir: &Path, out: &Path) -> Result<()> {
    let records = labelled_records(dir)?;
    let parts: Vec<FeatureMatrix> = records
        .par_iter()
        .map(|(path, breathless)| {
            let rec = load_record(path)?;
            record_features(&rec.scg, &rec.ppg, *breathless, &cfg.delineator)
                .map_err(|e| e.context(path.display()))
        })
        .collect::<Result<_>>()?;
    for ((path, _), part) in records.iter().zip(&parts) {
        log::info!("{}: {} feature rows", path.display(), part.len());
    }
    let settings = CvSettings {
        kind: cfg.classifier,
        selection: cfg.features,
        k_folds: cfg.k_folds,
        unit: cfg.fold_unit,
        seed: cfg.cv_seed,
    };
    let report = classify_features(parts, &settings, &cfg.classifier_params)?;

    let names = records
        .iter()
        .map(|(p, _)| p.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let output = ClassifyOutput { meta: meta(cfg), records: names, report: &report };
    write_atomic(&out.join("report.json"), &to_json(&output)?)?;
    let table = classify_table(&report);
    write_atomic(&out.join("report.txt"), &table)?;

    let mut roc = String::from("fpr,tpr\n");
    for (f, t) in &report.roc.points {
        let _ = writeln!(roc, "{f},{t}");
    }
    write_atomic(&out.join("roc.csv"), &roc)?;

    let mut features = String::from("feature,normal_mean,normal_sd,breathless_mean,breathless_sd\n");
    for f in &report.summary {
        let _ = writeln!(
            features,
            "{},{},{},{},{}",
            f.name, f.normal_mean, f.normal_sd, f.breathless_mean, f.breathless_sd
        );
    }
    write_atomic(&out.join("features.csv"), &features)?;
    print!("{table}");
    Ok(())
}

pub fn plot(record: &Path, annotations: Option<&Path>, out: &Path, range_s: Option<(f64, f64)>) -> Result<()> {
    let rec = load_record(record)?;
    let beats = match annotations {
        Some(p) => AnnotationFile::from_json(&read_text(p)?, Some(rec.scg.len()))?.beats,
        None => Vec::new(),
    };
    let (start, end, clipped) = sample_span(rec.scg.len(), rec.fs, rec.t0, range_s);
    if clipped {
        log::warn!("plot range clipped to the record bounds");
    }
    if end - start < 2 {
        return Err(Error::Input("plot range holds fewer than two samples".into()));
    }
    write_atomic(out, &render_svg(&rec, &beats, start, end))
}

