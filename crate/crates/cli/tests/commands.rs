use scg_core::formats::{truth_from_json, AnnotationFile, AnnotationMeta};
use scg_core::BeatAnnotation;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Workspace(PathBuf);

impl Workspace {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("scg-cli-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("short.cfg"), "synth.duration_s = 20\n").unwrap();
        Workspace(dir)
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.0.join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_scg")).args(args).current_dir(&self.0).output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(out.status.success(), "scg {args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn read(&self, rel: &str) -> String {
        std::fs::read_to_string(self.path(rel)).unwrap()
    }
}

impl Drop for Workspace {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not JSON: {stderr}"))
}

fn annotations_from_truth(truth_path: &Path) -> AnnotationFile {
    let truth = truth_from_json(&std::fs::read_to_string(truth_path).unwrap()).unwrap();
    let beats = truth
        .beats
        .iter()
        .map(|b| BeatAnnotation::from_points(b.points().map(Some), truth.fs))
        .collect();
    AnnotationFile { fs: truth.fs, beats, meta: AnnotationMeta { tool_version: "test".into(), config_hash: String::new() } }
}

#[test]
fn synth_single_record_shape() {
    let ws = Workspace::new("synth");
    ws.ok(&["synth", "--out", "one", "--seed", "42"]);
    let csv = ws.read("one/record.csv");
    assert_eq!(csv.lines().next(), Some("t,ppg,scg"));
    assert_eq!(csv.lines().count() - 1, 60_001);
    let manifest: Value = serde_json::from_str(&ws.read("one/manifest.json")).unwrap();
    assert_eq!(manifest["records"][0]["label"], "normal");
    assert_eq!(manifest["meta"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn synth_dataset_has_both_classes() {
    let ws = Workspace::new("dataset");
    ws.ok(&["synth", "--config", "short.cfg", "--out", "set", "--mode", "dataset", "--n", "8"]);
    let manifest: Value = serde_json::from_str(&ws.read("set/manifest.json")).unwrap();
    let records = manifest["records"].as_array().unwrap();
    assert_eq!(records.len(), 16);
    assert_eq!(records.iter().filter(|r| r["label"] == "breathless").count(), 8);
    for r in records {
        assert!(ws.path(&format!("set/{}", r["record"].as_str().unwrap())).exists());
    }
}

#[test]
fn delineate_and_eval_round_trip() {
    let ws = Workspace::new("delineate");
    ws.ok(&["synth", "--config", "short.cfg", "--out", "one", "--seed", "7"]);
    ws.ok(&["delineate", "one/record.csv", "--out", "ann.json"]);
    let ann = AnnotationFile::from_json(&ws.read("ann.json"), None).unwrap();
    let truth = truth_from_json(&ws.read("one/record.truth.json")).unwrap();
    let complete = ann.beats.iter().filter(|b| b.is_complete()).count();
    assert!(complete.abs_diff(truth.beats.len()) <= 1, "{complete} vs {}", truth.beats.len());
    assert_eq!(ann.to_json().unwrap(), ws.read("ann.json"));

    let table = ws.ok(&["eval", "ann.json", "one/record.truth.json", "--out", "eval.json", "--tol-ms", "50"]);
    assert!(table.starts_with("point"));
    assert_eq!(table.lines().filter(|l| l.starts_with("AO ")).count(), 1);
    let report: Value = serde_json::from_str(&ws.read("eval.json")).unwrap();
    let fid = report["fiducials"].as_array().unwrap();
    assert_eq!(fid.len(), 6);
    assert_eq!(fid[4]["name"], "pAC");
    let tp = fid[1]["tp"].as_u64().unwrap();
    let fn_ = fid[1]["fn"].as_u64().unwrap();
    assert_eq!(fid[1]["se"].as_f64().unwrap(), tp as f64 / (tp + fn_) as f64);
}

#[test]
fn eval_of_truth_is_perfect_and_of_nothing_is_zero() {
    let ws = Workspace::new("eval");
    ws.ok(&["synth", "--config", "short.cfg", "--out", "one"]);
    let perfect = annotations_from_truth(&ws.path("one/record.truth.json"));
    std::fs::write(ws.path("perfect.json"), perfect.to_json().unwrap()).unwrap();
    ws.ok(&["eval", "perfect.json", "one/record.truth.json", "--out", "p.json"]);
    let report: Value = serde_json::from_str(&ws.read("p.json")).unwrap();
    for f in report["fiducials"].as_array().unwrap() {
        assert_eq!(f["se"], 1.0);
        assert_eq!(f["pp"], 1.0);
        assert_eq!(f["acc"], 1.0);
    }
    assert_eq!(report["median_abs_lvet_error_ms"], 0.0);

    let empty = AnnotationFile { beats: Vec::new(), ..perfect };
    std::fs::write(ws.path("empty.json"), empty.to_json().unwrap()).unwrap();
    ws.ok(&["eval", "empty.json", "one/record.truth.json", "--out", "e.json"]);
    let report: Value = serde_json::from_str(&ws.read("e.json")).unwrap();
    for f in report["fiducials"].as_array().unwrap() {
        assert_eq!(f["se"], 0.0);
        assert_eq!(f["tp"], 0);
    }
}

#[test]
fn window_length_flag_is_honoured() {
    let ws = Workspace::new("window");
    std::fs::write(ws.path("clean.cfg"), "synth.snr_db = inf\nsynth.ppg_snr_db = inf\n").unwrap();
    ws.ok(&["synth", "--config", "clean.cfg", "--out", "one", "--seed", "3"]);
    ws.ok(&["delineate", "one/record.csv", "--out", "ten.json"]);
    ws.ok(&["delineate", "one/record.csv", "--out", "five.json", "--window-s", "5"]);
    let ten = AnnotationFile::from_json(&ws.read("ten.json"), None).unwrap();
    let five = AnnotationFile::from_json(&ws.read("five.json"), None).unwrap();
    assert_ne!(ten.meta.config_hash, five.meta.config_hash);
    let shared = ten.beats.iter().filter(|b| five.beats.contains(b)).count();
    assert!(shared + 2 >= ten.beats.len(), "{shared} of {}", ten.beats.len());
}

#[test]
fn malformed_inputs_exit_with_parse_code() {
    let ws = Workspace::new("errors");
    std::fs::write(ws.path("noscg.csv"), "t,ppg\n0,1\n0.001,2\n0.002,3\n").unwrap();
    let out = ws.run(&["delineate", "noscg.csv", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "parse");
    assert!(!ws.path("x.json").exists());

    std::fs::write(ws.path("backwards.csv"), "t,ppg,scg\n0,1,1\n0.001,2,2\n0.0005,3,3\n").unwrap();
    let out = ws.run(&["delineate", "backwards.csv", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out)["error"]["message"].as_str().unwrap().contains("line 4"));

    std::fs::write(ws.path("bad.cfg"), "window_s = 10\nno_such_key = 1\n").unwrap();
    let out = ws.run(&["delineate", "backwards.csv", "--config", "bad.cfg", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out)["error"]["message"].as_str().unwrap().contains("config line 2"));
}

#[test]
fn short_record_is_a_precondition_error() {
    let ws = Workspace::new("short");
    let mut csv = String::from("t,ppg,scg\n");
    for i in 0..1000 {
        csv.push_str(&format!("{},{},{}\n", i as f64 / 1000.0, (i as f64 * 0.01).sin(), (i as f64 * 0.1).sin()));
    }
    std::fs::write(ws.path("short.csv"), csv).unwrap();
    let out = ws.run(&["delineate", "short.csv", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn classify_outputs_and_errors() {
    let ws = Workspace::new("classify");
    ws.ok(&["synth", "--config", "short.cfg", "--out", "set", "--mode", "dataset", "--n", "3"]);
    let table = ws.ok(&["classify", "set", "--out", "cls", "--classifier", "knn-fine", "--k-folds", "5"]);
    assert!(table.contains("knn-5"));
    let report: Value = serde_json::from_str(&ws.read("cls/report.json")).unwrap();
    assert_eq!(report["classifier"], "knn-5");
    assert_eq!(report["n_records"], 6);
    assert_eq!(report["features"].as_array().unwrap().len(), 8);
    let roc = ws.read("cls/roc.csv");
    assert_eq!(roc.lines().next(), Some("fpr,tpr"));
    assert_eq!(roc.lines().nth(1), Some("0,0"));
    assert_eq!(roc.lines().last(), Some("1,1"));
    assert_eq!(ws.read("cls/features.csv").lines().count(), 13);

    ws.ok(&["classify", "set", "--out", "all", "--features", "all", "--k-folds", "5"]);
    let report: Value = serde_json::from_str(&ws.read("all/report.json")).unwrap();
    assert_eq!(report["features"].as_array().unwrap().len(), 12);

    let out = ws.run(&["classify", "set", "--out", "bad", "--classifier", "bayes"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::create_dir_all(ws.path("normal_only")).unwrap();
    for f in ["nb_01.csv", "nb_01.truth.json", "nb_02.csv", "nb_02.truth.json"] {
        std::fs::copy(ws.path(&format!("set/{f}")), ws.path(&format!("normal_only/{f}"))).unwrap();
    }
    let out = ws.run(&["classify", "normal_only", "--out", "none", "--k-folds", "5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!ws.path("none/report.json").exists());
}

#[test]
fn plot_structure() {
    let ws = Workspace::new("plot");
    ws.ok(&["synth", "--config", "short.cfg", "--out", "one"]);
    ws.ok(&["delineate", "one/record.csv", "--out", "ann.json"]);
    ws.ok(&["plot", "one/record.csv", "--annotations", "ann.json", "--out", "full.svg", "--range-s", "1:5"]);
    let svg = ws.read("full.svg");
    assert!(svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    for name in ["IM", "AO", "IC", "AC", "pAC", "MO"] {
        assert_eq!(svg.matches(&format!(r#"id="marker-{name}""#)).count(), 1, "{name}");
    }
    assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());

    ws.ok(&["plot", "one/record.csv", "--out", "bare.svg"]);
    assert!(!ws.read("bare.svg").contains(r#"class="fiducial""#));

    let out = ws.run(&["plot", "one/record.csv", "--out", "clip.svg", "--range-s", "15:90"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("clipped"));
    assert!(ws.read("clip.svg").contains("20.000 s"));
}
