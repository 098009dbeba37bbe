mod commands;
mod io;
mod plot;

use clap::{Parser, Subcommand, ValueEnum};
use scg_core::config::RunConfig;
use scg_core::ErrorKind;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "scg", version, about = "PPG-assisted SCG delineation and breathlessness classification")]
struct Cli {
    /// Flat key = value configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthMode {
    /// One record from the `synth.*` settings.
    Single,
    /// Normal and held-breath records, `--n` of each.
    Dataset,
}

#[derive(Subcommand)]
enum Command {
    /// Delineate a CSV record and write the annotation JSON.
    Delineate {
        /// CSV record with columns t,ppg,scg.
        record: PathBuf,
        /// Annotation JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Processing window length in seconds.
        #[arg(long)]
        window_s: Option<f64>,
    },
    /// Generate synthetic records with ground truth.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "single")]
        mode: SynthMode,
        /// Records per class in dataset mode.
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Score annotations against ground truth.
    Eval {
        /// Annotation JSON from `delineate`.
        annotations: PathBuf,
        /// Ground-truth JSON from `synth`.
        truth: PathBuf,
        /// Match tolerance in milliseconds.
        #[arg(long)]
        tol_ms: Option<f64>,
        /// JSON report path; the text table always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated breathlessness classification of a record directory.
    Classify {
        /// Directory of CSV records, each with a sibling `.truth.json` label.
        records: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// svm-rbf, svm-linear, lda, knn-fine, knn-medium, knn-coarse or knn-K
        #[arg(long)]
        classifier: Option<String>,
        /// all, selected, ttest or ttest:ALPHA
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        k_folds: Option<usize>,
        /// Fold assignment seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Processing window length in seconds.
        #[arg(long)]
        window_s: Option<f64>,
    },
    /// Render a record and its annotations as SVG.
    Plot {
        /// CSV record with columns t,ppg,scg.
        record: PathBuf,
        /// Annotation JSON to overlay.
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// SVG output path.
        #[arg(long)]
        out: PathBuf,
        /// Time range START:END in seconds.
        #[arg(long, value_parser = parse_range)]
        range_s: Option<(f64, f64)>,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("invalid start '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("invalid end '{b}'"))?;
    if !(b > a) {
        return Err("END must exceed START".into());
    }
    Ok((a, b))
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Parse => 2,
        ErrorKind::Precondition => 3,
        ErrorKind::Degenerate => 4,
        ErrorKind::Other => 1,
    }
}

fn load_config(path: Option<&PathBuf>) -> scg_core::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::parse(&io::read_text(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> scg_core::Result<()> {
    let mut cfg = load_config(cli.config.as_ref())?;
    let mut set = |key: &str, value: Option<String>| -> scg_core::Result<()> {
        match value {
            Some(v) => cfg.set(key, &v).map_err(|m| scg_core::Error::Parse(format!("--{}: {m}", key.replace('_', "-")))),
            None => Ok(()),
        }
    };
    match cli.command {
        Command::Delineate { record, out, window_s } => {
            set("window_s", window_s.map(|v| v.to_string()))?;
            commands::delineate(&cfg, &record, &out)
        }
        Command::Synth { out, seed, mode, n } => {
            set("synth.seed", seed.map(|v| v.to_string()))?;
            commands::synth(&cfg, &out, mode, n)
        }
        Command::Eval { annotations, truth, tol_ms, out } => {
            set("tol_ms", tol_ms.map(|v| v.to_string()))?;
            commands::eval(&cfg, &annotations, &truth, out.as_deref())
        }
        Command::Classify { records, out, classifier, features, k_folds, seed, window_s } => {
            set("classifier", classifier)?;
            set("features", features)?;
            set("k_folds", k_folds.map(|v| v.to_string()))?;
            set("cv_seed", seed.map(|v| v.to_string()))?;
            set("window_s", window_s.map(|v| v.to_string()))?;
            commands::classify(&cfg, &records, &out)
        }
        Command::Plot { record, annotations, out, range_s } => commands::plot(&record, annotations.as_deref(), &out, range_s),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "error": { "kind": e.name(), "message": e.to_string() } });
            eprintln!("{report}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
