//! Command-line front end: `analyze`, `reconstruct` and `validate`.
//!
//! Exit codes: 0 on success, 2 when the configuration or input fails
//! validation, 1 on any other failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{analyze, AnalysisConfig, DEFAULT_SEED};
use crate::dataset::{self, LoadConfig, ReconstructionSpec};
use crate::error::{DatasetError, InferenceError, ReportError};
use crate::inference::DEFAULT_LEVEL;
use crate::metrics::{Label, MetricKind};
use crate::report::emit_all;
use crate::resample::DEFAULT_REPLICATES;

pub const THREADS_ENV: &str = "CHALLENGE_JUDGE_THREADS";
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "challenge-judge",
    version,
    about = "Paired bootstrap comparison of shared-task submissions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bootstrap every team and write tables, figures and report.json.
    Analyze(AnalyzeArgs),
    /// Build a synthetic dataset from per-team (tp, fp) counts.
    Reconstruct(ReconstructArgs),
    /// Check an input file without writing anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct AnalyzeArgs {
    /// Wide CSV: id,gold,<team...>
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Label token of the positive class.
    #[arg(long)]
    pub positive: Option<String>,
    /// Bootstrap replicates (at least 100).
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level in [0.5, 1).
    #[arg(long)]
    pub level: Option<f64>,
    /// Comma-separated subset of precision,recall,f1.
    #[arg(long)]
    pub metrics: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Histogram pairs as `A:B,C:D`.
    #[arg(long)]
    pub pairs: Option<String>,
    /// JSON file with any of the above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// JSON: {"n_pos": .., "n_neg": .., "teams": {name: {"tp": .., "fp": ..}}}
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub positive: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Optional settings file for `analyze`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub positive: Option<String>,
    pub b: Option<usize>,
    pub seed: Option<u64>,
    pub level: Option<f64>,
    pub metrics: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub pairs: Option<Vec<(String, String)>>,
}

/// Fully resolved `analyze` settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub positive: String,
    pub b: usize,
    pub seed: u64,
    pub level: f64,
    pub metrics: Vec<MetricKind>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
    pub pairs: Option<Vec<(String, String)>>,
}

fn parse_metrics<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<Vec<MetricKind>, CliError> {
    let mut out = Vec::new();
    for item in items {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let m: MetricKind = item
            .parse()
            .map_err(|e: crate::error::MetricsError| CliError::Validation(e.to_string()))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

fn parse_pairs(s: &str) -> Result<Vec<(String, String)>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match p.split_once(':') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok((a.trim().to_string(), b.trim().to_string()))
            }
            _ => Err(CliError::Validation(format!("bad pair `{p}`, expected TEAM_A:TEAM_B"))),
        })
        .collect()
}

impl RunConfig {
    /// Merges flags over the optional config file over defaults, then validates.
    pub fn resolve(args: &AnalyzeArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let missing = |what: &str| CliError::Validation(format!("missing --{what}"));
        let metrics = match (&args.metrics, &file.metrics) {
            (Some(s), _) => parse_metrics(s.split(','))?,
            (None, Some(v)) => parse_metrics(v.iter().map(String::as_str))?,
            (None, None) => MetricKind::ALL.to_vec(),
        };
        let pairs = match (&args.pairs, &file.pairs) {
            (Some(s), _) => Some(parse_pairs(s)?),
            (None, p) => p.clone(),
        };
        let cfg = RunConfig {
            input: args.input.clone().or(file.input).ok_or_else(|| missing("input"))?,
            positive: args
                .positive
                .clone()
                .or(file.positive)
                .ok_or_else(|| missing("positive"))?,
            b: args.b.or(file.b).unwrap_or(DEFAULT_REPLICATES),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            level: args.level.or(file.level).unwrap_or(DEFAULT_LEVEL),
            metrics,
            out: args.out.clone().or(file.out).ok_or_else(|| missing("out"))?,
            threads: args.threads.or(file.threads),
            pairs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.b < MIN_REPLICATES {
            return Err(CliError::Validation(format!(
                "--b must be at least {MIN_REPLICATES}, got {}",
                self.b
            )));
        }
        if !(0.5..1.0).contains(&self.level) {
            return Err(CliError::Validation(format!(
                "--level must lie in [0.5, 1), got {}",
                self.level
            )));
        }
        if self.metrics.is_empty() {
            return Err(CliError::Validation("--metrics selects no metric".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        if self.positive.is_empty() {
            return Err(CliError::Validation("--positive must be non-empty".into()));
        }
        Ok(())
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            b: self.b,
            seed: self.seed,
            level: self.level,
            metrics: self.metrics.clone(),
            pairs: self.pairs.clone(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    input_sha256: String,
    outputs: Vec<OutputEntry>,
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

fn write_manifest(cfg: &RunConfig, input: &[u8], written: &[PathBuf]) -> Result<(), CliError> {
    let mut outputs = written
        .iter()
        .map(|p| {
            let bytes =
                fs::read(p).map_err(|e| CliError::Internal(format!("cannot read back {}: {e}", p.display())))?;
            let file = p
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(OutputEntry {
                file,
                sha256: sha256_hex(&bytes),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    outputs.sort_by(|a, b| a.file.cmp(&b.file));
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "analyze",
        config: cfg,
        input_sha256: sha256_hex(input),
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    let path = cfg.out.join("manifest.json");
    fs::write(&path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn positive_label(s: &str) -> Result<Label, CliError> {
    Label::new(s).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn run_analyze(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let bytes = read_input(&cfg.input)?;
    let ds = dataset::load_from_reader(
        bytes.as_slice(),
        &LoadConfig {
            positive: positive_label(&cfg.positive)?,
        },
    )?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = cfg.threads {
            b = b.num_threads(t);
        }
        b.build()
            .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))?
    };
    let analysis = pool.install(|| analyze(&ds, &cfg.analysis()))?;
    let written = emit_all(&analysis, &cfg.out)?;
    write_manifest(cfg, &bytes, &written)?;
    Ok(written)
}

pub fn run_reconstruct(args: &ReconstructArgs) -> Result<(), CliError> {
    let spec = ReconstructionSpec::read(&args.spec)?;
    let ds = dataset::reconstruct(&spec, args.seed)?;
    ds.write(&args.out).map_err(|e| CliError::Internal(e.to_string()))
}

/// Loads and checks a dataset; returns a human-readable summary.
pub fn run_validate(args: &ValidateArgs) -> Result<String, CliError> {
    let ds = dataset::load(
        &args.input,
        &LoadConfig {
            positive: positive_label(&args.positive)?,
        },
    )?;
    let mut s = format!(
        "ok: {} examples, {} teams, positive class `{}`\n",
        ds.len(),
        ds.team_count(),
        ds.positive()
    );
    for (team, _) in ds.teams() {
        let c = ds.confusion(team).expect("listed team");
        s.push_str(&format!("  {team}: tp={} fp={} fn={} tn={}\n", c.tp, c.fp, c.fn_, c.tn));
    }
    Ok(s)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = RunConfig::resolve(&args)?;
            let written = run_analyze(&cfg)?;
            eprintln!("wrote {} files to {}", written.len() + 1, cfg.out.display());
        }
        Command::Reconstruct(args) => run_reconstruct(&args)?,
        Command::Validate(args) => print!("{}", run_validate(&args)?),
    }
    Ok(())
}
