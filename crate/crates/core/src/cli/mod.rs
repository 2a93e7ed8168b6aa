//! Command-line front end: argument definitions, dispatch and exit codes.
//!
//! Exit codes: 0 on success, 1 when an evaluation finished but reported
//! warnings (for example a fold whose training part lacked a class), 2 on any
//! hard error.

mod commands;
mod store;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{analysis_files, EvaluationBundle};
pub use store::{load_recordings, manifest_path, read_manifest, write_store, ManifestEntry, MANIFEST_FILE};

use crate::classify::{C45Params, LearnerConfig, NBTreeParams};
use crate::kinematics::Alignment;
use crate::stroke::{MarkerId, SkillClass};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn stage(stage: &'static str) -> impl Fn(&dyn std::fmt::Display) -> CliError {
        move |e| CliError::Stage { stage, message: e.to_string() }
    }
}

/// What a successful command wants the exit code to say.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Warnings,
}

#[derive(Debug, Parser)]
#[command(name = "strokeminer", version, about = "Forehand stroke skill analysis and classification")]
pub struct Cli {
    /// Master seed for fold shuffles, NBTree inner cross-validation and synthetic data.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress warnings and summaries on stderr/stdout (data written to stdout is kept).
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, validate and normalize the recordings of a manifest into a store directory (--out).
    Ingest(IngestArgs),
    /// Extrema table, correlation matrix and speed profiles.
    Analyze(AnalyzeArgs),
    /// Sliding-window dataset CSV.
    Windows(WindowsArgs),
    /// Train a model from a dataset CSV.
    Train(TrainArgs),
    /// Cross-validation and hold-out evaluation.
    Evaluate(EvaluateArgs),
    /// Write synthetic recordings and a manifest into --out.
    Synth(SynthArgs),
    /// Analytics bundle for a store, plus rate and confusion tables from an evaluation JSON.
    Report(ReportArgs),
    /// Ingest, window, train, evaluate and report in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Manifest CSV with `recording,metadata` columns.
    pub manifest: PathBuf,
    /// Largest per-frame marker displacement (pixels) before a warning.
    #[arg(long, default_value_t = 100.0)]
    pub max_jump: f64,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisOptions {
    /// Markers in the extrema table.
    #[arg(long, value_delimiter = ',', default_value = "1,4,7,9")]
    pub markers: Vec<MarkerId>,
    /// Marker whose trajectories are correlated across recordings.
    #[arg(long, default_value = "9")]
    pub correlation_marker: MarkerId,
    #[arg(long, value_enum, default_value_t = AlignmentArg::NormalizedTime)]
    pub alignment: AlignmentArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignmentArg {
    NormalizedTime,
    ImpactAnchored,
}

impl From<AlignmentArg> for Alignment {
    fn from(a: AlignmentArg) -> Self {
        match a {
            AlignmentArg::NormalizedTime => Alignment::NormalizedTime,
            AlignmentArg::ImpactAnchored => Alignment::ImpactAnchored,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Manifest CSV or store directory.
    pub input: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisOptions,
}

#[derive(Debug, Clone, Args)]
pub struct WindowOptions {
    #[arg(long, default_value_t = 5)]
    pub window_len: usize,
    #[arg(long, default_value_t = 3)]
    pub overlap: usize,
    /// Window frame-to-frame deltas instead of positions.
    #[arg(long)]
    pub differenced: bool,
}

#[derive(Debug, Args)]
pub struct WindowsArgs {
    /// Manifest CSV or store directory.
    pub input: PathBuf,
    #[command(flatten)]
    pub window: WindowOptions,
    #[arg(long, value_delimiter = ',', default_value = "expert,novice")]
    pub classes: Vec<SkillClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerChoice {
    C45,
    Nbtree,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct LearnerOptions {
    #[arg(long, value_enum, default_value_t = LearnerChoice::Both)]
    pub learner: LearnerChoice,
    /// Keep the unpruned C4.5 tree.
    #[arg(long)]
    pub no_prune: bool,
    /// C4.5 pruning confidence factor.
    #[arg(long, default_value_t = 0.25)]
    pub cf: f64,
    /// Minimum instances on each side of a C4.5 split.
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
}

impl LearnerOptions {
    pub fn configs(&self, seed: u64) -> Vec<LearnerConfig> {
        let c45 = LearnerConfig::C45(C45Params { min_leaf: self.min_leaf, prune: !self.no_prune, cf: self.cf });
        let nbt = LearnerConfig::NBTree(NBTreeParams { seed, ..NBTreeParams::default() });
        match self.learner {
            LearnerChoice::C45 => vec![c45],
            LearnerChoice::Nbtree => vec![nbt],
            LearnerChoice::Both => vec![c45, nbt],
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV.
    pub dataset: PathBuf,
    #[command(flatten)]
    pub learner: LearnerOptions,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Dataset CSV for cross-validation.
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub learner: LearnerOptions,
    #[arg(long, default_value_t = crate::eval::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Keep all windows of a recording in the same fold.
    #[arg(long)]
    pub group_by_recording: bool,
    /// Train on the first dataset CSV and evaluate on the second.
    #[arg(long, num_args = 2, value_names = ["TRAIN", "EVAL"])]
    pub holdout: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Expert,
    Intermediate,
    Novice,
    ReferenceCohort,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Expert => "expert",
            Preset::Intermediate => "intermediate",
            Preset::Novice => "novice",
            Preset::ReferenceCohort => "reference-cohort",
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    /// Recordings to generate for a single-class preset.
    #[arg(long, default_value_t = 5)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Manifest CSV or store directory.
    pub store: PathBuf,
    /// Evaluation JSON written by `evaluate` or `pipeline`.
    #[arg(long)]
    pub evaluation: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisOptions,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Manifest CSV or store directory (omit with --synth).
    #[arg(required_unless_present = "synth", conflicts_with = "synth")]
    pub manifest: Option<PathBuf>,
    /// Generate the input recordings instead of reading a manifest.
    #[arg(long, value_enum)]
    pub synth: Option<Preset>,
    #[command(flatten)]
    pub window: WindowOptions,
    #[command(flatten)]
    pub learner: LearnerOptions,
    #[arg(long, default_value_t = crate::eval::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long)]
    pub group_by_recording: bool,
    /// Train on the n best-agreeing recordings of each class (marker 9), evaluate on the rest.
    #[arg(long, value_name = "N")]
    pub holdout_class_experts: Option<usize>,
    #[command(flatten)]
    pub analysis: AnalysisOptions,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Ingest(args) => commands::ingest(cli, args),
        Command::Analyze(args) => commands::analyze(cli, args),
        Command::Windows(args) => commands::windows(cli, args),
        Command::Train(args) => commands::train(cli, args),
        Command::Evaluate(args) => commands::evaluate(cli, args),
        Command::Synth(args) => commands::synth(cli, args),
        Command::Report(args) => commands::report(cli, args),
        Command::Pipeline(args) => commands::pipeline(cli, args),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(Outcome::Clean) => 0,
        Ok(Outcome::Warnings) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
