use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "ising-impute", version, about = "Ising network estimation from binary data with missing values")]
pub struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = "ISING_IMPUTE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a dataset with missing values and its true parameter matrix
    Simulate(SimulateArgs),
    /// Estimate S from a dataset
    Fit(FitArgs),
    /// Run a simulation study and write metric tables
    Study(StudyArgs),
    /// Moment check of the Polya-Gamma sampler
    PgTest(PgTestArgs),
    /// Reconstruct S from a screened probability table
    Recover(RecoverArgs),
    /// Re-run the command recorded in a manifest and compare output digests
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum StudyId {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

impl From<StudyId> for ising_impute::Study {
    fn from(s: StudyId) -> Self {
        match s {
            StudyId::I => ising_impute::Study::One,
            StudyId::II => ising_impute::Study::Two,
            StudyId::III => ising_impute::Study::Three,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum TruthKind {
    Zero,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Study whose parameters and missingness mechanism are used
    #[arg(long, conflicts_with_all = ["j", "truth"])]
    pub study: Option<StudyId>,
    /// Number of items for a built-in parameter matrix (with --s)
    #[arg(long, requires = "s")]
    pub j: Option<usize>,
    /// Built-in parameter matrix
    #[arg(long, requires = "j")]
    pub s: Option<TruthKind>,
    /// Parameter matrix JSON
    #[arg(long, conflicts_with = "j")]
    pub truth: Option<PathBuf>,
    /// Missingness specification JSON (overrides the study mechanism)
    #[arg(long)]
    pub missingness: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum MethodArg {
    Proposed,
    Single,
    Complete,
    All,
}

/// Sampler settings; unset flags fall back to `--config`, then to defaults.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ChainArgs {
    /// JSON file with ChainConfig fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Total iterations T
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Burn-in T0
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Thinning t0
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prior variance of the intercepts
    #[arg(long)]
    pub intercept_variance: Option<f64>,
    /// Prior variance of the edge parameters
    #[arg(long)]
    pub slope_variance: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Dataset CSV (item_1..item_J, cells 0/1/NA)
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "proposed")]
    pub method: MethodArg,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Edges with |s| above this are drawn in the network file
    #[arg(long, default_value_t = 0.5)]
    pub viz_threshold: f64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StudyArgs {
    #[arg(value_enum)]
    pub study: StudyId,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',', default_value = "8000")]
    pub n: Vec<usize>,
    /// Methods to compare (defaults depend on the study)
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodArg>>,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Comma-separated Jaccard thresholds
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    pub jaccard: Vec<f64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PgTestArgs {
    /// Comma-separated tilting parameters
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.5,1,2,5,20")]
    pub c: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RecoverArgs {
    /// Probability table CSV (item_1..item_J,probability)
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write the re-run outputs here instead of the recorded directory
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
