mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::FileConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] abelian_core::Error),
}

impl CliError {
    /// 2 for bad arguments and missing inputs, 1 for everything that went
    /// wrong while running.
    pub fn exit_code(&self) -> u8 {
        use abelian_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidArgument(_) | E::NotSymmetric { .. } | E::DegreeTooLarge { .. } | E::DegenerateLipschitz(_)) => 2,
            CliError::Core(E::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "abnet", version, about = "Abelian group and semigroup network experiments")]
pub struct Cli {
    /// Run seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for search trials and evaluation
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train and evaluate multiset models on a synthetic task
    Synthetic(SyntheticArgs),
    /// Random hyperparameter search on a synthetic task
    Search(SyntheticArgs),
    /// Classify a symmetric polynomial operation
    ClassifyPoly(ClassifyArgs),
    /// Train an analogy model and write its checkpoint
    AnalogyTrain(AnalogyArgs),
    /// Evaluate an analogy model by top-1 retrieval
    AnalogyEval(AnalogyArgs),
    /// Size-generalization error bound
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    /// add, add1, cbrt_sum_cubes, mul or bilinear_half
    #[arg(long)]
    pub task: String,
    /// Comma-separated model kinds: agn, asn, deepsets
    #[arg(long, value_delimiter = ',', default_value = "agn")]
    pub model: Vec<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Training multisets
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub validation: Option<usize>,
    #[arg(long)]
    pub small_test: Option<usize>,
    #[arg(long)]
    pub large_test: Option<usize>,
    /// Monotonic-net groups (agn, asn)
    #[arg(long)]
    pub groups: Option<usize>,
    /// Units per monotonic-net group (agn, asn)
    #[arg(long)]
    pub units: Option<usize>,
    /// Linear layers per DeepSets MLP
    #[arg(long)]
    pub layers: Option<usize>,
    /// DeepSets hidden width
    #[arg(long)]
    pub hidden: Option<usize>,
    /// DeepSets pooled width
    #[arg(long)]
    pub middle: Option<usize>,
    /// Pick hyperparameters by random search before the final run
    #[arg(long)]
    pub search: bool,
    /// Search trials
    #[arg(long)]
    pub trials: Option<usize>,
    /// Write 0 for wall-clock times so reruns are byte-identical
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Coefficient grid, rows separated by `;`: entry (i, j) multiplies x^i y^j
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
}

#[derive(Debug, Args)]
pub struct AnalogyArgs {
    /// wv, wv_mlp or wv_agn
    #[arg(long, default_value = "wv_agn")]
    pub kind: String,
    /// word2vec text embeddings
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub embeddings: Option<PathBuf>,
    /// Relation file or directory of relation files
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub relations: Option<PathBuf>,
    /// Use the seeded synthetic vocabulary instead of files
    #[arg(long)]
    pub synthetic: bool,
    /// Model checkpoint (analogy-eval of wv_mlp and wv_agn)
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Remove a, b and c from the retrieval candidates
    #[arg(long)]
    pub exclude_abc: bool,
    /// Split evaluated by analogy-eval: train, validation or test
    #[arg(long, default_value = "test")]
    pub split: String,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    #[arg(long)]
    pub max_train_per_category: Option<usize>,
    #[arg(long)]
    pub max_eval_per_category: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Error bound on multisets of size at most `a`
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    /// Lipschitz constant of phi
    #[arg(long)]
    pub k1: f64,
    /// Lipschitz constant of phi^-1
    #[arg(long)]
    pub k2: f64,
}

/// Global settings after merging flags with the config file.
#[derive(Debug, Clone)]
pub struct Globals {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub config_file: Option<PathBuf>,
    pub file: FileConfig,
}

fn globals(cli: &Cli) -> Result<Globals, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
        threads,
        config_file: cli.config.clone(),
        file,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = globals(&cli)?;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&g.out).map_err(abelian_core::Error::from)?;
    match &cli.command {
        Command::Synthetic(a) => commands::synthetic(&g, a),
        Command::Search(a) => commands::search(&g, a),
        Command::ClassifyPoly(a) => commands::classify_poly(&g, a),
        Command::AnalogyTrain(a) => commands::analogy_train(&g, a),
        Command::AnalogyEval(a) => commands::analogy_eval(&g, a),
        Command::Bound(a) => commands::bound(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
