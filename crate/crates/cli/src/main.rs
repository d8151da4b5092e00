//! `cadfusion`: parse, render, evaluate, build preference pairs and train.
//!
//! Option precedence for `pairs` and `train`: built-in defaults, then the
//! `--config` TOML file, then command-line flags.

mod commands;
mod error;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::provenance::RunRecord;

#[derive(Debug, Parser)]
#[command(name = "cadfusion", version, about = "Text-to-CAD toolkit with visual-feedback preference training")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every randomized step (default 42, or the config file's).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for rendering and metrics; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Directory for outputs and `run.json`.
    #[arg(long, global = true, default_value = "cadfusion-out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,
}

impl Global {
    pub fn seed_or(&self, config: Option<u64>) -> u64 {
        self.seed.or(config).unwrap_or(42)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScorerKind {
    Oracle,
    Lvm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a sequence and print its canonical form.
    Parse {
        /// Sequence file; reads stdin when absent or `-`.
        file: Option<PathBuf>,
        /// Print the validation report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Render a sequence to a point cloud, voxel blob and silhouette image.
    Render {
        file: PathBuf,
        #[arg(long, default_value_t = render::SOLID_RESOLUTION)]
        res: usize,
        #[arg(long, default_value_t = render::DEFAULT_POINTS)]
        points: usize,
    },
    /// Score generated sequences against references, paired by line.
    Eval {
        generated: PathBuf,
        reference: PathBuf,
        #[arg(long, default_value_t = render::DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = render::SOLID_RESOLUTION)]
        res: usize,
    },
    /// Sample candidates from a checkpoint, score them and emit preference pairs.
    Pairs(PairsArgs),
    /// Alternating supervised / preference training.
    Train(TrainArgs),
    /// Convert command arrays (JSON) into token sequences.
    DecodeArrays {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        xy_pad: i64,
        #[arg(long, default_value_t = 1)]
        ext_pad: i64,
    },
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    /// Directory holding the policy checkpoint.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Checkpoint name inside the directory.
    #[arg(long, default_value = "f_SL_0")]
    pub name: String,
    /// JSONL prompts with reference sequences (`{"text", "sequence"}`).
    #[arg(long, conflicts_with = "synth")]
    pub prompts: Option<PathBuf>,
    /// Use this many prompts from the built-in synthetic grammar instead.
    #[arg(long)]
    pub synth: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScorerKind::Oracle)]
    pub scorer: ScorerKind,
    /// Chat-completions endpoint for the LVM scorer.
    #[arg(long)]
    pub lvm_endpoint: Option<String>,
    /// Samples per prompt.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Shortened initial supervised phase.
    #[arg(long)]
    pub fast: bool,
    #[arg(long, value_enum, default_value_t = ScorerKind::Oracle)]
    pub scorer: ScorerKind,
    #[arg(long)]
    pub lvm_endpoint: Option<String>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Supervised JSONL data; synthesized when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Held-out JSONL data for the probes; synthesized when absent.
    #[arg(long)]
    pub heldout: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Parse { .. } => "parse",
            Command::Render { .. } => "render",
            Command::Eval { .. } => "eval",
            Command::Pairs(_) => "pairs",
            Command::Train(_) => "train",
            Command::DecodeArrays { .. } => "decode-arrays",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.log_level {
        LogLevel::Error => log::LevelFilter::Error,
        LogLevel::Warn => log::LevelFilter::Warn,
        LogLevel::Info => log::LevelFilter::Info,
        LogLevel::Debug => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global() {
            log::warn!("thread pool: {e}");
        }
    }

    let mut run = RunRecord::start(cli.command.name(), cli.global.seed_or(None), cli.global.threads);
    let result = commands::dispatch(&cli, &mut run);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    if let Err(e) = run.finish(&cli.global.out, code) {
        eprintln!("error: {e}");
    }
    ExitCode::from(code as u8)
}

pub type CliResult = Result<(), CliError>;
