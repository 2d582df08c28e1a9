mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use radkg::generate::GenerateError;

#[derive(Debug, Parser)]
#[command(name = "radkg", version, about = "Radiology knowledge graph construction and report generation")]
pub struct Cli {
    /// TOML run configuration; relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for build-kg). Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fail with exit code 2 when any input item was skipped.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a report corpus into JSON-lines sentences.
    Preprocess {
        /// Corpus directory; overrides `preprocess.corpus`.
        corpus: Option<PathBuf>,
    },
    /// Extract triples from sentences or annotation files.
    Extract {
        /// `.jsonl` from preprocess, ten-column annotation files, or `id<TAB>text` lines.
        inputs: Vec<PathBuf>,
        /// A sentence given inline; may repeat.
        #[arg(long = "text")]
        texts: Vec<String>,
        /// Treat inputs as ten-column annotation files regardless of the config.
        #[arg(long)]
        annotated: bool,
    },
    /// Augment preliminary graphs with extracted triples.
    BuildKg {
        /// Triple TSV files written by extract.
        triples: Vec<PathBuf>,
        /// Graphs to augment (TSV or .nt); overrides `kg.preliminary`.
        #[arg(long = "kg")]
        graphs: Vec<PathBuf>,
    },
    /// Generate a patient report from dictations.
    Generate {
        dictations: Vec<String>,
        /// One dictation per line, optionally `id<TAB>text`.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Graphs to describe from (TSV or .nt); overrides `kg.preliminary`.
        #[arg(long = "kg")]
        graphs: Vec<PathBuf>,
        /// Print the per-dictation details as JSON instead of the report.
        #[arg(long)]
        json: bool,
        /// Write `id<TAB>description` rows, one per dictation, instead of the report.
        #[arg(long, conflicts_with = "json")]
        descriptions: bool,
    },
    /// Score triples or descriptions against a gold file.
    Evaluate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Triple matching mode: full or pair_only.
        #[arg(long, default_value = "full")]
        mode: String,
        /// The files hold `id<TAB>description` rows rather than triples.
        #[arg(long)]
        descriptions: bool,
        #[arg(long)]
        csv: bool,
        /// Override `evaluation.smoothing`.
        #[arg(long)]
        no_smoothing: bool,
    },
    /// Print a graph as N-Triples or a short summary.
    DumpKg {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "nt")]
        format: DumpFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DumpFormat {
    Nt,
    Summary,
}

/// Errors that map to their own exit code.
#[derive(Debug, thiserror::Error)]
pub enum Exit {
    #[error("{0} item(s) skipped under --strict")]
    Skipped(usize),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("cannot size the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(Exit::Skipped(_)) = e.downcast_ref::<Exit>() {
                return ExitCode::from(2);
            }
            if let Some(GenerateError::BelowThreshold { .. }) = e.downcast_ref::<GenerateError>() {
                return ExitCode::from(3);
            }
            ExitCode::from(1)
        }
    }
}
