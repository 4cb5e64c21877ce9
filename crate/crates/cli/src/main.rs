//! `crisis-mt`: corpus pipeline, evaluation and service in one binary.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crisis_mt_core::{ExportFormat, LanguagePair, SplitRatios, Stream};

use error::CliError;

#[derive(Parser)]
#[command(name = "crisis-mt", version, about = "Crisis-response MT corpus, evaluation and collection service")]
struct Cli {
    /// Machine-readable JSON on stdout (and JSON errors on stderr).
    #[arg(long, global = true)]
    json: bool,

    /// Service config file (TOML), used by serve, ingest and export.
    #[arg(long, global = true, env = "CRISIS_CORPUS_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// A corpus file. Format defaults from the extension: `.jsonl`, `.tsv`,
/// anything else is a bitext base path (`<path>.<src>` + `<path>.<tgt>`).
#[derive(Args, Clone)]
pub struct Input {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<ExportFormat>,
    /// Language pair such as en-ga. Optional for JSONL, read from the first record.
    #[arg(long)]
    pub pair: Option<LanguagePair>,
    #[arg(long, default_value = "community")]
    pub stream: Stream,
    /// Crisis phase ordinal (1-3) for TSV and bitext lines.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub phase: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Run the collection service.
    Serve {
        /// Overrides the config's listen address.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Import a corpus file into the service store (service must be stopped).
    Ingest {
        #[command(flatten)]
        input: Input,
        /// Mark imported segments accepted instead of pending.
        #[arg(long)]
        accept: bool,
    },
    /// Remove duplicate segments, keeping the first of each.
    Dedup {
        #[command(flatten)]
        input: Input,
        /// Write the surviving segments here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value = "deduplicated")]
        name: String,
        /// Defaults to the input format.
        #[arg(long)]
        output_format: Option<ExportFormat>,
    },
    /// Partition a corpus into train/validation/test.
    Split {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: SplitRatios,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deduplicate before splitting.
        #[arg(long)]
        dedup: bool,
        /// Write the manifest JSON here.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Write the split files here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        output_format: Option<ExportFormat>,
    },
    /// Report segments shared between a training and a test corpus.
    CheckContamination {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        format: Option<ExportFormat>,
        #[arg(long)]
        pair: Option<LanguagePair>,
    },
    /// Translate a test set with a backend and score it.
    Evaluate {
        /// Backend config, JSON or TOML.
        #[arg(long)]
        backend_config: PathBuf,
        #[arg(long)]
        testset: PathBuf,
        #[arg(long)]
        format: Option<ExportFormat>,
        #[arg(long)]
        pair: Option<LanguagePair>,
        #[arg(long)]
        name: String,
        /// Hypotheses and the run sidecar go here.
        #[arg(long, default_value = "runs")]
        out_dir: PathBuf,
    },
    /// Rank systems for one direction against a reference system.
    Leaderboard {
        #[arg(long)]
        direction: LanguagePair,
        #[arg(long)]
        reference: String,
        /// Extra records: record JSON, record lists or run sidecars.
        #[arg(long)]
        records: Vec<PathBuf>,
        /// Baseline TSV replacing the shipped one.
        #[arg(long)]
        baselines: Option<PathBuf>,
    },
    /// Write a pair's stored segments to files.
    Export {
        #[arg(long)]
        format: ExportFormat,
        #[arg(long)]
        pair: LanguagePair,
        #[arg(long)]
        out_dir: PathBuf,
        /// Split with these ratios instead of writing one file set.
        #[arg(long)]
        ratios: Option<SplitRatios>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dedup: bool,
        /// Export every segment rather than only accepted ones.
        #[arg(long)]
        all: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let json = cli.json;
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                let body = serde_json::json!({"error": e.kind.code(), "message": e.message});
                eprintln!("{body}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.kind as u8)
        }
    }
}

pub(crate) type Result<T> = std::result::Result<T, CliError>;
