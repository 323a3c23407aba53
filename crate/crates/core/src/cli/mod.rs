//! Command-line surface: one subcommand per pipeline stage plus `benchmark`,
//! which runs a whole experiment from a TOML [`RunConfig`].
//!
//! The `passbench` binary is a thin wrapper around [`main_with_args`].
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! runtime failures.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

mod benchmark;
mod commands;
pub mod config;

pub use benchmark::{run_benchmark, BenchmarkArgs, SummaryTable};
pub use commands::{
    AnalyzeArgs, CompareArgs, EvaluateArgs, GenerateArgs, MarkovArgs, PreprocessArgs, TrainArgs,
};
pub use config::{DatasetEntry, ModelEntry, ModelKind, PreprocessSection, RunConfig, Scenario};

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PASSBENCH_OUTPUT_DIR";

const DEFAULT_OUTPUT_DIR: &str = "out";

/// Which report encodings to write.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "passbench",
    version,
    about = "Benchmark trawling password-guessing models"
)]
pub struct Cli {
    /// Directory for reports and artifacts [default: $PASSBENCH_OUTPUT_DIR, else "out"]
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,

    /// Report encoding [default: both]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter, split and deduplicate a raw password file
    Preprocess(PreprocessArgs),
    /// Length, pattern and frequency statistics of a password file
    Analyze(AnalyzeArgs),
    /// Train a Markov or PCFG model and save it as JSON
    Train(TrainArgs),
    /// Write a model's ordered guesses to a file
    Generate(GenerateArgs),
    /// Match one guess stream against a test set
    Evaluate(EvaluateArgs),
    /// Pairwise overlap and multi-model selection over several guess streams
    Compare(CompareArgs),
    /// Run a full experiment described by a TOML config
    Benchmark(BenchmarkArgs),
}

/// Resolved output location and encoding.
#[derive(Clone, Debug)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
}

impl Output {
    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn write(&self, file: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(file);
        write_atomic(&path, bytes)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<PathBuf> {
        self.write(file, &json_bytes(value)?)
    }

    pub fn write_csv<T: Serialize>(&self, file: &str, rows: &[T]) -> Result<PathBuf> {
        self.write(file, &csv_bytes(rows)?)
    }
}

/// Flag, then config file, then environment, then `out`.
pub(crate) fn resolve_output_dir(flag: Option<&Path>, file: Option<&Path>) -> PathBuf {
    flag.or(file)
        .map(Path::to_path_buf)
        .or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub(crate) fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub(crate) fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::malformed("csv", e))
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 1,
        _ => 2,
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let output = |file_dir: Option<&Path>, file_format: Option<Format>| Output {
        dir: resolve_output_dir(cli.output_dir.as_deref(), file_dir),
        format: cli.format.or(file_format).unwrap_or_default(),
    };
    match &cli.command {
        Command::Preprocess(args) => commands::preprocess(args, &output(None, None)),
        Command::Analyze(args) => commands::analyze(args, &output(None, None)),
        Command::Train(args) => commands::train(args, &output(None, None)),
        Command::Generate(args) => commands::generate(args, &output(None, None)),
        Command::Evaluate(args) => commands::evaluate(args, &output(None, None)),
        Command::Compare(args) => commands::compare(args, &output(None, None)),
        Command::Benchmark(args) => {
            let cfg = args.resolve_config(cli.output_dir.as_deref(), cli.format)?;
            run_benchmark(&cfg, args.jobs).map(|_| ())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
