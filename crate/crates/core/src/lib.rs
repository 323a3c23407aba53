//! Standardized benchmarking for trawling password-guessing models.
//!
//! The crate covers the whole pipeline: [`corpus`] turns a leaked-password
//! file into a leak-free train/test split, [`analysis`] characterizes
//! corpora, [`models`] produces ordered guess streams (native Markov and PCFG
//! enumerators, external guess files, a random baseline), [`eval`] matches
//! streams against test sets, and [`metrics`] compares models.
//!
//! ```no_run
//! use passbench::corpus::{load_corpus, preprocess, PreprocessConfig, Vocabulary};
//! use passbench::eval::{run_match, Checkpoints};
//! use passbench::models::{NativeSpec, MarkovConfig};
//!
//! # fn main() -> passbench::Result<()> {
//! let raw = load_corpus("leak.txt".as_ref())?;
//! let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default())?;
//! let model = NativeSpec::Markov(MarkovConfig::default()).train(split.train(), split.vocab())?;
//! let checkpoints = Checkpoints::desk_default();
//! let outcome = run_match(&mut model.guesses(checkpoints.last()), &split, &checkpoints)?;
//! println!("{:.2}% guessed", outcome.curve.last().unwrap().pct_unique);
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};

/// Version stamped into every persisted report, model and split sidecar.
pub const SCHEMA_VERSION: u32 = 1;
