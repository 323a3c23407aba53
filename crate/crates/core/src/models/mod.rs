//! Guess producers behind one streaming contract.
//!
//! Native enumerators ([`markov`], [`pcfg`]) emit guesses in their model's
//! descending-probability order; [`external`] replays guess files written by
//! any other tool; [`random`] draws uniform strings for the humanness upper
//! baseline.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub mod external;
pub mod markov;
pub mod pcfg;
pub mod random;

pub use external::{open_external_stream, ExternalGuessStream};
pub use markov::{enumerate_markov, train_markov, MarkovConfig, MarkovGuesses, MarkovModel};
pub use pcfg::{enumerate_pcfg, train_pcfg, PcfgGuesses, PcfgModel};
pub use random::{random_baseline, RandomGuesses};

/// An ordered, possibly repeating stream of guesses.
///
/// `Ok(None)` signals exhaustion. Order is deterministic for a given model
/// and configuration.
pub trait GuessSource {
    fn name(&self) -> &str;

    fn next_guess(&mut self) -> Result<Option<String>>;
}

impl<G: GuessSource + ?Sized> GuessSource for Box<G> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn next_guess(&mut self) -> Result<Option<String>> {
        (**self).next_guess()
    }
}

/// Replays an in-memory guess list, for runs that reuse one materialized
/// stream across several test sets.
pub struct SliceGuesses<'a> {
    name: &'a str,
    iter: std::slice::Iter<'a, String>,
}

impl<'a> SliceGuesses<'a> {
    pub fn new(name: &'a str, guesses: &'a [String]) -> Self {
        Self {
            name,
            iter: guesses.iter(),
        }
    }
}

impl GuessSource for SliceGuesses<'_> {
    fn name(&self) -> &str {
        self.name
    }

    fn next_guess(&mut self) -> Result<Option<String>> {
        Ok(self.iter.next().cloned())
    }
}

/// Drains up to `limit` guesses into a vector.
pub fn take_guesses(source: &mut dyn GuessSource, limit: usize) -> Result<Vec<String>> {
    let mut out = Vec::new();
    while out.len() < limit {
        match source.next_guess()? {
            Some(g) => out.push(g),
            None => break,
        }
    }
    Ok(out)
}

/// Which native model to train, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NativeSpec {
    Markov(MarkovConfig),
    Pcfg,
}

impl NativeSpec {
    pub fn label(&self) -> &'static str {
        match self {
            NativeSpec::Markov(_) => "markov",
            NativeSpec::Pcfg => "pcfg",
        }
    }

    pub fn train<S: AsRef<str>>(&self, train: &[S], alphabet: &Vocabulary) -> Result<TrainedModel> {
        Ok(match self {
            NativeSpec::Markov(cfg) => TrainedModel::Markov(train_markov(train, cfg, alphabet)?),
            NativeSpec::Pcfg => TrainedModel::Pcfg(train_pcfg(train)?),
        })
    }
}

/// A trained native model, persisted as JSON with a `kind` discriminator.
#[derive(Clone, Debug, PartialEq)]
pub enum TrainedModel {
    Markov(MarkovModel),
    Pcfg(PcfgModel),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Markov(_) => "markov",
            TrainedModel::Pcfg(_) => "pcfg",
        }
    }

    /// Boxed enumerator yielding at most `limit` guesses.
    pub fn guesses(&self, limit: u64) -> Box<dyn GuessSource + '_> {
        match self {
            TrainedModel::Markov(m) => Box::new(enumerate_markov(m, limit)),
            TrainedModel::Pcfg(m) => Box::new(enumerate_pcfg(m, limit)),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = match self {
            TrainedModel::Markov(m) => serde_json::to_vec_pretty(&m.to_file())?,
            TrainedModel::Pcfg(m) => serde_json::to_vec_pretty(&m.to_file())?,
        };
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            kind: String,
        }
        let probe: Probe = serde_json::from_str(text)?;
        match probe.kind.as_str() {
            "markov" => Ok(TrainedModel::Markov(MarkovModel::from_file(
                serde_json::from_str(text)?,
            )?)),
            "pcfg" => Ok(TrainedModel::Pcfg(PcfgModel::from_file(
                serde_json::from_str(text)?,
            )?)),
            other => Err(Error::malformed(
                "model file",
                format!("unknown kind {other:?}"),
            )),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(inner) => Error::malformed(path.display().to_string(), inner),
            other => other,
        })
    }
}
