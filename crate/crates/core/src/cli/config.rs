//! `benchmark` run configuration, read from TOML.
//!
//! ```toml
//! seed = 42
//! checkpoints = [1000, 10000, 100000, 1000000]
//! scenarios = ["curve", "marginal", "compare"]
//!
//! [preprocess]
//! max_length = 12
//! split_ratio = 0.8
//!
//! [[datasets]]
//! name = "siteA"
//! path = "data/siteA.txt"
//!
//! [[models]]
//! name = "markov4"
//! kind = "markov"
//! order = 4
//!
//! [[models]]
//! name = "fla"
//! kind = "external"
//! guesses = { siteA = "guesses/fla-siteA.txt" }
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::Format;
use crate::corpus::{PreprocessConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::Checkpoints;
use crate::models::{MarkovConfig, NativeSpec};

/// Experiments `benchmark` can run.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Curve,
    Marginal,
    Lengths,
    Patterns,
    Frequency,
    Crossdataset,
    Sizesweep,
    Compare,
    Humanness,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Curve,
        Scenario::Marginal,
        Scenario::Lengths,
        Scenario::Patterns,
        Scenario::Frequency,
        Scenario::Crossdataset,
        Scenario::Sizesweep,
        Scenario::Compare,
        Scenario::Humanness,
    ];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().unwrap().get_name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Scenario as ValueEnum>::from_str(s, true)
            .map_err(|_| Error::Config(format!("unknown scenario {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Markov,
    Pcfg,
    External,
    Random,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().unwrap().get_name())
    }
}

/// `[preprocess]`; an absent seed falls back to the root seed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub max_length: Option<usize>,
    pub min_length: Option<usize>,
    pub split_ratio: Option<f64>,
    pub seed: Option<u64>,
    pub vocabulary: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
}

/// One `[[models]]` table. Markov fields apply to `markov`, `guesses` and
/// `dedupe` to `external`, `min_len`/`max_len` to `random`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_count: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_base: Option<f64>,
    /// Guess file per training dataset name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub guesses: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub dedupe: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
}

impl ModelEntry {
    /// A model with default parameters.
    pub fn new(name: &str, kind: ModelKind) -> Self {
        Self {
            name: name.to_owned(),
            kind,
            order: None,
            level_count: None,
            level_base: None,
            guesses: BTreeMap::new(),
            dedupe: false,
            min_len: None,
            max_len: None,
        }
    }

    /// Training spec for native kinds.
    pub fn native_spec(&self) -> Option<NativeSpec> {
        match self.kind {
            ModelKind::Markov => {
                let d = MarkovConfig::default();
                Some(NativeSpec::Markov(MarkovConfig {
                    order: self.order.unwrap_or(d.order),
                    level_count: self.level_count.unwrap_or(d.level_count),
                    level_base: self.level_base.unwrap_or(d.level_base),
                }))
            }
            ModelKind::Pcfg => Some(NativeSpec::Pcfg),
            ModelKind::External | ModelKind::Random => None,
        }
    }

    fn validate(&self, datasets: &BTreeSet<&str>) -> Result<()> {
        let err = |msg: String| Err(Error::Config(format!("model {:?}: {msg}", self.name)));
        let markov_fields =
            self.order.is_some() || self.level_count.is_some() || self.level_base.is_some();
        if markov_fields && self.kind != ModelKind::Markov {
            return err(format!(
                "order/level_count/level_base apply only to markov, not {}",
                self.kind
            ));
        }
        if (!self.guesses.is_empty() || self.dedupe) && self.kind != ModelKind::External {
            return err(format!(
                "guesses/dedupe apply only to external, not {}",
                self.kind
            ));
        }
        if (self.min_len.is_some() || self.max_len.is_some()) && self.kind != ModelKind::Random {
            return err(format!(
                "min_len/max_len apply only to random, not {}",
                self.kind
            ));
        }
        match self.kind {
            ModelKind::Markov => {
                if let Some(NativeSpec::Markov(cfg)) = self.native_spec() {
                    cfg.validate()?;
                }
            }
            ModelKind::External => {
                if self.guesses.is_empty() {
                    return err(
                        "external models need a `guesses` table mapping dataset names to files"
                            .into(),
                    );
                }
                if let Some(unknown) = self.guesses.keys().find(|k| !datasets.contains(k.as_str()))
                {
                    return err(format!("guesses refer to unknown dataset {unknown:?}"));
                }
            }
            ModelKind::Random => {
                if let (Some(lo), Some(hi)) = (self.min_len, self.max_len) {
                    if lo > hi {
                        return err(format!("min_len {lo} exceeds max_len {hi}"));
                    }
                }
            }
            ModelKind::Pcfg => {}
        }
        Ok(())
    }
}

/// A complete `benchmark` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub checkpoints: Checkpoints,
    pub scenarios: Vec<Scenario>,
    /// Nested training-subset sizes for `sizesweep`; defaults to a quarter,
    /// half and all of each training set.
    pub sizes: Option<Vec<usize>>,
    /// Passwords per side for humanness distances.
    pub humanness_sample: usize,
    pub preprocess: PreprocessSection,
    pub datasets: Vec<DatasetEntry>,
    pub models: Vec<ModelEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: None,
            format: None,
            checkpoints: Checkpoints::desk_default(),
            scenarios: Scenario::ALL.to_vec(),
            sizes: None,
            humanness_sample: 10_000,
            preprocess: PreprocessSection::default(),
            datasets: Vec::new(),
            models: Vec::new(),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

impl RunConfig {
    /// Parses TOML; relative paths are joined onto `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("run config: {}", e.message())))?;
        for d in &mut cfg.datasets {
            d.path = resolve(base_dir, &d.path);
        }
        for m in &mut cfg.models {
            for p in m.guesses.values_mut() {
                *p = resolve(base_dir, p);
            }
        }
        if let Some(dir) = &cfg.output_dir {
            cfg.output_dir = Some(resolve(base_dir, dir));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read run config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::Config(format!("cannot serialize run config: {e}")))
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        let d = PreprocessConfig::default();
        let p = &self.preprocess;
        PreprocessConfig {
            max_length: p.max_length.unwrap_or(d.max_length),
            min_length: p.min_length.unwrap_or(d.min_length),
            split_ratio: p.split_ratio.unwrap_or(d.split_ratio),
            seed: p.seed.unwrap_or(self.seed),
        }
    }

    pub fn vocabulary(&self) -> Result<Vocabulary> {
        match &self.preprocess.vocabulary {
            Some(v) => Vocabulary::new(v),
            None => Ok(Vocabulary::default()),
        }
    }

    pub fn has(&self, scenario: Scenario) -> bool {
        self.scenarios.contains(&scenario)
    }

    /// Checks names, per-kind fields and scenario prerequisites.
    pub fn validate(&self) -> Result<()> {
        self.preprocess_config().validate()?;
        self.vocabulary()?;
        if self.datasets.is_empty() {
            return Err(Error::Config(
                "at least one [[datasets]] entry is required".into(),
            ));
        }
        if self.models.is_empty() {
            return Err(Error::Config(
                "at least one [[models]] entry is required".into(),
            ));
        }
        let mut names = BTreeSet::new();
        for d in &self.datasets {
            if d.name.is_empty() || !names.insert(d.name.as_str()) {
                return Err(Error::Config(format!(
                    "dataset names must be unique and non-empty: {:?}",
                    d.name
                )));
            }
        }
        let mut model_names = BTreeSet::new();
        for m in &self.models {
            if m.name.is_empty() || !model_names.insert(m.name.as_str()) {
                return Err(Error::Config(format!(
                    "model names must be unique and non-empty: {:?}",
                    m.name
                )));
            }
            m.validate(&names)?;
        }
        let unique: BTreeSet<_> = self.scenarios.iter().collect();
        if unique.len() != self.scenarios.len() {
            return Err(Error::Config("scenarios are listed more than once".into()));
        }
        if self.has(Scenario::Compare) && self.models.len() < 2 {
            return Err(Error::Config(
                "scenario compare needs at least two models".into(),
            ));
        }
        if self.has(Scenario::Crossdataset) && self.datasets.len() < 2 {
            return Err(Error::Config(
                "scenario crossdataset needs at least two datasets".into(),
            ));
        }
        if self.has(Scenario::Sizesweep) {
            if !self.models.iter().any(|m| m.native_spec().is_some()) {
                return Err(Error::Config(
                    "scenario sizesweep needs a markov or pcfg model".into(),
                ));
            }
            if let Some(sizes) = &self.sizes {
                if sizes.len() < 2 || sizes.contains(&0) || sizes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config(format!(
                        "sizes must hold at least two positive, increasing values: {sizes:?}"
                    )));
                }
            }
        }
        if self.has(Scenario::Humanness) && self.humanness_sample == 0 {
            return Err(Error::Config("humanness_sample must be positive".into()));
        }
        Ok(())
    }
}
