//! The match engine and the scenario runners built on it.
//!
//! A guess stream is consumed once; the first index at which each unique test
//! password appears becomes its rank. Every breakdown (by length, pattern or
//! frequency bucket) is a filter over those ranks.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{classify_patterns, frequency_buckets, Bucket, PatternId};
use crate::corpus::{PreprocessConfig, SplitCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::metrics::{uniqueness, GuessSetSummary};
use crate::models::{GuessSource, NativeSpec};
use crate::rng::{derive_seed, SeededRng};

/// Strictly increasing, positive guess counts at which curves are sampled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Checkpoints(Vec<u64>);

impl Checkpoints {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Config("at least one checkpoint is required".into()));
        }
        if counts[0] == 0 || counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "checkpoints must be positive and strictly increasing: {counts:?}"
            )));
        }
        Ok(Self(counts))
    }

    /// 10^3, 10^4, 10^5, 10^6.
    pub fn desk_default() -> Self {
        Self(vec![1_000, 10_000, 100_000, 1_000_000])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn last(&self) -> u64 {
        *self.0.last().unwrap()
    }

    /// Adjacent (X, Y) pairs for marginal-gain tables.
    pub fn consecutive_pairs(&self) -> Vec<(u64, u64)> {
        self.0.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

impl TryFrom<Vec<u64>> for Checkpoints {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Checkpoints::new(v)
    }
}

impl From<Checkpoints> for Vec<u64> {
    fn from(c: Checkpoints) -> Vec<u64> {
        c.0
    }
}

/// First-match rank for every matched test password.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchLedger {
    pub first_match_rank: BTreeMap<String, u64>,
    pub guesses_consumed: u64,
    pub unique_guesses: u64,
}

impl MatchLedger {
    pub fn matched_by(&self, at: u64) -> usize {
        self.first_match_rank.values().filter(|&&r| r <= at).count()
    }

    pub fn is_matched_by(&self, password: &str, at: u64) -> bool {
        self.first_match_rank
            .get(password)
            .is_some_and(|&r| r <= at)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub guess_count: u64,
    pub matched_unique: usize,
    pub pct_unique: f64,
    pub pct_weighted: f64,
}

/// Everything one pass over a guess stream produces.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchOutcome {
    pub ledger: MatchLedger,
    pub curve: Vec<CurvePoint>,
    pub summary: GuessSetSummary,
    /// The source ran dry before the last checkpoint.
    pub exhausted: bool,
}

/// Streams `source` against the split's test set up to the last checkpoint.
///
/// Repeated guesses consume budget but cannot match again. When the source
/// ends early, the curve gets one extra point at the number consumed.
pub fn run_match(
    source: &mut dyn GuessSource,
    split: &SplitCorpus,
    checkpoints: &Checkpoints,
) -> Result<MatchOutcome> {
    if split.test_len() == 0 {
        return Err(Error::EmptyInput("test set"));
    }
    let test: Vec<&str> = split.test_unique().collect();
    let index: HashMap<&str, usize> = test.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let weight_total: u64 = split.test_freq().values().sum();
    let mut ranks: Vec<Option<u64>> = vec![None; test.len()];
    let mut generated: HashSet<String> = HashSet::new();
    let mut matched = 0usize;
    let mut matched_weight = 0u64;
    let mut consumed = 0u64;
    let mut curve = Vec::with_capacity(checkpoints.as_slice().len());
    let mut next_cp = 0usize;
    let limit = checkpoints.last();

    let point = |count: u64, matched: usize, matched_weight: u64| CurvePoint {
        guess_count: count,
        matched_unique: matched,
        pct_unique: 100.0 * matched as f64 / test.len() as f64,
        pct_weighted: 100.0 * matched_weight as f64 / weight_total as f64,
    };

    let mut exhausted = false;
    while consumed < limit {
        let Some(guess) = source.next_guess()? else {
            exhausted = true;
            break;
        };
        consumed += 1;
        if let Some(&i) = index.get(guess.as_str()) {
            if ranks[i].is_none() {
                ranks[i] = Some(consumed);
                matched += 1;
                matched_weight += split.freq(test[i]);
            }
        }
        if !generated.contains(&guess) {
            generated.insert(guess);
        }
        if consumed == checkpoints.as_slice()[next_cp] {
            curve.push(point(consumed, matched, matched_weight));
            next_cp += 1;
        }
    }
    if exhausted && next_cp < checkpoints.as_slice().len() {
        curve.push(point(consumed, matched, matched_weight));
    }

    let first_match_rank = ranks
        .iter()
        .zip(&test)
        .filter_map(|(r, p)| r.map(|r| ((*p).to_owned(), r)))
        .collect();
    let matched_set = test
        .iter()
        .zip(&ranks)
        .filter(|(_, r)| r.is_some())
        .map(|(p, _)| (*p).to_owned())
        .collect();
    let ledger = MatchLedger {
        first_match_rank,
        guesses_consumed: consumed,
        unique_guesses: generated.len() as u64,
    };
    Ok(MatchOutcome {
        ledger,
        curve,
        summary: GuessSetSummary {
            generated,
            matched: matched_set,
            total_emitted: consumed,
        },
        exhausted,
    })
}

/// Gain between two checkpoints: `total` in percentage points of the test
/// set, `relative` as a percentage of the matches already held at X.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalGain {
    pub from: u64,
    pub to: u64,
    pub total: f64,
    pub relative: Option<f64>,
}

pub fn marginal_gain(curve: &[CurvePoint], pairs: &[(u64, u64)]) -> Result<Vec<MarginalGain>> {
    let at = |count: u64| {
        curve
            .iter()
            .find(|p| p.guess_count == count)
            .ok_or_else(|| Error::Config(format!("checkpoint {count} is not on the curve")))
    };
    pairs
        .iter()
        .map(|&(from, to)| {
            if from >= to {
                return Err(Error::Config(format!(
                    "marginal pair {from} -> {to} is not increasing"
                )));
            }
            let (x, y) = (at(from)?, at(to)?);
            let relative = (x.matched_unique > 0).then(|| {
                100.0 * (y.matched_unique as f64 - x.matched_unique as f64)
                    / x.matched_unique as f64
            });
            Ok(MarginalGain {
                from,
                to,
                total: y.pct_unique - x.pct_unique,
                relative,
            })
        })
        .collect()
}

fn check_at(ledger: &MatchLedger, at: u64) -> Result<()> {
    if at > ledger.guesses_consumed {
        return Err(Error::Config(format!(
            "breakdown point {at} exceeds the {} guesses consumed",
            ledger.guesses_consumed
        )));
    }
    Ok(())
}

/// Percentage matched by `at` within groups of test passwords. Empty groups
/// are absent from the result.
fn grouped<K: Ord>(
    ledger: &MatchLedger,
    split: &SplitCorpus,
    at: u64,
    mut groups_of: impl FnMut(&str) -> Result<Vec<K>>,
) -> Result<BTreeMap<K, f64>> {
    check_at(ledger, at)?;
    let mut tally: BTreeMap<K, (usize, usize)> = BTreeMap::new();
    for p in split.test_unique() {
        let hit = ledger.is_matched_by(p, at);
        for key in groups_of(p)? {
            let entry = tally.entry(key).or_default();
            entry.1 += 1;
            if hit {
                entry.0 += 1;
            }
        }
    }
    Ok(tally
        .into_iter()
        .map(|(k, (hit, all))| (k, 100.0 * hit as f64 / all as f64))
        .collect())
}

pub fn breakdown_by_length(
    ledger: &MatchLedger,
    split: &SplitCorpus,
    at: u64,
) -> Result<BTreeMap<usize, f64>> {
    grouped(ledger, split, at, |p| Ok(vec![p.chars().count()]))
}

pub fn breakdown_by_pattern(
    ledger: &MatchLedger,
    split: &SplitCorpus,
    at: u64,
) -> Result<BTreeMap<PatternId, f64>> {
    let vocab = split.vocab();
    grouped(ledger, split, at, |p| {
        Ok(classify_patterns(p, vocab)?.iter().collect())
    })
}

pub fn breakdown_by_frequency(
    ledger: &MatchLedger,
    split: &SplitCorpus,
    at: u64,
) -> Result<BTreeMap<Bucket, f64>> {
    let buckets = frequency_buckets(split)?;
    let mut membership: HashMap<&str, Vec<Bucket>> = HashMap::new();
    for bucket in Bucket::ALL {
        for p in buckets.get(bucket) {
            membership.entry(p.as_str()).or_default().push(bucket);
        }
    }
    grouped(ledger, split, at, |p| {
        Ok(membership.get(p).cloned().unwrap_or_default())
    })
}

/// [`run_match`] for a model trained on another dataset; the two datasets
/// must share the length window and vocabulary.
pub fn cross_dataset_run(
    source: &mut dyn GuessSource,
    train_config: &PreprocessConfig,
    train_vocab: &Vocabulary,
    test: &SplitCorpus,
    checkpoints: &Checkpoints,
) -> Result<MatchOutcome> {
    test.check_compatible(train_config, train_vocab)?;
    run_match(source, test, checkpoints)
}

/// Final guess rates keyed by (train dataset, test dataset).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub datasets: Vec<String>,
    pub cells: BTreeMap<String, BTreeMap<String, f64>>,
}

impl CrossMatrix {
    pub fn new(datasets: Vec<String>) -> Self {
        Self {
            datasets,
            cells: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, train: &str, test: &str, pct: f64) {
        self.cells
            .entry(train.to_owned())
            .or_default()
            .insert(test.to_owned(), pct);
    }

    pub fn get(&self, train: &str, test: &str) -> Option<f64> {
        self.cells.get(train)?.get(test).copied()
    }

    pub fn diagonal(&self) -> Vec<(String, f64)> {
        self.datasets
            .iter()
            .filter_map(|d| self.get(d, d).map(|v| (d.clone(), v)))
            .collect()
    }

    /// Rows are training datasets, columns test datasets.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["train\\test".to_owned()];
        header.extend(self.datasets.iter().cloned());
        w.write_record(&header)?;
        for train in &self.datasets {
            let mut row = vec![train.clone()];
            for test in &self.datasets {
                row.push(
                    self.get(train, test)
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_default(),
                );
            }
            w.write_record(&row)?;
        }
        w.into_inner().map_err(|e| Error::malformed("csv", e))
    }
}

/// Trains one model per nested training-subset size and reports the final
/// unique guess rate on the fixed test set.
pub fn size_sensitivity_run(
    split: &SplitCorpus,
    sizes: &[usize],
    spec: &NativeSpec,
    checkpoints: &Checkpoints,
    seed: u64,
) -> Result<BTreeMap<usize, f64>> {
    if let Some(&too_big) = sizes.iter().find(|&&s| s > split.train().len()) {
        return Err(Error::Config(format!(
            "train size {too_big} exceeds the {} available training passwords",
            split.train().len()
        )));
    }
    let mut pool: Vec<&str> = split.train().iter().map(String::as_str).collect();
    SeededRng::new(derive_seed(seed, "sizesweep")).shuffle(&mut pool);
    let mut out = BTreeMap::new();
    for &size in sizes {
        let model = spec.train(&pool[..size], split.vocab())?;
        let mut source = model.guesses(checkpoints.last());
        let outcome = run_match(&mut source, split, checkpoints)?;
        out.insert(size, outcome.curve.last().map_or(0.0, |p| p.pct_unique));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub guesses_consumed: u64,
    pub unique_guesses: u64,
    pub matched: usize,
    pub test_unique: usize,
    pub uniqueness_pct: Option<f64>,
    pub exhausted: bool,
}

/// JSON document for one (model, dataset) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub model: String,
    pub dataset: String,
    pub checkpoints: Checkpoints,
    pub curve: Vec<CurvePoint>,
    pub marginal: Vec<MarginalGain>,
    pub breakdown_at: u64,
    pub lengths: BTreeMap<usize, f64>,
    pub patterns: BTreeMap<PatternId, f64>,
    pub frequency: BTreeMap<Bucket, f64>,
    pub summary: LedgerSummary,
}

impl EvaluationReport {
    /// Breakdowns are taken at the last checkpoint, or at the point of
    /// exhaustion when the source ran dry.
    pub fn build(
        model: &str,
        split: &SplitCorpus,
        checkpoints: &Checkpoints,
        outcome: &MatchOutcome,
    ) -> Result<Self> {
        let at = checkpoints.last().min(outcome.ledger.guesses_consumed);
        let pairs: Vec<(u64, u64)> = checkpoints
            .consecutive_pairs()
            .into_iter()
            .filter(|&(_, y)| y <= outcome.ledger.guesses_consumed)
            .collect();
        Ok(Self {
            schema_version: crate::SCHEMA_VERSION,
            model: model.to_owned(),
            dataset: split.name().to_owned(),
            checkpoints: checkpoints.clone(),
            curve: outcome.curve.clone(),
            marginal: marginal_gain(&outcome.curve, &pairs)?,
            breakdown_at: at,
            lengths: breakdown_by_length(&outcome.ledger, split, at)?,
            patterns: breakdown_by_pattern(&outcome.ledger, split, at)?,
            frequency: breakdown_by_frequency(&outcome.ledger, split, at)?,
            summary: LedgerSummary {
                guesses_consumed: outcome.ledger.guesses_consumed,
                unique_guesses: outcome.ledger.unique_guesses,
                matched: outcome.ledger.first_match_rank.len(),
                test_unique: split.test_len(),
                uniqueness_pct: uniqueness(&outcome.summary).ok(),
                exhausted: outcome.exhausted,
            },
        })
    }
}
