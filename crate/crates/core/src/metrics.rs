//! Model-comparison and quality metrics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::analysis::{classify_patterns, PatternId};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Distinct generated guesses of one model on one dataset, and the subset
/// that hit the test set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuessSetSummary {
    pub generated: HashSet<String>,
    pub matched: HashSet<String>,
    pub total_emitted: u64,
}

fn intersection_len(a: &HashSet<String>, b: &HashSet<String>) -> usize {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().filter(|x| large.contains(*x)).count()
}

fn check_paired(m1: &[&GuessSetSummary], m2: &[&GuessSetSummary]) -> Result<()> {
    if m1.is_empty() || m1.len() != m2.len() {
        return Err(Error::Config(format!(
            "both models need a summary for every dataset ({} vs {})",
            m1.len(),
            m2.len()
        )));
    }
    Ok(())
}

/// |A ∩ B| / |A ∪ B| for one dataset.
pub fn jaccard_cell(a: &HashSet<String>, b: &HashSet<String>) -> Result<f64> {
    let inter = intersection_len(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return Err(Error::Undefined(
            "jaccard index of two empty guess sets".into(),
        ));
    }
    Ok(inter as f64 / union as f64)
}

/// Mean per-dataset Jaccard index of the two models' distinct guesses.
/// `m1[j]` and `m2[j]` must describe the same dataset.
pub fn jaccard_index(m1: &[&GuessSetSummary], m2: &[&GuessSetSummary]) -> Result<f64> {
    check_paired(m1, m2)?;
    let mut sum = 0.0;
    for (a, b) in m1.iter().zip(m2) {
        sum += jaccard_cell(&a.generated, &b.generated)?;
    }
    Ok(sum / m1.len() as f64)
}

/// (|G1 ∪ G2| - max) / max with max = max(|G1|, |G2|); `None` when neither
/// model matched anything.
pub fn mergeability_cell(g1: &HashSet<String>, g2: &HashSet<String>) -> Option<f64> {
    let max = g1.len().max(g2.len());
    if max == 0 {
        return None;
    }
    let union = g1.len() + g2.len() - intersection_len(g1, g2);
    Some((union - max) as f64 / max as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mergeability {
    /// Mean over defined cells; `None` if no cell is defined.
    pub mean: Option<f64>,
    pub cells: Vec<Option<f64>>,
}

/// Per-dataset mergeability averaged over datasets where at least one model
/// matched something; undefined cells are reported and left out of the mean.
pub fn mergeability_index(
    m1: &[&GuessSetSummary],
    m2: &[&GuessSetSummary],
) -> Result<Mergeability> {
    check_paired(m1, m2)?;
    let cells: Vec<Option<f64>> = m1
        .iter()
        .zip(m2)
        .map(|(a, b)| mergeability_cell(&a.matched, &b.matched))
        .collect();
    let defined: Vec<f64> = cells.iter().flatten().copied().collect();
    if defined.len() < cells.len() {
        log::warn!(
            "mergeability: {} of {} datasets had no matches for either model and were excluded",
            cells.len() - defined.len(),
            cells.len()
        );
    }
    let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(Mergeability { mean, cells })
}

/// One prefix of the greedy inclusion order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub models: Vec<String>,
    pub cumulative_pct: f64,
    pub gain_pct: f64,
}

/// Iterative elimination: starting from all models, repeatedly drop the one
/// whose removal loses the fewest matched passwords (ties drop the
/// lexicographically last name). The reversed drop order is the inclusion
/// order; gains are percentage points of `test_size`.
pub fn multi_model_select(
    models: &[(String, &HashSet<String>)],
    test_size: usize,
) -> Result<Vec<SelectionStep>> {
    if models.is_empty() {
        return Err(Error::EmptyInput("model list"));
    }
    if test_size == 0 {
        return Err(Error::EmptyInput("test set"));
    }
    let mut coverage: HashMap<&str, usize> = HashMap::new();
    for (_, set) in models {
        for p in set.iter() {
            *coverage.entry(p.as_str()).or_default() += 1;
        }
    }
    let mut alive: Vec<usize> = (0..models.len()).collect();
    // (removed model, passwords lost)
    let mut removals: Vec<(usize, usize)> = Vec::new();
    while alive.len() > 1 {
        let losses = alive.iter().map(|&m| {
            let lost = models[m]
                .1
                .iter()
                .filter(|p| coverage[p.as_str()] == 1)
                .count();
            (m, lost)
        });
        let (victim, lost) = losses
            .min_by(|a, b| {
                a.1.cmp(&b.1)
                    .then_with(|| models[b.0].0.cmp(&models[a.0].0))
            })
            .unwrap();
        for p in models[victim].1.iter() {
            *coverage.get_mut(p.as_str()).unwrap() -= 1;
        }
        alive.retain(|&m| m != victim);
        removals.push((victim, lost));
    }
    let pct = |n: usize| 100.0 * n as f64 / test_size as f64;
    let first = alive[0];
    let mut members = vec![models[first].0.clone()];
    let mut covered = models[first].1.len();
    let mut steps = vec![SelectionStep {
        models: members.clone(),
        cumulative_pct: pct(covered),
        gain_pct: pct(covered),
    }];
    for &(m, gained) in removals.iter().rev() {
        members.push(models[m].0.clone());
        covered += gained;
        steps.push(SelectionStep {
            models: members.clone(),
            cumulative_pct: pct(covered),
            gain_pct: pct(gained),
        });
    }
    Ok(steps)
}

/// Lower (test vs train) and upper (test vs random) distances for one
/// distance function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineBounds {
    pub distance: String,
    pub lower: f64,
    pub upper: f64,
}

/// 100 * (d - L) / (U - L). Not clamped: values outside 0..100 are meaningful.
pub fn humanness_normalize(d_raw: f64, bounds: &BaselineBounds) -> Result<f64> {
    if bounds.upper == bounds.lower {
        return Err(Error::DegenerateBaselines(bounds.lower));
    }
    Ok(100.0 * (d_raw - bounds.lower) / (bounds.upper - bounds.lower))
}

/// A distance between two password multisets.
pub trait DistanceFunction: Sync {
    fn name(&self) -> &str;

    fn dist(&self, a: &[String], b: &[String]) -> Result<f64>;

    fn bounds(
        &self,
        test: &[String],
        train: &[String],
        random: &[String],
    ) -> Result<BaselineBounds> {
        Ok(BaselineBounds {
            distance: self.name().to_owned(),
            lower: self.dist(test, train)?,
            upper: self.dist(test, random)?,
        })
    }
}

/// Jensen-Shannon divergence (natural log) between two unnormalized
/// histograms over the same key space.
pub fn jensen_shannon<K: Ord + Hash + Clone>(
    p: &HashMap<K, f64>,
    q: &HashMap<K, f64>,
) -> Result<f64> {
    let sp: f64 = p.values().sum();
    let sq: f64 = q.values().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return Err(Error::EmptyInput("distribution"));
    }
    let mut keys: Vec<&K> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut js = 0.0;
    for k in keys {
        let a = p.get(k).copied().unwrap_or(0.0) / sp;
        let b = q.get(k).copied().unwrap_or(0.0) / sq;
        let m = 0.5 * (a + b);
        if a > 0.0 {
            js += 0.5 * a * (a / m).ln();
        }
        if b > 0.0 {
            js += 0.5 * b * (b / m).ln();
        }
    }
    Ok(js.clamp(0.0, std::f64::consts::LN_2))
}

fn histogram<K: Hash + Eq, S: AsRef<str>>(
    items: &[S],
    mut keys: impl FnMut(&str, &mut dyn FnMut(K)),
) -> HashMap<K, f64> {
    let mut h = HashMap::new();
    for s in items {
        keys(s.as_ref(), &mut |k| *h.entry(k).or_insert(0.0) += 1.0);
    }
    h
}

fn non_empty<S>(a: &[S], b: &[S]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("password multiset"));
    }
    Ok(())
}

pub fn length_jsd<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<f64> {
    non_empty(a, b)?;
    let lengths = |s: &str, emit: &mut dyn FnMut(usize)| emit(s.chars().count());
    jensen_shannon(&histogram(a, lengths), &histogram(b, lengths))
}

/// Over character bigrams with `^`/`$` boundary markers, so every non-empty
/// password contributes at least two bigrams.
pub fn ngram_jsd<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<f64> {
    non_empty(a, b)?;
    let bigrams = |s: &str, emit: &mut dyn FnMut((Option<char>, Option<char>))| {
        let mut prev = None;
        for ch in s.chars() {
            emit((prev, Some(ch)));
            prev = Some(ch);
        }
        emit((prev, None));
    };
    jensen_shannon(&histogram(a, bigrams), &histogram(b, bigrams))
}

fn pattern_histogram<S: AsRef<str>>(
    items: &[S],
    vocab: &Vocabulary,
) -> Result<HashMap<PatternId, f64>> {
    let mut h = HashMap::new();
    for s in items {
        for id in classify_patterns(s.as_ref(), vocab)?.iter() {
            *h.entry(id).or_insert(0.0) += 1.0;
        }
    }
    Ok(h)
}

pub fn pattern_jsd<S: AsRef<str>>(a: &[S], b: &[S], vocab: &Vocabulary) -> Result<f64> {
    non_empty(a, b)?;
    jensen_shannon(&pattern_histogram(a, vocab)?, &pattern_histogram(b, vocab)?)
}

pub struct LengthJsd;
pub struct NgramJsd;
pub struct PatternJsd(pub Vocabulary);

impl DistanceFunction for LengthJsd {
    fn name(&self) -> &str {
        "length_jsd"
    }
    fn dist(&self, a: &[String], b: &[String]) -> Result<f64> {
        length_jsd(a, b)
    }
}

impl DistanceFunction for NgramJsd {
    fn name(&self) -> &str {
        "ngram_jsd"
    }
    fn dist(&self, a: &[String], b: &[String]) -> Result<f64> {
        ngram_jsd(a, b)
    }
}

impl DistanceFunction for PatternJsd {
    fn name(&self) -> &str {
        "pattern_jsd"
    }
    fn dist(&self, a: &[String], b: &[String]) -> Result<f64> {
        pattern_jsd(a, b, &self.0)
    }
}

/// The built-in distances, in report order.
pub fn builtin_distances(vocab: &Vocabulary) -> Vec<Box<dyn DistanceFunction>> {
    vec![
        Box::new(LengthJsd),
        Box::new(NgramJsd),
        Box::new(PatternJsd(vocab.clone())),
    ]
}

/// Names of externally computed humanness metrics; raw values for these
/// can be supplied and normalized but are not computed here.
pub const EXTERNAL_HUMANNESS_SLOTS: [&str; 4] = [
    "cnn_divergence",
    "imd",
    "alpha_precision_beta_recall",
    "mtopdiv",
];

/// Share of distinct guesses among everything emitted, as a percentage.
pub fn uniqueness(summary: &GuessSetSummary) -> Result<f64> {
    if summary.total_emitted == 0 {
        return Err(Error::EmptyInput("guess stream"));
    }
    Ok(100.0 * summary.generated.len() as f64 / summary.total_emitted as f64)
}

/// Population standard deviation over mean, as a percentage.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Config(
            "coefficient of variation needs at least two values".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::Undefined(
            "coefficient of variation with zero mean".into(),
        ));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(100.0 * var.sqrt() / mean)
}

/// Relative drop of the weighted mean cross-dataset rate below the
/// in-distribution rate, as a percentage.
pub fn generalization_loss(in_dist_pct: f64, cross_pcts: &[f64], weights: &[f64]) -> Result<f64> {
    if in_dist_pct <= 0.0 {
        return Err(Error::Undefined(
            "generalization loss with zero in-distribution rate".into(),
        ));
    }
    if cross_pcts.is_empty() || cross_pcts.len() != weights.len() {
        return Err(Error::Config(format!(
            "{} cross-dataset values but {} weights",
            cross_pcts.len(),
            weights.len()
        )));
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::Config("weights must have a positive sum".into()));
    }
    let mean = cross_pcts
        .iter()
        .zip(weights)
        .map(|(c, w)| c * w)
        .sum::<f64>()
        / wsum;
    Ok(100.0 * (in_dist_pct - mean) / in_dist_pct)
}

/// Pairwise metric table keyed by model names, for heat-map CSVs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairMatrix {
    pub models: Vec<String>,
    pub cells: BTreeMap<String, BTreeMap<String, Option<f64>>>,
}

impl PairMatrix {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["model".to_owned()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header)?;
        for a in &self.models {
            let mut row = vec![a.clone()];
            for b in &self.models {
                let v = self.cells.get(a).and_then(|r| r.get(b)).copied().flatten();
                row.push(v.map(|v| format!("{v:.6}")).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.into_inner().map_err(|e| Error::malformed("csv", e))
    }
}
