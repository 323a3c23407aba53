//! Corpus statistics: length distribution and CDF, the r1-r19 pattern
//! catalog, top-k extraction, the rank/frequency spectrum with its log-log
//! fit, and frequency buckets over a test set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CharClass, SplitCorpus, Vocabulary};
use crate::error::{Error, Result};

/// Percentage of passwords per length and its running sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthDistribution {
    pub pct_by_length: BTreeMap<usize, f64>,
    pub cdf: BTreeMap<usize, f64>,
}

impl LengthDistribution {
    /// Normalizes per-length masses (counts or percentages) to percentages.
    pub fn from_masses(masses: &BTreeMap<usize, f64>) -> Result<Self> {
        let total: f64 = masses.values().sum();
        if masses.is_empty() || total <= 0.0 {
            return Err(Error::EmptyInput("length distribution"));
        }
        let mut pct_by_length = BTreeMap::new();
        let mut cdf = BTreeMap::new();
        let mut running = 0.0;
        for (&len, &mass) in masses {
            let pct = 100.0 * mass / total;
            running += pct;
            pct_by_length.insert(len, pct);
            cdf.insert(len, running);
        }
        Ok(Self { pct_by_length, cdf })
    }
}

/// Occurrence-weighted length distribution of a password multiset.
pub fn length_distribution<S: AsRef<str>>(passwords: &[S]) -> Result<LengthDistribution> {
    let mut masses: BTreeMap<usize, f64> = BTreeMap::new();
    for p in passwords {
        *masses.entry(p.as_ref().chars().count()).or_default() += 1.0;
    }
    LengthDistribution::from_masses(&masses)
}

/// One of the nineteen structural password patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternId(u8);

impl PatternId {
    pub const COUNT: usize = 19;

    /// `index` is 1-based, matching the r1..r19 labels.
    pub fn new(index: u8) -> Option<Self> {
        (1..=Self::COUNT as u8)
            .contains(&index)
            .then_some(Self(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = PatternId> {
        (1..=Self::COUNT as u8).map(PatternId)
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "letters only",
            2 => "lowercase letters only",
            3 => "uppercase letters only",
            4 => "digits only",
            5 => "special only",
            6 => "letters and digits",
            7 => "letters and special",
            8 => "digits and special",
            9 => "letters, digits and special",
            10 => "starts letter, ends digit",
            11 => "starts letter, ends special",
            12 => "starts digit, then only letters",
            13 => "starts digit, ends special",
            14 => "starts and ends with digit",
            15 => "starts special, then only letters",
            16 => "starts and ends with special",
            17 => "starts special, ends digit",
            18 => "ends with '!'",
            19 => "ends with '1'",
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix('r')
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(PatternId::new)
            .ok_or_else(|| Error::malformed("pattern id", s))
    }
}

impl Serialize for PatternId {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PatternId {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Set of matched patterns, one bit per id.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PatternSet(u32);

impl PatternSet {
    pub fn contains(self, id: PatternId) -> bool {
        self.0 & (1 << id.0) != 0
    }

    fn insert(&mut self, index: u8) {
        self.0 |= 1 << index;
    }

    pub fn iter(self) -> impl Iterator<Item = PatternId> {
        PatternId::all().filter(move |id| self.contains(*id))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|id| id.to_string()))
            .finish()
    }
}

/// Classifies a password against r1-r19.
///
/// Whole-string rules (r1-r9) require the named classes and no other;
/// r10-r17 look only at the first and last character, except r12 and r15
/// which also require at least one following character, all letters.
pub fn classify_patterns(password: &str, vocab: &Vocabulary) -> Result<PatternSet> {
    if password.is_empty() {
        return Err(Error::EmptyInput("password"));
    }
    let mut classes = Vec::with_capacity(password.len());
    for ch in password.chars() {
        classes.push(vocab.class(ch).ok_or(Error::OutOfVocabulary { ch })?);
    }
    let has = |c: CharClass| classes.contains(&c);
    let lower = has(CharClass::Lower);
    let upper = has(CharClass::Upper);
    let letter = lower || upper;
    let digit = has(CharClass::Digit);
    let special = has(CharClass::Special);

    let first = classes[0];
    let last = *classes.last().unwrap();
    let rest_letters = classes.len() >= 2 && classes[1..].iter().all(|c| c.is_letter());
    let last_char = password.as_bytes()[password.len() - 1];

    let mut set = PatternSet::default();
    let rules = [
        letter && !digit && !special,
        lower && !upper && !digit && !special,
        upper && !lower && !digit && !special,
        digit && !letter && !special,
        special && !letter && !digit,
        letter && digit && !special,
        letter && special && !digit,
        digit && special && !letter,
        letter && digit && special,
        first.is_letter() && last == CharClass::Digit,
        first.is_letter() && last == CharClass::Special,
        first == CharClass::Digit && rest_letters,
        first == CharClass::Digit && last == CharClass::Special,
        first == CharClass::Digit && last == CharClass::Digit,
        first == CharClass::Special && rest_letters,
        first == CharClass::Special && last == CharClass::Special,
        first == CharClass::Special && last == CharClass::Digit,
        last_char == b'!',
        last_char == b'1',
    ];
    for (i, hit) in rules.into_iter().enumerate() {
        if hit {
            set.insert(i as u8 + 1);
        }
    }
    Ok(set)
}

/// Number of distinct character classes (letters counted once) in a password.
pub fn class_count(password: &str) -> usize {
    let mut seen = [false; 3];
    for b in password.bytes() {
        let slot = match CharClass::of(b) {
            CharClass::Lower | CharClass::Upper => 0,
            CharClass::Digit => 1,
            CharClass::Special => 2,
        };
        seen[slot] = true;
    }
    seen.iter().filter(|s| **s).count()
}

/// Occurrence-weighted share of passwords matching each pattern. Every
/// pattern id is present in the result; rows overlap so they need not sum
/// to 100.
pub fn pattern_distribution<S: AsRef<str>>(
    passwords: &[S],
    vocab: &Vocabulary,
) -> Result<BTreeMap<PatternId, f64>> {
    if passwords.is_empty() {
        return Err(Error::EmptyInput("pattern distribution"));
    }
    let mut hits = [0u64; PatternId::COUNT + 1];
    for p in passwords {
        for id in classify_patterns(p.as_ref(), vocab)?.iter() {
            hits[id.index() as usize] += 1;
        }
    }
    let total = passwords.len() as f64;
    Ok(PatternId::all()
        .map(|id| (id, 100.0 * hits[id.index() as usize] as f64 / total))
        .collect())
}

fn ranked_counts<S: AsRef<str>>(passwords: &[S]) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for p in passwords {
        *counts.entry(p.as_ref()).or_default() += 1;
    }
    let mut ranked: Vec<(String, u64)> =
        counts.into_iter().map(|(p, c)| (p.to_owned(), c)).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// The `k` most frequent passwords, count descending then lexicographic.
pub fn top_k<S: AsRef<str>>(passwords: &[S], k: usize) -> Vec<(String, u64)> {
    let mut ranked = ranked_counts(passwords);
    ranked.truncate(k);
    ranked
}

/// Distinct passwords occurring at least `min_count` times, ranked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    pub ranked: Vec<(String, u64)>,
    pub min_count: u64,
}

pub const DEFAULT_SPECTRUM_MIN_COUNT: u64 = 3;

pub fn frequency_spectrum<S: AsRef<str>>(passwords: &[S], min_count: u64) -> FrequencySpectrum {
    let mut ranked = ranked_counts(passwords);
    ranked.retain(|(_, c)| *c >= min_count);
    FrequencySpectrum { ranked, min_count }
}

/// Least-squares line through (ln rank, ln count).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn zipf_fit(spectrum: &FrequencySpectrum) -> Result<ZipfFit> {
    let n = spectrum.ranked.len();
    if n < 2 {
        return Err(Error::InsufficientSpectrum(n));
    }
    let points: Vec<(f64, f64)> = spectrum
        .ranked
        .iter()
        .enumerate()
        .map(|(i, (_, c))| (((i + 1) as f64).ln(), (*c as f64).ln()))
        .collect();
    if points.iter().all(|p| p.1 == points[0].1) {
        // A flat spectrum is fitted exactly by a zero slope.
        return Ok(ZipfFit {
            slope: 0.0,
            intercept: points[0].1,
            r_squared: 1.0,
        });
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0);
    Ok(ZipfFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Frequency classes over the unique test passwords.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Top5,
    Top10,
    Bottom90,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::Top5, Bucket::Top10, Bucket::Bottom90];
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::Top5 => "top5",
            Bucket::Top10 => "top10",
            Bucket::Bottom90 => "bottom90",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyBuckets {
    pub top5: Vec<String>,
    pub top10: Vec<String>,
    pub bottom90: Vec<String>,
}

impl FrequencyBuckets {
    pub fn get(&self, bucket: Bucket) -> &[String] {
        match bucket {
            Bucket::Top5 => &self.top5,
            Bucket::Top10 => &self.top10,
            Bucket::Bottom90 => &self.bottom90,
        }
    }
}

/// Ranks test passwords by raw frequency (ties lexicographic) and slices
/// the first ceil(5%) and ceil(10%) as the common buckets.
pub fn frequency_buckets(split: &SplitCorpus) -> Result<FrequencyBuckets> {
    let unique = split.test_len();
    if unique == 0 {
        return Err(Error::EmptyInput("test set"));
    }
    let mut ranked: Vec<(&str, u64)> = split
        .test_freq()
        .iter()
        .map(|(p, c)| (p.as_str(), *c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let ceil_share = |pct: usize| (unique * pct).div_ceil(100);
    let n5 = ceil_share(5);
    let n10 = ceil_share(10);
    let take = |r: &[(&str, u64)]| r.iter().map(|(p, _)| p.to_string()).collect::<Vec<_>>();
    Ok(FrequencyBuckets {
        top5: take(&ranked[..n5]),
        top10: take(&ranked[..n10]),
        bottom90: take(&ranked[n10..]),
    })
}

/// Everything `analyze` reports about one password multiset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub source: String,
    pub total: usize,
    pub distinct: usize,
    pub lengths: LengthDistribution,
    pub patterns: BTreeMap<PatternId, f64>,
    pub top_k: Vec<(String, u64)>,
    pub spectrum: FrequencySpectrum,
    pub zipf: Option<ZipfFit>,
}

impl AnalysisReport {
    pub fn build<S: AsRef<str>>(
        source: &str,
        passwords: &[S],
        vocab: &Vocabulary,
        k: usize,
        min_count: u64,
    ) -> Result<Self> {
        let lengths = length_distribution(passwords)?;
        let patterns = pattern_distribution(passwords, vocab)?;
        let spectrum = frequency_spectrum(passwords, min_count);
        let zipf = zipf_fit(&spectrum).ok();
        let distinct = ranked_counts(passwords).len();
        Ok(Self {
            schema_version: crate::SCHEMA_VERSION,
            source: source.to_owned(),
            total: passwords.len(),
            distinct,
            lengths,
            patterns,
            top_k: top_k(passwords, k),
            spectrum,
            zipf,
        })
    }
}
