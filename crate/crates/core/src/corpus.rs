//! Dataset ingestion, filtering, the seeded 80/20 split and test-set
//! deduplication.
//!
//! The pipeline is: read lines as UTF-8 dropping undecodable ones, keep
//! ASCII passwords inside the length window whose characters all belong to
//! the [`Vocabulary`], shuffle under the configured seed, cut at
//! `floor(split_ratio * N)`, deduplicate the test side (keeping raw counts)
//! and finally delete every train occurrence of a test password.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, Line};
use crate::rng::SeededRng;
use crate::SCHEMA_VERSION;

/// Symbols admitted by the default vocabulary: printable ASCII punctuation.
pub const DEFAULT_SYMBOLS: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// Character classes a vocabulary partitions into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharClass {
    Lower,
    Upper,
    Digit,
    Special,
}

impl CharClass {
    pub fn of(byte: u8) -> CharClass {
        match byte {
            b'a'..=b'z' => CharClass::Lower,
            b'A'..=b'Z' => CharClass::Upper,
            b'0'..=b'9' => CharClass::Digit,
            _ => CharClass::Special,
        }
    }

    pub fn is_letter(self) -> bool {
        matches!(self, CharClass::Lower | CharClass::Upper)
    }
}

/// The permitted character set. Characters are kept in ASCII order, which is
/// also the order model enumerators walk the alphabet in.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Vocabulary {
    allowed: Vec<u8>,
    member: [bool; 128],
}

impl Vocabulary {
    /// Builds a vocabulary from printable ASCII characters without repeats.
    pub fn new(chars: &str) -> Result<Self> {
        let mut member = [false; 128];
        let mut allowed = Vec::with_capacity(chars.len());
        for ch in chars.chars() {
            if !ch.is_ascii() || ch.is_ascii_control() || ch == ' ' {
                return Err(Error::Config(format!(
                    "vocabulary character {ch:?} is not printable ASCII"
                )));
            }
            let b = ch as u8;
            if member[b as usize] {
                return Err(Error::Config(format!("vocabulary repeats {ch:?}")));
            }
            member[b as usize] = true;
            allowed.push(b);
        }
        if allowed.is_empty() {
            return Err(Error::Config("vocabulary is empty".into()));
        }
        allowed.sort_unstable();
        Ok(Self { allowed, member })
    }

    #[inline]
    pub fn contains(&self, ch: char) -> bool {
        (ch as u32) < 128 && self.member[ch as usize]
    }

    #[inline]
    pub fn contains_byte(&self, b: u8) -> bool {
        b < 128 && self.member[b as usize]
    }

    /// Class of `ch`, or `None` when it is outside the vocabulary.
    pub fn class(&self, ch: char) -> Option<CharClass> {
        self.contains(ch).then(|| CharClass::of(ch as u8))
    }

    /// Allowed characters in ASCII order.
    pub fn bytes(&self) -> &[u8] {
        &self.allowed
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.allowed.iter().map(|&b| b as char)
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    /// True when every character of `password` is ASCII and allowed.
    pub fn admits(&self, password: &str) -> bool {
        password.bytes().all(|b| self.contains_byte(b))
    }

    pub fn as_string(&self) -> String {
        self.chars().collect()
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        let mut chars = String::new();
        chars.extend('a'..='z');
        chars.extend('A'..='Z');
        chars.extend('0'..='9');
        chars.push_str(DEFAULT_SYMBOLS);
        Vocabulary::new(&chars).expect("default vocabulary is well formed")
    }
}

impl fmt::Debug for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Vocabulary")
            .field(&self.as_string())
            .finish()
    }
}

impl TryFrom<String> for Vocabulary {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Vocabulary::new(&value)
    }
}

impl From<Vocabulary> for String {
    fn from(v: Vocabulary) -> String {
        v.as_string()
    }
}

/// Preprocessing knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub max_length: usize,
    pub min_length: usize,
    pub split_ratio: f64,
    pub seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            max_length: 12,
            min_length: 0,
            split_ratio: 0.8,
            seed: 42,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_length == 0 {
            return Err(Error::Config("max_length must be positive".into()));
        }
        if self.min_length > self.max_length {
            return Err(Error::Config(format!(
                "min_length {} exceeds max_length {}",
                self.min_length, self.max_length
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "split_ratio {} must lie strictly between 0 and 1",
                self.split_ratio
            )));
        }
        Ok(())
    }

    /// Whether `password` survives the length window and charset filter.
    pub fn admits(&self, password: &str, vocab: &Vocabulary) -> bool {
        let len = password.len();
        password.is_ascii()
            && len >= self.min_length
            && len <= self.max_length
            && vocab.admits(password)
    }
}

/// Lines read from one source file, undecodable lines already discarded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCorpus {
    pub lines: Vec<String>,
    pub source_name: String,
    /// Lines dropped because they were not valid UTF-8.
    pub invalid_lines: usize,
}

/// Reads a password file: one entry per line, LF or CRLF, empty lines and
/// lines that fail UTF-8 decoding dropped.
pub fn load_corpus(path: &Path) -> Result<RawCorpus> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus(std::io::BufReader::new(file), &name).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// [`load_corpus`] over any buffered reader.
pub fn read_corpus<R: BufRead>(mut reader: R, source_name: &str) -> Result<RawCorpus> {
    let mut corpus = RawCorpus {
        source_name: source_name.to_owned(),
        ..RawCorpus::default()
    };
    let mut buf = Vec::new();
    while let Some(line) =
        io::read_line(&mut reader, &mut buf).map_err(|e| Error::io(source_name, e))?
    {
        match line {
            Line::Text(s) if s.is_empty() => {}
            Line::Text(s) => corpus.lines.push(s),
            Line::Invalid => corpus.invalid_lines += 1,
        }
    }
    Ok(corpus)
}

/// Keeps entries within the length window whose characters are ASCII and in
/// `vocab`. Order and duplicates are preserved.
pub fn filter_passwords(
    raw: &RawCorpus,
    cfg: &PreprocessConfig,
    vocab: &Vocabulary,
) -> Vec<String> {
    raw.lines
        .iter()
        .filter(|p| cfg.admits(p, vocab))
        .cloned()
        .collect()
}

/// Bookkeeping counts from one split, mirrored into the metadata sidecar.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub filtered: usize,
    pub raw_train: usize,
    pub raw_test: usize,
    pub overlap_removed: usize,
    pub train: usize,
    pub test_unique: usize,
}

/// A preprocessed dataset: train multiset plus deduplicated test set with
/// its raw-frequency sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCorpus {
    name: String,
    train: Vec<String>,
    test_freq: BTreeMap<String, u64>,
    config: PreprocessConfig,
    vocab: Vocabulary,
    counts: SplitCounts,
}

/// Shuffles, cuts and deduplicates a filtered password sequence.
pub fn split_corpus(
    filtered: &[String],
    cfg: &PreprocessConfig,
    vocab: &Vocabulary,
) -> Result<SplitCorpus> {
    cfg.validate()?;
    if filtered.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut order: Vec<&str> = filtered.iter().map(String::as_str).collect();
    SeededRng::new(cfg.seed).shuffle(&mut order);

    let cut = (cfg.split_ratio * order.len() as f64).floor() as usize;
    let (raw_train, raw_test) = order.split_at(cut);

    let mut test_freq: BTreeMap<String, u64> = BTreeMap::new();
    for p in raw_test {
        *test_freq.entry((*p).to_owned()).or_default() += 1;
    }
    let train: Vec<String> = raw_train
        .iter()
        .filter(|p| !test_freq.contains_key(**p))
        .map(|p| (*p).to_owned())
        .collect();

    let counts = SplitCounts {
        filtered: filtered.len(),
        raw_train: raw_train.len(),
        raw_test: raw_test.len(),
        overlap_removed: raw_train.len() - train.len(),
        train: train.len(),
        test_unique: test_freq.len(),
    };
    Ok(SplitCorpus {
        name: String::new(),
        train,
        test_freq,
        config: cfg.clone(),
        vocab: vocab.clone(),
        counts,
    })
}

/// Filter then split in one call; the split is named after the source.
pub fn preprocess(
    raw: &RawCorpus,
    cfg: &PreprocessConfig,
    vocab: &Vocabulary,
) -> Result<SplitCorpus> {
    cfg.validate()?;
    let filtered = filter_passwords(raw, cfg, vocab);
    Ok(split_corpus(&filtered, cfg, vocab)?.with_name(&raw.source_name))
}

#[derive(Serialize, Deserialize)]
struct SplitMeta {
    schema_version: u32,
    name: String,
    config: PreprocessConfig,
    vocabulary: Vocabulary,
    counts: SplitCounts,
    test_freq: BTreeMap<String, u64>,
}

impl SplitCorpus {
    /// Assembles a split from explicit parts, checking the split invariants.
    pub fn from_parts(
        name: &str,
        train: Vec<String>,
        test_freq: BTreeMap<String, u64>,
        config: PreprocessConfig,
        vocab: Vocabulary,
    ) -> Result<Self> {
        config.validate()?;
        for p in train.iter().chain(test_freq.keys()) {
            if !config.admits(p, &vocab) {
                return Err(Error::malformed(
                    "split",
                    format!("password {p:?} violates the preprocessing filter"),
                ));
            }
        }
        if let Some(p) = train.iter().find(|p| test_freq.contains_key(*p)) {
            return Err(Error::malformed(
                "split",
                format!("password {p:?} is in both train and test"),
            ));
        }
        if test_freq.values().any(|&c| c == 0) {
            return Err(Error::malformed("split", "zero test frequency"));
        }
        let raw_test = test_freq.values().sum::<u64>() as usize;
        let counts = SplitCounts {
            filtered: train.len() + raw_test,
            raw_train: train.len(),
            raw_test,
            overlap_removed: 0,
            train: train.len(),
            test_unique: test_freq.len(),
        };
        Ok(Self {
            name: name.to_owned(),
            train,
            test_freq,
            config,
            vocab,
            counts,
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_owned();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Training multiset in shuffled order.
    pub fn train(&self) -> &[String] {
        &self.train
    }

    /// Raw test occurrences per unique test password.
    pub fn test_freq(&self) -> &BTreeMap<String, u64> {
        &self.test_freq
    }

    /// Unique test passwords in lexicographic order.
    pub fn test_unique(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.test_freq.keys().map(String::as_str)
    }

    pub fn test_len(&self) -> usize {
        self.test_freq.len()
    }

    pub fn freq(&self, password: &str) -> u64 {
        self.test_freq.get(password).copied().unwrap_or(0)
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn counts(&self) -> &SplitCounts {
        &self.counts
    }

    /// Errors unless both splits were produced by the same filter settings.
    pub fn check_compatible(
        &self,
        other_config: &PreprocessConfig,
        other_vocab: &Vocabulary,
    ) -> Result<()> {
        if self.config.max_length != other_config.max_length
            || self.config.min_length != other_config.min_length
        {
            return Err(Error::IncompatiblePreprocessing(format!(
                "length window {}..={} vs {}..={}",
                self.config.min_length,
                self.config.max_length,
                other_config.min_length,
                other_config.max_length
            )));
        }
        if &self.vocab != other_vocab {
            return Err(Error::IncompatiblePreprocessing(
                "vocabularies differ".into(),
            ));
        }
        Ok(())
    }

    pub fn train_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.train.txt"))
    }

    pub fn test_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.test.txt"))
    }

    pub fn meta_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.meta.json"))
    }

    /// Writes `<name>.train.txt`, `<name>.test.txt` and `<name>.meta.json`
    /// into `dir` and returns their paths.
    pub fn save(&self, dir: &Path) -> Result<[PathBuf; 3]> {
        let name = if self.name.is_empty() {
            "corpus"
        } else {
            &self.name
        };
        let paths = [
            Self::train_path(dir, name),
            Self::test_path(dir, name),
            Self::meta_path(dir, name),
        ];
        io::write_atomic(&paths[0], &io::join_lines(&self.train))?;
        io::write_atomic(&paths[1], &io::join_lines(self.test_unique()))?;
        let meta = SplitMeta {
            schema_version: SCHEMA_VERSION,
            name: name.to_owned(),
            config: self.config.clone(),
            vocabulary: self.vocab.clone(),
            counts: self.counts,
            test_freq: self.test_freq.clone(),
        };
        let mut json = serde_json::to_vec_pretty(&meta)?;
        json.push(b'\n');
        io::write_atomic(&paths[2], &json)?;
        Ok(paths)
    }

    /// Loads a persisted split by directory and name.
    pub fn load(dir: &Path, name: &str) -> Result<Self> {
        let meta_path = Self::meta_path(dir, name);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: SplitMeta = serde_json::from_str(&text)
            .map_err(|e| Error::malformed(meta_path.display().to_string(), e))?;
        let train = read_password_lines(&Self::train_path(dir, name))?;
        let split = Self::from_parts(name, train, meta.test_freq, meta.config, meta.vocabulary)?;
        Ok(Self {
            counts: meta.counts,
            ..split
        })
    }

    /// Loads the split that owns a `<name>.train.txt`, `<name>.test.txt` or
    /// `<name>.meta.json` file.
    pub fn load_from_member(path: &Path) -> Result<Self> {
        let file_name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let name = [".test.txt", ".train.txt", ".meta.json"]
            .iter()
            .find_map(|suffix| file_name.strip_suffix(suffix))
            .ok_or_else(|| {
                Error::Config(format!(
                    "{} is not a <name>.train.txt / .test.txt / .meta.json file",
                    path.display()
                ))
            })?;
        let dir = path.parent().unwrap_or_else(|| Path::new(""));
        Self::load(dir, name)
    }
}

/// Reads a one-password-per-line file (train files, word lists). Empty and
/// undecodable lines are skipped.
pub fn read_password_lines(path: &Path) -> Result<Vec<String>> {
    Ok(load_corpus(path)?.lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(lines: &[&str]) -> RawCorpus {
        RawCorpus {
            lines: lines.iter().map(|s| s.to_string()).collect(),
            source_name: "t".into(),
            invalid_lines: 0,
        }
    }

    #[test]
    fn default_vocabulary_has_four_classes() {
        let v = Vocabulary::default();
        assert_eq!(v.len(), 26 + 26 + 10 + 32);
        assert_eq!(v.class('a'), Some(CharClass::Lower));
        assert_eq!(v.class('Q'), Some(CharClass::Upper));
        assert_eq!(v.class('7'), Some(CharClass::Digit));
        assert_eq!(v.class('@'), Some(CharClass::Special));
        assert_eq!(v.class('\t'), None);
        assert_eq!(v.class(' '), None);
        assert_eq!(v.class('ü'), None);
        for sym in "~!@#$".chars() {
            assert!(v.contains(sym));
        }
    }

    #[test]
    fn vocabulary_rejects_repeats() {
        assert!(Vocabulary::new("abca").is_err());
        assert!(Vocabulary::new("").is_err());
        assert!(Vocabulary::new("a\tb").is_err());
    }

    #[test]
    fn load_drops_empty_and_invalid_lines() {
        let c = read_corpus(&b"abc\n\np@ss1\n"[..], "x").unwrap();
        assert_eq!(c.lines, vec!["abc", "p@ss1"]);

        let c = read_corpus(&b"one\n\xff\xfetwo\nthree"[..], "x").unwrap();
        assert_eq!(c.lines, vec!["one", "three"]);
        assert_eq!(c.invalid_lines, 1);

        let c = read_corpus(&b""[..], "x").unwrap();
        assert!(c.lines.is_empty());

        let c = read_corpus(&b"crlf\r\nnext\r\n"[..], "x").unwrap();
        assert_eq!(c.lines, vec!["crlf", "next"]);
    }

    #[test]
    fn load_missing_file_names_path() {
        let err = load_corpus(Path::new("/nonexistent/leak.txt")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/leak.txt"));
    }

    #[test]
    fn filter_applies_each_rule() {
        let cfg = PreprocessConfig {
            max_length: 12,
            min_length: 3,
            ..Default::default()
        };
        let v = Vocabulary::default();
        let out = filter_passwords(&raw(&["abc", "ab", "ürgen", "abcdefghijklm"]), &cfg, &v);
        assert_eq!(out, vec!["abc"]);
        let cfg = PreprocessConfig::default();
        assert_eq!(filter_passwords(&raw(&["P@ss1"]), &cfg, &v), vec!["P@ss1"]);
        assert!(filter_passwords(&raw(&["tab\tx"]), &cfg, &v).is_empty());
    }

    #[test]
    fn overlap_removal_deletes_every_train_copy() {
        let filtered = vec!["x".to_string(); 10];
        let s = split_corpus(
            &filtered,
            &PreprocessConfig::default(),
            &Vocabulary::default(),
        )
        .unwrap();
        assert!(s.train().is_empty());
        assert_eq!(s.test_unique().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(s.freq("x"), 2);
        assert_eq!(s.counts().overlap_removed, 8);
    }

    #[test]
    fn split_uses_floor_of_ratio() {
        let filtered: Vec<String> = ["a", "b", "c", "d", "e"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let s = split_corpus(
            &filtered,
            &PreprocessConfig::default(),
            &Vocabulary::default(),
        )
        .unwrap();
        assert_eq!(s.counts().raw_train, 4);
        assert_eq!(s.counts().raw_test, 1);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let err =
            split_corpus(&[], &PreprocessConfig::default(), &Vocabulary::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty corpus after filtering");
    }

    #[test]
    fn config_validation() {
        let bad = PreprocessConfig {
            min_length: 5,
            max_length: 4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PreprocessConfig {
            split_ratio: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn from_parts_rejects_overlap() {
        let mut freq = BTreeMap::new();
        freq.insert("a".to_string(), 1);
        let err = SplitCorpus::from_parts(
            "t",
            vec!["a".into()],
            freq,
            PreprocessConfig::default(),
            Vocabulary::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let filtered: Vec<String> = (0..40).map(|i| format!("pw{}", i % 13)).collect();
        let s = split_corpus(
            &filtered,
            &PreprocessConfig::default(),
            &Vocabulary::default(),
        )
        .unwrap()
        .with_name("demo");
        let paths = s.save(dir.path()).unwrap();
        let back = SplitCorpus::load_from_member(&paths[1]).unwrap();
        assert_eq!(back, s);
    }
}
