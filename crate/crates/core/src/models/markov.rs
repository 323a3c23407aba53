//! Ordered Markov enumeration.
//!
//! Training turns every empirical probability into an integer level
//! `floor(-ln p / ln base)`, clamped to `0..level_count`. A string's score is
//! the level of its start (its first `order - 1` characters) plus the level of
//! each following transition plus the level of its length. Enumeration walks
//! total scores upward and, within one score, lengths ascending and then
//! strings depth-first in alphabet order, so no string is produced twice.
//!
//! Events never seen in training get no level at all, so strings using them
//! are never produced.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::GuessSource;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Longest supported order; contexts of `order - 1` ASCII bytes pack into a u64.
pub const MAX_ORDER: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkovConfig {
    pub order: usize,
    pub level_count: u8,
    pub level_base: f64,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self {
            order: 4,
            level_count: 11,
            level_base: 2.5,
        }
    }
}

impl MarkovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_ORDER).contains(&self.order) {
            return Err(Error::Config(format!(
                "markov order must be in 2..={MAX_ORDER}, got {}",
                self.order
            )));
        }
        if self.level_count == 0 {
            return Err(Error::Config("level_count must be positive".into()));
        }
        if self.level_base.is_nan() || self.level_base <= 1.0 {
            return Err(Error::Config(format!(
                "level_base must exceed 1, got {}",
                self.level_base
            )));
        }
        Ok(())
    }

    /// Discretizes a probability in (0, 1].
    pub fn level(&self, probability: f64) -> u8 {
        let raw = (-probability.ln() / self.level_base.ln()).floor();
        raw.clamp(0.0, (self.level_count - 1) as f64) as u8
    }

    fn max_level(&self) -> u32 {
        self.level_count as u32 - 1
    }
}

type Transitions = HashMap<u64, Vec<(u8, u8)>>;

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovModel {
    config: MarkovConfig,
    alphabet: Vocabulary,
    /// Start levels grouped by key length; index `k` holds keys of `k` bytes
    /// in ascending byte order.
    starts: Vec<Vec<(Vec<u8>, u8)>>,
    /// Context key to `(next byte, level)`, ascending by byte.
    transitions: Transitions,
    lengths: BTreeMap<usize, u8>,
}

fn context_key(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0u64, |k, &b| (k << 7) | b as u64)
}

fn unpack_context(mut key: u64, width: usize) -> Vec<u8> {
    let mut out = vec![0u8; width];
    for slot in out.iter_mut().rev() {
        *slot = (key & 0x7f) as u8;
        key >>= 7;
    }
    out
}

/// Counts starts, transitions and lengths over `train` and discretizes them.
pub fn train_markov<S: AsRef<str>>(
    train: &[S],
    cfg: &MarkovConfig,
    alphabet: &Vocabulary,
) -> Result<MarkovModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("markov training set"));
    }
    let ctx_len = cfg.order - 1;
    let mut start_counts: BTreeMap<&[u8], u64> = BTreeMap::new();
    let mut length_counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut transition_counts: HashMap<u64, BTreeMap<u8, u64>> = HashMap::new();
    let mut usable = 0u64;

    for p in train {
        let bytes = p.as_ref().as_bytes();
        if bytes.is_empty() {
            continue;
        }
        if let Some(ch) = p.as_ref().chars().find(|c| !alphabet.contains(*c)) {
            return Err(Error::OutOfVocabulary { ch });
        }
        usable += 1;
        let k = ctx_len.min(bytes.len());
        *start_counts.entry(&bytes[..k]).or_default() += 1;
        *length_counts.entry(bytes.len()).or_default() += 1;
        for i in ctx_len..bytes.len() {
            let key = context_key(&bytes[i - ctx_len..i]);
            *transition_counts
                .entry(key)
                .or_default()
                .entry(bytes[i])
                .or_default() += 1;
        }
    }
    if usable == 0 {
        return Err(Error::EmptyInput("markov training set"));
    }

    let total = usable as f64;
    let mut starts = vec![Vec::new(); ctx_len + 1];
    for (key, count) in start_counts {
        starts[key.len()].push((key.to_vec(), cfg.level(count as f64 / total)));
    }
    let lengths = length_counts
        .into_iter()
        .map(|(len, count)| (len, cfg.level(count as f64 / total)))
        .collect();
    let transitions = transition_counts
        .into_iter()
        .map(|(key, nexts)| {
            let out: u64 = nexts.values().sum();
            let levels = nexts
                .into_iter()
                .map(|(b, c)| (b, cfg.level(c as f64 / out as f64)))
                .collect();
            (key, levels)
        })
        .collect();

    Ok(MarkovModel {
        config: cfg.clone(),
        alphabet: alphabet.clone(),
        starts,
        transitions,
        lengths,
    })
}

impl MarkovModel {
    pub fn config(&self) -> &MarkovConfig {
        &self.config
    }

    pub fn alphabet(&self) -> &Vocabulary {
        &self.alphabet
    }

    pub fn start_level(&self, key: &str) -> Option<u8> {
        let bucket = self.starts.get(key.len())?;
        bucket
            .binary_search_by(|(k, _)| k.as_slice().cmp(key.as_bytes()))
            .ok()
            .map(|i| bucket[i].1)
    }

    pub fn transition_level(&self, context: &str, next: char) -> Option<u8> {
        if context.len() != self.config.order - 1 || !next.is_ascii() {
            return None;
        }
        let nexts = self.transitions.get(&context_key(context.as_bytes()))?;
        nexts
            .binary_search_by_key(&(next as u8), |(b, _)| *b)
            .ok()
            .map(|i| nexts[i].1)
    }

    pub fn length_level(&self, len: usize) -> Option<u8> {
        self.lengths.get(&len).copied()
    }

    /// Score of `password`, or `None` if any of its events is unseen.
    pub fn level_sum(&self, password: &str) -> Option<u32> {
        let ctx_len = self.config.order - 1;
        let k = ctx_len.min(password.len());
        let mut sum = self.start_level(password.get(..k)?)? as u32
            + self.length_level(password.len())? as u32;
        for i in ctx_len..password.len() {
            sum += self
                .transition_level(password.get(i - ctx_len..i)?, password[i..].chars().next()?)?
                as u32;
        }
        Some(sum)
    }

    pub(crate) fn to_file(&self) -> MarkovFile {
        let width = self.config.order - 1;
        let as_text = |bytes: &[u8]| bytes.iter().map(|&b| b as char).collect::<String>();
        MarkovFile {
            schema_version: crate::SCHEMA_VERSION,
            kind: "markov".into(),
            order: self.config.order,
            level_count: self.config.level_count,
            level_base: self.config.level_base,
            alphabet: self.alphabet.clone(),
            start_levels: self
                .starts
                .iter()
                .flatten()
                .map(|(k, l)| (as_text(k), *l))
                .collect(),
            transition_levels: self
                .transitions
                .iter()
                .map(|(key, nexts)| {
                    (
                        as_text(&unpack_context(*key, width)),
                        nexts
                            .iter()
                            .map(|(b, l)| ((*b as char).to_string(), *l))
                            .collect(),
                    )
                })
                .collect(),
            length_levels: self.lengths.clone(),
        }
    }

    pub(crate) fn from_file(file: MarkovFile) -> Result<Self> {
        let config = MarkovConfig {
            order: file.order,
            level_count: file.level_count,
            level_base: file.level_base,
        };
        config.validate()?;
        let width = config.order - 1;
        let bad = |detail: String| Error::malformed("markov model", detail);
        let check_level = |l: u8| {
            if l < config.level_count {
                Ok(l)
            } else {
                Err(bad(format!("level {l} out of range")))
            }
        };
        let check_text = |s: &str| {
            if file.alphabet.admits(s) {
                Ok(())
            } else {
                Err(bad(format!("{s:?} is outside the alphabet")))
            }
        };

        let mut starts = vec![Vec::new(); width + 1];
        for (key, level) in &file.start_levels {
            check_text(key)?;
            if key.is_empty() || key.len() > width {
                return Err(bad(format!("start key {key:?} has the wrong width")));
            }
            starts[key.len()].push((key.as_bytes().to_vec(), check_level(*level)?));
        }
        let mut transitions = Transitions::new();
        for (ctx, nexts) in &file.transition_levels {
            check_text(ctx)?;
            if ctx.len() != width {
                return Err(bad(format!("context {ctx:?} has the wrong width")));
            }
            let mut row = Vec::with_capacity(nexts.len());
            for (ch, level) in nexts {
                check_text(ch)?;
                if ch.len() != 1 {
                    return Err(bad(format!(
                        "transition target {ch:?} is not one character"
                    )));
                }
                row.push((ch.as_bytes()[0], check_level(*level)?));
            }
            transitions.insert(context_key(ctx.as_bytes()), row);
        }
        for level in file.length_levels.values() {
            check_level(*level)?;
        }
        Ok(Self {
            config,
            alphabet: file.alphabet,
            starts,
            transitions,
            lengths: file.length_levels,
        })
    }
}

/// On-disk form: levels keyed by literal strings.
#[derive(Serialize, Deserialize)]
pub(crate) struct MarkovFile {
    schema_version: u32,
    kind: String,
    order: usize,
    level_count: u8,
    level_base: f64,
    alphabet: Vocabulary,
    start_levels: BTreeMap<String, u8>,
    transition_levels: BTreeMap<String, BTreeMap<String, u8>>,
    length_levels: BTreeMap<usize, u8>,
}

struct Frame<'m> {
    candidates: &'m [(u8, u8)],
    next: usize,
    remaining: u32,
}

/// Depth-first walk over one (score, length) cell.
struct Cell<'m> {
    length: usize,
    start_width: usize,
    target: u32,
    start_cursor: usize,
    buf: Vec<u8>,
    stack: Vec<Frame<'m>>,
}

/// Streams a Markov model's guesses by ascending level sum.
pub struct MarkovGuesses<'m> {
    model: &'m MarkovModel,
    limit: u64,
    emitted: u64,
    score: u32,
    max_score: u32,
    length_cursor: usize,
    lengths: Vec<(usize, u8)>,
    cell: Option<Cell<'m>>,
    last_score: u32,
}

pub fn enumerate_markov(model: &MarkovModel, limit: u64) -> MarkovGuesses<'_> {
    let ctx_len = model.config.order - 1;
    let lengths: Vec<(usize, u8)> = model.lengths.iter().map(|(l, v)| (*l, *v)).collect();
    let max_start = |k: usize| {
        model.starts[k]
            .iter()
            .map(|(_, l)| *l as u32)
            .max()
            .unwrap_or(0)
    };
    let max_score = lengths
        .iter()
        .map(|&(len, lvl)| {
            let k = ctx_len.min(len);
            lvl as u32 + max_start(k) + (len - k) as u32 * model.config.max_level()
        })
        .max()
        .unwrap_or(0);
    MarkovGuesses {
        model,
        limit,
        emitted: 0,
        score: 0,
        max_score,
        length_cursor: 0,
        lengths,
        cell: None,
        last_score: 0,
    }
}

impl<'m> MarkovGuesses<'m> {
    /// Next guess together with its level sum.
    pub fn next_with_level(&mut self) -> Option<(String, u32)> {
        if self.emitted >= self.limit {
            return None;
        }
        let guess = self.advance()?;
        self.emitted += 1;
        Some((guess, self.last_score))
    }

    fn open_next_cell(&mut self) -> bool {
        while self.score <= self.max_score {
            while self.length_cursor < self.lengths.len() {
                let (length, len_level) = self.lengths[self.length_cursor];
                self.length_cursor += 1;
                if len_level as u32 <= self.score {
                    self.cell = Some(Cell {
                        length,
                        start_width: (self.model.config.order - 1).min(length),
                        target: self.score - len_level as u32,
                        start_cursor: 0,
                        buf: Vec::with_capacity(length),
                        stack: Vec::new(),
                    });
                    return true;
                }
            }
            self.length_cursor = 0;
            self.score += 1;
        }
        false
    }

    fn advance(&mut self) -> Option<String> {
        let model = self.model;
        let max_level = model.config.max_level();
        let ctx_len = model.config.order - 1;
        loop {
            if self.cell.is_none() && !self.open_next_cell() {
                return None;
            }
            let cell = self.cell.as_mut().unwrap();
            let score = self.score;

            // Feasible continuation: descend into the context after `buf`.
            let descend = |buf: &[u8], remaining: u32, length: usize| -> Option<Frame<'m>> {
                let left = (length - buf.len()) as u32;
                if remaining > left * max_level {
                    return None;
                }
                let key = context_key(&buf[buf.len() - ctx_len..]);
                model.transitions.get(&key).map(|candidates| Frame {
                    candidates,
                    next: 0,
                    remaining,
                })
            };

            if !cell.stack.is_empty() {
                let position = cell.start_width + cell.stack.len() - 1;
                let step = {
                    let top = cell.stack.last_mut().unwrap();
                    let found = top.candidates[top.next..]
                        .iter()
                        .position(|&(_, lvl)| lvl as u32 <= top.remaining);
                    found.map(|offset| {
                        let (byte, lvl) = top.candidates[top.next + offset];
                        top.next += offset + 1;
                        (byte, top.remaining - lvl as u32)
                    })
                };
                match step {
                    None => {
                        cell.stack.pop();
                    }
                    Some((byte, remaining)) => {
                        cell.buf.truncate(position);
                        cell.buf.push(byte);
                        if cell.buf.len() == cell.length {
                            if remaining == 0 {
                                self.last_score = score;
                                return Some(cell.buf.iter().map(|&b| b as char).collect());
                            }
                        } else if let Some(frame) = descend(&cell.buf, remaining, cell.length) {
                            cell.stack.push(frame);
                        }
                    }
                }
                continue;
            }

            let starts = &model.starts[cell.start_width];
            let mut emitted = None;
            while cell.start_cursor < starts.len() {
                let (key, lvl) = &starts[cell.start_cursor];
                cell.start_cursor += 1;
                let lvl = *lvl as u32;
                if lvl > cell.target {
                    continue;
                }
                let remaining = cell.target - lvl;
                cell.buf.clear();
                cell.buf.extend_from_slice(key);
                if cell.length == cell.start_width {
                    if remaining == 0 {
                        emitted = Some(cell.buf.iter().map(|&b| b as char).collect());
                        break;
                    }
                } else if let Some(frame) = descend(&cell.buf, remaining, cell.length) {
                    cell.stack.push(frame);
                    break;
                }
            }
            if let Some(guess) = emitted {
                self.last_score = score;
                return Some(guess);
            }
            if cell.stack.is_empty() && cell.start_cursor >= starts.len() {
                self.cell = None;
            }
        }
    }
}

impl GuessSource for MarkovGuesses<'_> {
    fn name(&self) -> &str {
        "markov"
    }

    fn next_guess(&mut self) -> Result<Option<String>> {
        Ok(self.next_with_level().map(|(g, _)| g))
    }
}
