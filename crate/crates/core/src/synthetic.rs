//! Synthetic password corpora for fixtures, examples and the desk benchmark.
//!
//! A population of distinct, human-looking passwords (syllable words with
//! digit and symbol decorations, digit runs, keyboard-ish fragments) is drawn
//! once; a corpus is then sampled from it with Zipf-distributed ranks.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SeededRng};

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "ch",
    "sh", "st", "tr", "br", "l",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "y", "ai", "ee", "oo"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "t", "l", "m", "ck"];
const SYMBOLS: &[&str] = &["!", "@", "#", "$", ".", "_", "*", "!!", "?"];
const YEARS: &[&str] = &[
    "1", "12", "123", "01", "07", "69", "88", "99", "2000", "1990", "1987", "2010", "13", "11",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    /// Distinct passwords in the population.
    pub population: usize,
    /// Draws in the sampled corpus.
    pub samples: usize,
    /// Zipf exponent over population ranks.
    pub exponent: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            population: 50_000,
            samples: 100_000,
            exponent: 1.0,
            seed: 7,
        }
    }
}

fn word(rng: &mut SeededRng) -> String {
    let syllables = rng.between(1, 3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[rng.below(ONSETS.len() as u64) as usize]);
        w.push_str(VOWELS[rng.below(VOWELS.len() as u64) as usize]);
        w.push_str(CODAS[rng.below(CODAS.len() as u64) as usize]);
    }
    w
}

fn digits(rng: &mut SeededRng, min: u64, max: u64) -> String {
    let n = rng.between(min, max);
    (0..n)
        .map(|_| (b'0' + rng.below(10) as u8) as char)
        .collect()
}

fn pick<'a>(rng: &mut SeededRng, list: &[&'a str]) -> &'a str {
    list[rng.below(list.len() as u64) as usize]
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

/// One candidate password drawn from a fixed mixture of templates.
fn candidate(rng: &mut SeededRng) -> String {
    match rng.below(100) {
        0..=29 => word(rng),
        30..=49 => word(rng) + pick(rng, YEARS),
        50..=59 => word(rng) + &digits(rng, 1, 4),
        60..=67 => digits(rng, 6, 9),
        68..=73 => capitalize(&word(rng)) + pick(rng, YEARS),
        74..=79 => word(rng) + pick(rng, SYMBOLS),
        80..=85 => word(rng) + pick(rng, YEARS) + pick(rng, SYMBOLS),
        86..=89 => word(rng) + &word(rng),
        90..=93 => word(rng).to_ascii_uppercase(),
        94..=96 => pick(rng, SYMBOLS).to_string() + &word(rng),
        _ => digits(rng, 1, 3) + &word(rng),
    }
}

/// `size` distinct passwords of at most `max_len` characters, in random order.
pub fn password_population(size: usize, max_len: usize, seed: u64) -> Vec<String> {
    let mut rng = SeededRng::new(derive_seed(seed, "population"));
    let mut seen = HashSet::with_capacity(size);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let p = candidate(&mut rng);
        if !p.is_empty() && p.len() <= max_len && seen.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

/// Samples `cfg.samples` passwords, rank `r` drawn with weight `r^-exponent`.
pub fn zipf_corpus(cfg: &SyntheticConfig) -> Result<Vec<String>> {
    if cfg.population == 0 {
        return Err(Error::Config("population must be positive".into()));
    }
    let population = password_population(cfg.population, 12, cfg.seed);
    let zipf = Zipf::new(cfg.population as f64, cfg.exponent)
        .map_err(|e| Error::Config(format!("zipf distribution: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, "zipf-draws"));
    Ok((0..cfg.samples)
        .map(|_| {
            let rank = zipf.sample(&mut rng) as usize;
            population[rank.clamp(1, cfg.population) - 1].clone()
        })
        .collect())
}

/// Uniform draws from a population (a corpus with no popularity skew).
pub fn uniform_corpus(population: &[String], samples: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| population[rng.random_range(0..population.len())].clone())
        .collect()
}
