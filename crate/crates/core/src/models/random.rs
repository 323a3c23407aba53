//! Uniform random passwords: the upper baseline for humanness distances.

use super::GuessSource;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub struct RandomGuesses {
    rng: SeededRng,
    alphabet: Vec<u8>,
    min_len: usize,
    max_len: usize,
    remaining: u64,
}

/// Lengths uniform on `min_len..=max_len`, characters i.i.d. uniform over
/// `vocab`.
pub fn random_baseline(
    vocab: &Vocabulary,
    min_len: usize,
    max_len: usize,
    seed: u64,
    limit: u64,
) -> Result<RandomGuesses> {
    if min_len > max_len {
        return Err(Error::Config(format!(
            "random baseline min_len {min_len} exceeds max_len {max_len}"
        )));
    }
    Ok(RandomGuesses {
        rng: SeededRng::new(seed),
        alphabet: vocab.bytes().to_vec(),
        min_len,
        max_len,
        remaining: limit,
    })
}

impl RandomGuesses {
    fn draw(&mut self) -> String {
        let len = self.rng.between(self.min_len as u64, self.max_len as u64) as usize;
        (0..len)
            .map(|_| self.alphabet[self.rng.below(self.alphabet.len() as u64) as usize] as char)
            .collect()
    }
}

impl Iterator for RandomGuesses {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.draw())
    }
}

impl GuessSource for RandomGuesses {
    fn name(&self) -> &str {
        "random"
    }

    fn next_guess(&mut self) -> Result<Option<String>> {
        Ok(self.next())
    }
}
