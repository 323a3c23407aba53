//! Trains an order-4 Markov model and prints its first guesses with their
//! level sums.
//!
//! cargo run --example markov

use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, Vocabulary};
use passbench::models::{enumerate_markov, train_markov, MarkovConfig};
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> passbench::Result<()> {
    let raw = RawCorpus {
        lines: zipf_corpus(&SyntheticConfig::default())?,
        source_name: "synthetic".into(),
        invalid_lines: 0,
    };
    let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default())?;
    let model = train_markov(split.train(), &MarkovConfig::default(), split.vocab())?;

    let mut guesses = enumerate_markov(&model, 20);
    while let Some((guess, level)) = guesses.next_with_level() {
        println!("{level:>3}  {guess}");
    }
    Ok(())
}
