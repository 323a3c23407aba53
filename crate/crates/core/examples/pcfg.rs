//! Trains a PCFG and prints its most probable structures and guesses.
//!
//! cargo run --example pcfg

use passbench::models::{enumerate_pcfg, train_pcfg};
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> passbench::Result<()> {
    let corpus = zipf_corpus(&SyntheticConfig::default())?;
    let model = train_pcfg(&corpus)?;

    println!("top structures");
    for entry in model.structures().iter().take(8) {
        println!(
            "  {:<10} {:.4}",
            entry.structure.to_string(),
            entry.probability
        );
    }
    println!("\nfirst guesses");
    let mut guesses = enumerate_pcfg(&model, 20);
    while let Some((guess, p)) = guesses.next_with_probability() {
        println!("  {p:.6}  {guess}");
    }
    Ok(())
}
