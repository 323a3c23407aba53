//! Normalized humanness of model output between the train (0) and random
//! (100) baselines.
//!
//! cargo run --release --example humanness

use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, Vocabulary};
use passbench::metrics::{builtin_distances, humanness_normalize};
use passbench::models::{random_baseline, take_guesses, MarkovConfig, NativeSpec};
use passbench::rng::SeededRng;
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

const N: usize = 5_000;

fn sample(items: &[String], seed: u64) -> Vec<String> {
    let mut pool = items.to_vec();
    SeededRng::new(seed).shuffle(&mut pool);
    pool.truncate(N);
    pool
}

fn main() -> passbench::Result<()> {
    let raw = RawCorpus {
        lines: zipf_corpus(&SyntheticConfig::default())?,
        source_name: "synthetic".into(),
        invalid_lines: 0,
    };
    let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default())?;
    let test_unique: Vec<String> = split.test_unique().map(String::from).collect();
    let test = sample(&test_unique, 1);
    let train = sample(split.train(), 2);
    let random: Vec<String> = random_baseline(split.vocab(), 1, 12, 3, N as u64)?.collect();

    for spec in [
        NativeSpec::Markov(MarkovConfig::default()),
        NativeSpec::Pcfg,
    ] {
        let model = spec.train(split.train(), split.vocab())?;
        let generated = sample(&take_guesses(&mut model.guesses(200_000), 200_000)?, 4);
        for f in builtin_distances(split.vocab()) {
            let bounds = f.bounds(&test, &train, &random)?;
            let d = f.dist(&test, &generated)?;
            println!(
                "{:<7} {:<12} raw {d:.4}  normalized {:6.2}",
                spec.label(),
                f.name(),
                humanness_normalize(d, &bounds)?
            );
        }
    }
    Ok(())
}
