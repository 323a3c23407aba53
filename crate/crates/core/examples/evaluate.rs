//! Matches a PCFG guess stream against a test set and prints the guessing
//! curve, marginal gains and per-length breakdown.
//!
//! cargo run --release --example evaluate

use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, Vocabulary};
use passbench::eval::{run_match, Checkpoints, EvaluationReport};
use passbench::models::NativeSpec;
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> passbench::Result<()> {
    let raw = RawCorpus {
        lines: zipf_corpus(&SyntheticConfig::default())?,
        source_name: "synthetic".into(),
        invalid_lines: 0,
    };
    let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default())?;
    let checkpoints = Checkpoints::new(vec![1_000, 10_000, 100_000])?;

    let model = NativeSpec::Pcfg.train(split.train(), split.vocab())?;
    let outcome = run_match(&mut model.guesses(checkpoints.last()), &split, &checkpoints)?;
    let report = EvaluationReport::build("pcfg", &split, &checkpoints, &outcome)?;

    println!("guesses  matched  unique%  weighted%");
    for p in &outcome.curve {
        println!(
            "{:>7}  {:>7}  {:>7.2}  {:>9.2}",
            p.guess_count, p.matched_unique, p.pct_unique, p.pct_weighted
        );
    }
    for g in &report.marginal {
        println!("{} -> {}: +{:.2} points", g.from, g.to, g.total);
    }
    for (len, pct) in &report.lengths {
        println!("length {len:>2}: {pct:6.2}% guessed");
    }
    Ok(())
}
