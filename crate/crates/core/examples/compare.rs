//! Overlap between Markov and PCFG guesses and the greedy multi-model
//! attack built from them.
//!
//! cargo run --release --example compare

use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, Vocabulary};
use passbench::eval::{run_match, Checkpoints};
use passbench::metrics::{jaccard_index, mergeability_index, multi_model_select};
use passbench::models::{MarkovConfig, NativeSpec};
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> passbench::Result<()> {
    let raw = RawCorpus {
        lines: zipf_corpus(&SyntheticConfig::default())?,
        source_name: "synthetic".into(),
        invalid_lines: 0,
    };
    let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default())?;
    let checkpoints = Checkpoints::new(vec![100_000])?;

    let mut summaries = Vec::new();
    for spec in [
        NativeSpec::Markov(MarkovConfig::default()),
        NativeSpec::Pcfg,
    ] {
        let model = spec.train(split.train(), split.vocab())?;
        let outcome = run_match(&mut model.guesses(checkpoints.last()), &split, &checkpoints)?;
        println!(
            "{:<7} matched {}",
            spec.label(),
            outcome.summary.matched.len()
        );
        summaries.push((spec.label().to_string(), outcome.summary));
    }
    let (a, b) = (&summaries[0].1, &summaries[1].1);
    println!("jaccard       {:.4}", jaccard_index(&[a], &[b])?);
    if let Some(m) = mergeability_index(&[a], &[b])?.mean {
        println!("mergeability  {m:.4}");
    }

    let sets: Vec<_> = summaries
        .iter()
        .map(|(n, s)| (n.clone(), &s.matched))
        .collect();
    for step in multi_model_select(&sets, split.test_len())? {
        println!(
            "{:<16} {:6.2}% (+{:.2})",
            step.models.join("+"),
            step.cumulative_pct,
            step.gain_pct
        );
    }
    Ok(())
}
