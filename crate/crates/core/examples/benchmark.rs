//! A complete two-dataset, three-model experiment driven by a `RunConfig`,
//! the same path the `benchmark` subcommand takes.
//!
//! cargo run --release --example benchmark

use passbench::cli::{run_benchmark, DatasetEntry, ModelEntry, ModelKind, RunConfig};
use passbench::eval::Checkpoints;
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("passbench-example-benchmark");
    std::fs::create_dir_all(&dir)?;
    let mut datasets = Vec::new();
    for (name, seed) in [("forum", 1), ("shop", 2)] {
        let corpus = zipf_corpus(&SyntheticConfig {
            population: 20_000,
            samples: 40_000,
            seed,
            ..Default::default()
        })?;
        let path = dir.join(format!("{name}.txt"));
        std::fs::write(&path, corpus.join("\n") + "\n")?;
        datasets.push(DatasetEntry {
            name: name.into(),
            path,
        });
    }

    let cfg = RunConfig {
        output_dir: Some(dir.join("results")),
        checkpoints: Checkpoints::new(vec![1_000, 10_000, 100_000])?,
        humanness_sample: 2_000,
        datasets,
        models: vec![
            ModelEntry::new("markov", ModelKind::Markov),
            ModelEntry::new("pcfg", ModelKind::Pcfg),
            ModelEntry::new("random", ModelKind::Random),
        ],
        ..Default::default()
    };
    let summary = run_benchmark(&cfg, None)?;
    println!(
        "\n{} rows written under {}",
        summary.rows.len(),
        dir.join("results").display()
    );
    Ok(())
}
