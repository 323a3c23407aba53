//! Filters, shuffles, splits and deduplicates a synthetic leak.
//!
//! cargo run --example preprocess

use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, Vocabulary};
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> passbench::Result<()> {
    let mut lines = zipf_corpus(&SyntheticConfig::default())?;
    lines.extend([
        "tab\there".into(),
        "ürgen".into(),
        "waytoolongpassword".into(),
    ]);
    let raw = RawCorpus {
        lines,
        source_name: "synthetic".into(),
        invalid_lines: 0,
    };
    let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default())?;
    let c = split.counts();
    println!("filtered        {}", c.filtered);
    println!("raw train/test  {} / {}", c.raw_train, c.raw_test);
    println!("overlap removed {}", c.overlap_removed);
    println!("train           {}", c.train);
    println!("test (unique)   {}", c.test_unique);

    let dir = std::env::temp_dir().join("passbench-example-preprocess");
    for path in split.save(&dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
