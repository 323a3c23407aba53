//! Length distribution, patterns and the Zipf fit of a corpus.
//!
//! cargo run --example analyze

use passbench::analysis::{AnalysisReport, DEFAULT_SPECTRUM_MIN_COUNT};
use passbench::corpus::Vocabulary;
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

fn main() -> passbench::Result<()> {
    let corpus = zipf_corpus(&SyntheticConfig::default())?;
    let report = AnalysisReport::build(
        "synthetic",
        &corpus,
        &Vocabulary::default(),
        5,
        DEFAULT_SPECTRUM_MIN_COUNT,
    )?;

    println!("length  pct     cdf");
    for (len, pct) in &report.lengths.pct_by_length {
        println!("{len:>6}  {pct:6.2}  {:6.2}", report.lengths.cdf[len]);
    }
    println!("\npattern  pct");
    for (id, pct) in &report.patterns {
        println!("{:<7}  {pct:6.2}  {}", id.to_string(), id.description());
    }
    println!("\ntop passwords");
    for (p, count) in &report.top_k {
        println!("  {p:<12} {count}");
    }
    if let Some(fit) = &report.zipf {
        println!("\nzipf slope {:.3} (r^2 {:.3})", fit.slope, fit.r_squared);
    }
    Ok(())
}
