//! `benchmark`: preprocess every dataset, materialize each model's guess
//! stream once per training dataset, run the selected scenarios and write a
//! three-section summary (performance, generalizability, quality).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::commands::{
    checkpoints_arg, compare_runs, parse_named_path, write_evaluation, CompareReport,
};
use super::config::{DatasetEntry, ModelEntry, ModelKind, RunConfig, Scenario};
use super::{csv_bytes, resolve_output_dir, Format, Output};
use crate::analysis::class_count;
use crate::corpus::{load_corpus, preprocess, SplitCorpus};
use crate::error::{Error, Result};
use crate::eval::{
    cross_dataset_run, run_match, size_sensitivity_run, CrossMatrix, EvaluationReport, MatchLedger,
    MatchOutcome,
};
use crate::metrics::{
    builtin_distances, coefficient_of_variation, generalization_loss, humanness_normalize,
    jaccard_index, mergeability_index, uniqueness, GuessSetSummary, PairMatrix,
};
use crate::models::{open_external_stream, random_baseline, take_guesses, SliceGuesses};
use crate::rng::{derive_seed, SeededRng};

#[derive(Args, Debug, Default)]
pub struct BenchmarkArgs {
    /// Run config (TOML); flags below override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// NAME=PATH raw dataset; repeatable, replaces the config's datasets
    #[arg(long = "dataset", value_parser = parse_named_path)]
    pub datasets: Vec<(String, PathBuf)>,
    /// NAME=KIND model with default parameters (markov, pcfg, random);
    /// repeatable, replaces the config's models
    #[arg(long = "model", value_parser = parse_named_kind)]
    pub models: Vec<(String, ModelKind)>,
    /// Root seed for splits, sampling and random baselines
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub scenarios: Vec<Scenario>,
    /// Training-subset sizes for sizesweep
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub humanness_sample: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub min_len: Option<usize>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
    #[arg(long)]
    pub vocab: Option<String>,
    /// Parallel (model, dataset) runs [default: available cores]
    #[arg(long)]
    pub jobs: Option<usize>,
}

fn parse_named_kind(s: &str) -> std::result::Result<(String, ModelKind), String> {
    let (name, kind) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=KIND, got {s:?}"))?;
    let kind = <ModelKind as clap::ValueEnum>::from_str(kind, true)?;
    if name.is_empty() {
        return Err(format!("empty model name in {s:?}"));
    }
    Ok((name.to_owned(), kind))
}

impl BenchmarkArgs {
    /// Loads the config file (if any), applies flag overrides, resolves the
    /// output directory and validates.
    pub fn resolve_config(
        &self,
        output_dir: Option<&Path>,
        format: Option<Format>,
    ) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.datasets.is_empty() {
            cfg.datasets = self
                .datasets
                .iter()
                .map(|(name, path)| DatasetEntry {
                    name: name.clone(),
                    path: path.clone(),
                })
                .collect();
        }
        if !self.models.is_empty() {
            cfg.models = self
                .models
                .iter()
                .map(|(n, k)| ModelEntry::new(n, *k))
                .collect();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if !self.checkpoints.is_empty() {
            cfg.checkpoints = checkpoints_arg(&self.checkpoints)?;
        }
        if !self.scenarios.is_empty() {
            cfg.scenarios = self.scenarios.clone();
        }
        if !self.sizes.is_empty() {
            cfg.sizes = Some(self.sizes.clone());
        }
        if let Some(n) = self.humanness_sample {
            cfg.humanness_sample = n;
        }
        let p = &mut cfg.preprocess;
        p.max_length = self.max_len.or(p.max_length);
        p.min_length = self.min_len.or(p.min_length);
        p.split_ratio = self.split_ratio.or(p.split_ratio);
        p.vocabulary = self.vocab.clone().or(p.vocabulary.take());
        cfg.output_dir = Some(resolve_output_dir(output_dir, cfg.output_dir.as_deref()));
        cfg.format = format.or(cfg.format);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One `section,metric` row of the summary, valued per model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub section: String,
    pub metric: String,
    pub values: BTreeMap<String, Option<f64>>,
}

/// Final comparison table. Every row is always present; cells are null
/// when the producing scenario did not run or the value is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub schema_version: u32,
    pub models: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    /// Row names in output order.
    pub const ROWS: [(&'static str, &'static str); 15] = [
        ("performance", "in_distribution_pct"),
        ("performance", "cross_dataset_pct"),
        ("performance", "top5_pct"),
        ("performance", "top10_pct"),
        ("performance", "bottom90_pct"),
        ("performance", "short_len_pct"),
        ("performance", "medium_len_pct"),
        ("performance", "long_len_pct"),
        ("performance", "simple_pattern_pct"),
        ("performance", "moderate_pattern_pct"),
        ("performance", "complex_pattern_pct"),
        ("generalizability", "size_cov_pct"),
        ("generalizability", "cross_loss_pct"),
        ("quality", "uniqueness_pct"),
        ("quality", "humanness_pct"),
    ];

    pub fn get(&self, metric: &str, model: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric)
            .and_then(|r| r.values.get(model).copied().flatten())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["section".to_owned(), "metric".to_owned()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.section.clone(), row.metric.clone()];
            for m in &self.models {
                rec.push(
                    row.values
                        .get(m)
                        .copied()
                        .flatten()
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_default(),
                );
            }
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::malformed("csv", e))
    }
}

/// One materialized in-distribution run.
struct Run {
    model: usize,
    dataset: usize,
    guesses: Vec<String>,
    outcome: MatchOutcome,
    report: EvaluationReport,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    model: &'a str,
    dataset: &'a str,
    guess_count: u64,
    matched_unique: usize,
    pct_unique: f64,
    pct_weighted: f64,
}

#[derive(Serialize)]
struct MarginalRow<'a> {
    model: &'a str,
    dataset: &'a str,
    from: u64,
    to: u64,
    total: f64,
    relative: Option<f64>,
}

#[derive(Serialize)]
struct BreakdownRow<'a> {
    model: &'a str,
    dataset: &'a str,
    group: String,
    pct: f64,
}

#[derive(Serialize)]
struct SizeRow<'a> {
    model: &'a str,
    dataset: &'a str,
    train_size: usize,
    pct: f64,
}

#[derive(Clone, Debug, Serialize)]
struct HumannessRow {
    model: String,
    dataset: String,
    distance: String,
    raw: f64,
    lower: f64,
    upper: f64,
    normalized: Option<f64>,
}

/// Everything `benchmark` computed, as written to `benchmark.json`.
#[derive(Serialize)]
struct BenchmarkReport<'a> {
    schema_version: u32,
    seed: u64,
    datasets: Vec<DatasetInfo<'a>>,
    runs: Vec<&'a EvaluationReport>,
    crossdataset: BTreeMap<&'a str, CrossMatrix>,
    sizesweep: BTreeMap<&'a str, SweepByDataset<'a>>,
    compare: Option<CompareSection>,
    humanness: Vec<HumannessRow>,
    summary: &'a SummaryTable,
}

#[derive(Serialize)]
struct DatasetInfo<'a> {
    name: &'a str,
    counts: crate::corpus::SplitCounts,
}

#[derive(Serialize)]
struct CompareSection {
    jaccard: PairMatrix,
    mergeability: PairMatrix,
    per_dataset: Vec<CompareReport>,
}

fn mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Share of test passwords selected by `keep` that were matched by `at`.
fn group_rate(
    ledger: &MatchLedger,
    split: &SplitCorpus,
    at: u64,
    keep: impl Fn(&str) -> bool,
) -> Option<f64> {
    let (mut hit, mut all) = (0usize, 0usize);
    for p in split.test_unique().filter(|p| keep(p)) {
        all += 1;
        if ledger.is_matched_by(p, at) {
            hit += 1;
        }
    }
    (all > 0).then(|| 100.0 * hit as f64 / all as f64)
}

fn materialize(
    cfg: &RunConfig,
    model: &ModelEntry,
    split: &SplitCorpus,
    dataset: &str,
) -> Result<Option<Vec<String>>> {
    let limit = cfg.checkpoints.last();
    if let Some(spec) = model.native_spec() {
        let trained = spec.train(split.train(), split.vocab())?;
        return take_guesses(&mut trained.guesses(limit), limit as usize).map(Some);
    }
    match model.kind {
        ModelKind::External => match model.guesses.get(dataset) {
            Some(path) => {
                let mut stream = open_external_stream(path, model.dedupe)?.with_name(&model.name);
                take_guesses(&mut stream, limit as usize).map(Some)
            }
            None => Ok(None),
        },
        ModelKind::Random => {
            let window = split.config();
            let lo = model.min_len.unwrap_or(window.min_length.max(1));
            let hi = model.max_len.unwrap_or(window.max_length);
            let seed = derive_seed(cfg.seed, &format!("random:{}", model.name));
            let mut source = random_baseline(split.vocab(), lo, hi, seed, limit)?;
            take_guesses(&mut source, limit as usize).map(Some)
        }
        ModelKind::Markov | ModelKind::Pcfg => unreachable!("native kinds handled above"),
    }
}

/// `sample` passwords drawn without replacement after a seeded shuffle.
fn sample(items: &[String], n: usize, seed: u64) -> Vec<String> {
    let mut pool = items.to_vec();
    SeededRng::new(seed).shuffle(&mut pool);
    pool.truncate(n);
    pool
}

/// Runs the configured experiment and writes every report under the
/// config's output directory. `jobs` bounds the worker threads.
pub fn run_benchmark(cfg: &RunConfig, jobs: Option<usize>) -> Result<SummaryTable> {
    cfg.validate()?;
    let out = Output {
        dir: cfg
            .output_dir
            .clone()
            .unwrap_or_else(|| resolve_output_dir(None, None)),
        format: cfg.format.unwrap_or_default(),
    };
    if jobs == Some(0) {
        return Err(Error::Config("--jobs must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute(cfg, &out))
}

fn execute(cfg: &RunConfig, out: &Output) -> Result<SummaryTable> {
    let pp = cfg.preprocess_config();
    let vocab = cfg.vocabulary()?;
    let cps = &cfg.checkpoints;
    out.write("run.toml", cfg.to_toml()?.as_bytes())?;

    let splits: Vec<SplitCorpus> = cfg
        .datasets
        .par_iter()
        .map(|d| {
            let raw = load_corpus(&d.path)?;
            let split = preprocess(&raw, &pp, &vocab)?.with_name(&d.name);
            split.save(&out.path("splits"))?;
            Ok(split)
        })
        .collect::<Result<_>>()?;
    for s in &splits {
        let c = s.counts();
        println!(
            "{}: train {}, test {} unique",
            s.name(),
            c.train,
            c.test_unique
        );
    }
    let names: Vec<&str> = cfg.models.iter().map(|m| m.name.as_str()).collect();
    let dnames: Vec<&str> = splits.iter().map(|s| s.name()).collect();

    let pairs: Vec<(usize, usize)> = (0..cfg.models.len())
        .flat_map(|m| (0..splits.len()).map(move |d| (m, d)))
        .collect();
    let runs: Vec<Run> = pairs
        .par_iter()
        .map(|&(m, d)| -> Result<Option<Run>> {
            let Some(guesses) = materialize(cfg, &cfg.models[m], &splits[d], dnames[d])? else {
                return Ok(None);
            };
            let outcome = run_match(&mut SliceGuesses::new(names[m], &guesses), &splits[d], cps)?;
            let report = EvaluationReport::build(names[m], &splits[d], cps, &outcome)?;
            write_evaluation(
                out,
                &format!("runs/{}.{}", names[m], dnames[d]),
                &report,
                &outcome,
            )?;
            Ok(Some(Run {
                model: m,
                dataset: d,
                guesses,
                outcome,
                report,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for (m, name) in names.iter().enumerate() {
        if !runs.iter().any(|r| r.model == m) {
            warn!("model {name} has no guesses for any dataset");
        }
    }
    let run_of = |m: usize, d: usize| runs.iter().find(|r| r.model == m && r.dataset == d);

    if out.format.csv() {
        write_run_tables(cfg, out, &runs, &names, &dnames)?;
    }

    let crossdataset = if cfg.has(Scenario::Crossdataset) {
        crossdataset(cfg, out, &runs, &splits, &names)?
    } else {
        BTreeMap::new()
    };
    let sizesweep = if cfg.has(Scenario::Sizesweep) {
        sizesweep(cfg, out, &splits, &names)?
    } else {
        BTreeMap::new()
    };
    let compare = if cfg.has(Scenario::Compare) {
        Some(compare(cfg, out, &runs, &splits, &names)?)
    } else {
        None
    };
    let humanness = if cfg.has(Scenario::Humanness) {
        humanness(cfg, out, &runs, &splits, &names)?
    } else {
        Vec::new()
    };

    let summary = summarize(
        cfg,
        &splits,
        &names,
        &run_of,
        &crossdataset,
        &sizesweep,
        &humanness,
    )?;
    if out.format.csv() {
        out.write("summary.csv", &summary.to_csv()?)?;
    }
    if out.format.json() {
        out.write_json("summary.json", &summary)?;
        let report = BenchmarkReport {
            schema_version: crate::SCHEMA_VERSION,
            seed: cfg.seed,
            datasets: splits
                .iter()
                .map(|s| DatasetInfo {
                    name: s.name(),
                    counts: *s.counts(),
                })
                .collect(),
            runs: runs.iter().map(|r| &r.report).collect(),
            crossdataset,
            sizesweep,
            compare,
            humanness,
            summary: &summary,
        };
        out.write_json("benchmark.json", &report)?;
    }
    print_summary(&summary);
    println!("reports written to {}", out.dir.display());
    Ok(summary)
}

fn write_run_tables(
    cfg: &RunConfig,
    out: &Output,
    runs: &[Run],
    names: &[&str],
    dnames: &[&str],
) -> Result<()> {
    let label = |r: &Run| (names[r.model], dnames[r.dataset]);
    if cfg.has(Scenario::Curve) {
        let rows: Vec<CurveRow> = runs
            .iter()
            .flat_map(|r| {
                let (model, dataset) = label(r);
                r.report.curve.iter().map(move |p| CurveRow {
                    model,
                    dataset,
                    guess_count: p.guess_count,
                    matched_unique: p.matched_unique,
                    pct_unique: p.pct_unique,
                    pct_weighted: p.pct_weighted,
                })
            })
            .collect();
        out.write("curves.csv", &csv_bytes(&rows)?)?;
    }
    if cfg.has(Scenario::Marginal) {
        let rows: Vec<MarginalRow> = runs
            .iter()
            .flat_map(|r| {
                let (model, dataset) = label(r);
                r.report.marginal.iter().map(move |g| MarginalRow {
                    model,
                    dataset,
                    from: g.from,
                    to: g.to,
                    total: g.total,
                    relative: g.relative,
                })
            })
            .collect();
        out.write("marginal.csv", &csv_bytes(&rows)?)?;
    }
    let breakdown =
        |file: &str, pick: &dyn Fn(&EvaluationReport) -> Vec<(String, f64)>| -> Result<()> {
            let rows: Vec<BreakdownRow> = runs
                .iter()
                .flat_map(|r| {
                    let (model, dataset) = label(r);
                    pick(&r.report)
                        .into_iter()
                        .map(move |(group, pct)| BreakdownRow {
                            model,
                            dataset,
                            group,
                            pct,
                        })
                })
                .collect();
            out.write(file, &csv_bytes(&rows)?).map(|_| ())
        };
    if cfg.has(Scenario::Lengths) {
        breakdown("lengths.csv", &|r| {
            r.lengths.iter().map(|(k, v)| (k.to_string(), *v)).collect()
        })?;
    }
    if cfg.has(Scenario::Patterns) {
        breakdown("patterns.csv", &|r| {
            r.patterns
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect()
        })?;
    }
    if cfg.has(Scenario::Frequency) {
        breakdown("frequency.csv", &|r| {
            r.frequency
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect()
        })?;
    }
    Ok(())
}

fn crossdataset<'a>(
    cfg: &RunConfig,
    out: &Output,
    runs: &[Run],
    splits: &[SplitCorpus],
    names: &[&'a str],
) -> Result<BTreeMap<&'a str, CrossMatrix>> {
    let cps = &cfg.checkpoints;
    let cells: Vec<(usize, usize, usize, f64)> = runs
        .par_iter()
        .flat_map_iter(|r| (0..splits.len()).map(move |t| (r, t)))
        .map(|(r, t)| {
            let pct = if t == r.dataset {
                r.outcome.curve.last().map_or(0.0, |p| p.pct_unique)
            } else {
                let train = &splits[r.dataset];
                let mut source = SliceGuesses::new(names[r.model], &r.guesses);
                let outcome =
                    cross_dataset_run(&mut source, train.config(), train.vocab(), &splits[t], cps)?;
                outcome.curve.last().map_or(0.0, |p| p.pct_unique)
            };
            Ok((r.model, r.dataset, t, pct))
        })
        .collect::<Result<_>>()?;
    let dnames: Vec<String> = splits.iter().map(|s| s.name().to_owned()).collect();
    let mut matrices = BTreeMap::new();
    for (m, name) in names.iter().enumerate() {
        let mut matrix = CrossMatrix::new(dnames.clone());
        for &(_, d, t, pct) in cells.iter().filter(|c| c.0 == m) {
            matrix.insert(&dnames[d], &dnames[t], pct);
        }
        if out.format.csv() {
            out.write(&format!("crossdataset.{name}.csv"), &matrix.to_csv()?)?;
        }
        matrices.insert(*name, matrix);
    }
    Ok(matrices)
}

/// Dataset -> train size -> guessed percentage.
type SweepByDataset<'a> = BTreeMap<&'a str, BTreeMap<usize, f64>>;

fn sizesweep<'a>(
    cfg: &RunConfig,
    out: &Output,
    splits: &'a [SplitCorpus],
    names: &[&'a str],
) -> Result<BTreeMap<&'a str, SweepByDataset<'a>>> {
    let jobs: Vec<(usize, usize)> = cfg
        .models
        .iter()
        .enumerate()
        .filter(|(_, m)| m.native_spec().is_some())
        .flat_map(|(m, _)| (0..splits.len()).map(move |d| (m, d)))
        .collect();
    let results: Vec<(usize, usize, BTreeMap<usize, f64>)> = jobs
        .par_iter()
        .map(|&(m, d)| {
            let split = &splits[d];
            let sizes = match &cfg.sizes {
                Some(s) => s.clone(),
                None => {
                    let n = split.train().len();
                    let mut s: Vec<usize> =
                        [n / 4, n / 2, n].into_iter().filter(|&x| x > 0).collect();
                    s.dedup();
                    s
                }
            };
            let spec = cfg.models[m]
                .native_spec()
                .expect("filtered to native models");
            let seed = derive_seed(cfg.seed, &format!("sizesweep:{}", split.name()));
            Ok((
                m,
                d,
                size_sensitivity_run(split, &sizes, &spec, &cfg.checkpoints, seed)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut table: BTreeMap<&str, BTreeMap<&str, BTreeMap<usize, f64>>> = BTreeMap::new();
    let mut rows = Vec::new();
    for (m, d, by_size) in results {
        for (&size, &pct) in &by_size {
            rows.push(SizeRow {
                model: names[m],
                dataset: splits[d].name(),
                train_size: size,
                pct,
            });
        }
        table
            .entry(names[m])
            .or_default()
            .insert(splits[d].name(), by_size);
    }
    if out.format.csv() {
        out.write("sizesweep.csv", &csv_bytes(&rows)?)?;
    }
    Ok(table)
}

fn compare(
    cfg: &RunConfig,
    out: &Output,
    runs: &[Run],
    splits: &[SplitCorpus],
    names: &[&str],
) -> Result<CompareSection> {
    let mut per_dataset = Vec::new();
    for (d, split) in splits.iter().enumerate() {
        let here: Vec<(&str, &GuessSetSummary)> = runs
            .iter()
            .filter(|r| r.dataset == d)
            .map(|r| (names[r.model], &r.outcome.summary))
            .collect();
        if here.len() < 2 {
            warn!(
                "compare skipped on {}: fewer than two models have guesses",
                split.name()
            );
            continue;
        }
        per_dataset.push(compare_runs(
            split.name(),
            split.test_len(),
            cfg.checkpoints.last(),
            &here,
        )?);
    }

    // Across datasets, each pair is averaged over the datasets both cover.
    let models: Vec<String> = names.iter().map(|n| n.to_string()).collect();
    let mut jaccard = PairMatrix {
        models: models.clone(),
        cells: BTreeMap::new(),
    };
    let mut mergeability = jaccard.clone();
    for (a, na) in names.iter().enumerate() {
        for (b, nb) in names.iter().enumerate() {
            let (mut sa, mut sb) = (Vec::new(), Vec::new());
            for r in runs.iter().filter(|r| r.model == a) {
                if let Some(o) = runs.iter().find(|o| o.model == b && o.dataset == r.dataset) {
                    sa.push(&r.outcome.summary);
                    sb.push(&o.outcome.summary);
                }
            }
            let (j, mi) = if sa.is_empty() {
                (None, None)
            } else if a == b {
                let any = sa.iter().any(|s| !s.matched.is_empty());
                (jaccard_index(&sa, &sb).ok(), any.then_some(0.0))
            } else {
                (
                    jaccard_index(&sa, &sb).ok(),
                    mergeability_index(&sa, &sb)?.mean,
                )
            };
            jaccard
                .cells
                .entry(na.to_string())
                .or_default()
                .insert(nb.to_string(), j);
            mergeability
                .cells
                .entry(na.to_string())
                .or_default()
                .insert(nb.to_string(), mi);
        }
    }
    if out.format.csv() {
        out.write("jaccard.csv", &jaccard.to_csv()?)?;
        out.write("mergeability.csv", &mergeability.to_csv()?)?;
    }
    let multimodel: Vec<_> = per_dataset
        .iter()
        .map(|c| serde_json::json!({ "dataset": c.dataset, "steps": c.multimodel }))
        .collect();
    out.write_json("multimodel.json", &multimodel)?;
    Ok(CompareSection {
        jaccard,
        mergeability,
        per_dataset,
    })
}

fn humanness(
    cfg: &RunConfig,
    out: &Output,
    runs: &[Run],
    splits: &[SplitCorpus],
    names: &[&str],
) -> Result<Vec<HumannessRow>> {
    let n = cfg.humanness_sample;
    let mut rows = Vec::new();
    for (d, split) in splits.iter().enumerate() {
        let seed =
            |purpose: &str| derive_seed(cfg.seed, &format!("humanness:{purpose}:{}", split.name()));
        let test_all: Vec<String> = split.test_unique().map(String::from).collect();
        let test = sample(&test_all, n, seed("test"));
        let train = sample(split.train(), n, seed("train"));
        let window = split.config();
        let random: Vec<String> = random_baseline(
            split.vocab(),
            window.min_length.max(1),
            window.max_length,
            seed("random"),
            n as u64,
        )?
        .collect();
        if train.is_empty() {
            warn!("humanness skipped on {}: empty training side", split.name());
            continue;
        }
        let distances = builtin_distances(split.vocab());
        let bounds = distances
            .iter()
            .map(|f| f.bounds(&test, &train, &random))
            .collect::<Result<Vec<_>>>()?;
        for r in runs.iter().filter(|r| r.dataset == d) {
            let generated = sample(&r.guesses, n, seed(&format!("model:{}", names[r.model])));
            if generated.is_empty() {
                continue;
            }
            for (f, b) in distances.iter().zip(&bounds) {
                let raw = f.dist(&test, &generated)?;
                let normalized = match humanness_normalize(raw, b) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        warn!("{} on {}: {e}", f.name(), split.name());
                        None
                    }
                };
                rows.push(HumannessRow {
                    model: names[r.model].to_owned(),
                    dataset: split.name().to_owned(),
                    distance: f.name().to_owned(),
                    raw,
                    lower: b.lower,
                    upper: b.upper,
                    normalized,
                });
            }
        }
    }
    if out.format.csv() {
        out.write("humanness.csv", &csv_bytes(&rows)?)?;
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn summarize<'r>(
    cfg: &RunConfig,
    splits: &[SplitCorpus],
    names: &[&str],
    run_of: &dyn Fn(usize, usize) -> Option<&'r Run>,
    crossdataset: &BTreeMap<&str, CrossMatrix>,
    sizesweep: &BTreeMap<&str, BTreeMap<&str, BTreeMap<usize, f64>>>,
    humanness: &[HumannessRow],
) -> Result<SummaryTable> {
    let per_dataset = |m: usize, f: &dyn Fn(&Run, &SplitCorpus) -> Option<f64>| {
        mean((0..splits.len()).map(|d| run_of(m, d).and_then(|r| f(r, &splits[d]))))
    };
    let group = |m: usize, keep: &dyn Fn(&str) -> bool| {
        per_dataset(m, &|r, s| {
            group_rate(&r.outcome.ledger, s, r.report.breakdown_at, keep)
        })
    };
    let bucket = |m: usize, b: crate::analysis::Bucket| {
        per_dataset(m, &|r, _| r.report.frequency.get(&b).copied())
    };

    let mut rows: Vec<SummaryRow> = SummaryTable::ROWS
        .iter()
        .map(|(section, metric)| SummaryRow {
            section: section.to_string(),
            metric: metric.to_string(),
            values: names.iter().map(|n| (n.to_string(), None)).collect(),
        })
        .collect();
    let mut set = |metric: &str, model: &str, value: Option<f64>| {
        let row = rows
            .iter_mut()
            .find(|r| r.metric == metric)
            .expect("declared row");
        row.values.insert(model.to_owned(), value);
    };

    for (m, &name) in names.iter().enumerate() {
        set(
            "in_distribution_pct",
            name,
            per_dataset(m, &|r, _| r.outcome.curve.last().map(|p| p.pct_unique)),
        );
        set(
            "uniqueness_pct",
            name,
            per_dataset(m, &|r, _| uniqueness(&r.outcome.summary).ok()),
        );
        if cfg.has(Scenario::Frequency) {
            use crate::analysis::Bucket;
            set("top5_pct", name, bucket(m, Bucket::Top5));
            set("top10_pct", name, bucket(m, Bucket::Top10));
            set("bottom90_pct", name, bucket(m, Bucket::Bottom90));
        }
        if cfg.has(Scenario::Lengths) {
            set("short_len_pct", name, group(m, &|p| p.len() <= 7));
            set(
                "medium_len_pct",
                name,
                group(m, &|p| (8..=10).contains(&p.len())),
            );
            set("long_len_pct", name, group(m, &|p| p.len() >= 11));
        }
        if cfg.has(Scenario::Patterns) {
            set(
                "simple_pattern_pct",
                name,
                group(m, &|p| class_count(p) == 1),
            );
            set(
                "moderate_pattern_pct",
                name,
                group(m, &|p| class_count(p) == 2),
            );
            set(
                "complex_pattern_pct",
                name,
                group(m, &|p| class_count(p) == 3),
            );
        }
        if let Some(matrix) = crossdataset.get(name) {
            let mut off = Vec::new();
            let mut losses = Vec::new();
            for (d, train) in splits.iter().enumerate() {
                let Some(diag) = matrix.get(train.name(), train.name()) else {
                    continue;
                };
                let (mut pcts, mut weights) = (Vec::new(), Vec::new());
                for (t, test) in splits.iter().enumerate() {
                    if t == d {
                        continue;
                    }
                    if let Some(v) = matrix.get(train.name(), test.name()) {
                        pcts.push(v);
                        weights.push(test.test_len() as f64);
                        off.push(Some(v));
                    }
                }
                losses.push(generalization_loss(diag, &pcts, &weights).ok());
            }
            set("cross_dataset_pct", name, mean(off));
            set("cross_loss_pct", name, mean(losses));
        }
        if let Some(by_dataset) = sizesweep.get(name) {
            let covs = by_dataset.values().map(|by_size| {
                let v: Vec<f64> = by_size.values().copied().collect();
                coefficient_of_variation(&v).ok()
            });
            set("size_cov_pct", name, mean(covs));
        }
        if !humanness.is_empty() {
            let per = splits.iter().map(|s| {
                mean(
                    humanness
                        .iter()
                        .filter(|h| h.model == name && h.dataset == s.name())
                        .map(|h| h.normalized),
                )
            });
            set("humanness_pct", name, mean(per));
        }
    }
    Ok(SummaryTable {
        schema_version: crate::SCHEMA_VERSION,
        models: names.iter().map(|n| n.to_string()).collect(),
        rows,
    })
}

fn print_summary(summary: &SummaryTable) {
    println!("section\tmetric\t{}", summary.models.join("\t"));
    for row in &summary.rows {
        let cells: Vec<String> = summary
            .models
            .iter()
            .map(|m| {
                row.values
                    .get(m)
                    .copied()
                    .flatten()
                    .map_or("-".into(), |v| format!("{v:.2}"))
            })
            .collect();
        println!("{}\t{}\t{}", row.section, row.metric, cells.join("\t"));
    }
}
