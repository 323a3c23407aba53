//! The single-stage subcommands.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use log::warn;
use serde::Serialize;

use super::{json_bytes, Output};
use crate::analysis::{AnalysisReport, DEFAULT_SPECTRUM_MIN_COUNT};
use crate::corpus::{
    load_corpus, preprocess as preprocess_corpus, read_password_lines, PreprocessConfig,
    SplitCorpus, Vocabulary,
};
use crate::error::{Error, Result};
use crate::eval::{run_match, Checkpoints, EvaluationReport, MatchOutcome};
use crate::io::write_atomic_with;
use crate::metrics::{
    jaccard_cell, mergeability_cell, multi_model_select, GuessSetSummary, PairMatrix, SelectionStep,
};
use crate::models::{
    open_external_stream, random_baseline, GuessSource, MarkovConfig, NativeSpec, TrainedModel,
};

const SPLIT_SUFFIXES: [&str; 3] = [".train.txt", ".test.txt", ".meta.json"];

/// Markov parameters shared by `train`, `generate`, `evaluate` and `compare`.
#[derive(Args, Clone, Debug)]
pub struct MarkovArgs {
    /// Markov order (context length plus one)
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Number of discrete levels
    #[arg(long, default_value_t = 11)]
    pub level_count: u8,
    /// Logarithm base of the level discretization
    #[arg(long, default_value_t = 2.5)]
    pub level_base: f64,
}

impl MarkovArgs {
    fn config(&self) -> MarkovConfig {
        MarkovConfig {
            order: self.order,
            level_count: self.level_count,
            level_base: self.level_base,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NativeKind {
    Markov,
    Pcfg,
}

impl NativeKind {
    fn spec(self, markov: &MarkovArgs) -> Result<NativeSpec> {
        Ok(match self {
            NativeKind::Markov => {
                let cfg = markov.config();
                cfg.validate()?;
                NativeSpec::Markov(cfg)
            }
            NativeKind::Pcfg => NativeSpec::Pcfg,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Markov,
    Pcfg,
    Random,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Raw password file, one entry per line
    #[arg(long)]
    pub input: PathBuf,
    /// Split name [default: input file stem]
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 12)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0)]
    pub min_len: usize,
    /// Share of entries assigned to the training side
    #[arg(long, default_value_t = 0.8)]
    pub split_ratio: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Admitted characters [default: ASCII letters, digits and punctuation]
    #[arg(long)]
    pub vocab: Option<String>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Password file; split members are read through their sidecar
    #[arg(long)]
    pub input: PathBuf,
    /// Report name [default: input file name without extension]
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Minimum count for the rank/frequency spectrum
    #[arg(long, default_value_t = DEFAULT_SPECTRUM_MIN_COUNT)]
    pub min_count: u64,
    #[arg(long)]
    pub vocab: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: NativeKind,
    /// Training passwords, usually `<name>.train.txt`
    #[arg(long)]
    pub train: PathBuf,
    /// Model file [default: <output-dir>/<name>.<model>.json]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub markov: MarkovArgs,
    #[arg(long)]
    pub vocab: Option<String>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(
        long,
        value_enum,
        required_unless_present = "model_file",
        conflicts_with = "model_file"
    )]
    pub model: Option<GenerateKind>,
    /// Previously trained model
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Training passwords for markov/pcfg; also supplies the window and
    /// vocabulary for random
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Number of guesses to write
    #[arg(long)]
    pub limit: u64,
    /// Guess file [default: <output-dir>/<model>.guesses.txt]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub markov: MarkovArgs,
    /// Seed for the random baseline
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Shortest random guess [default: 1]
    #[arg(long)]
    pub min_len: Option<usize>,
    /// Longest random guess [default: 12]
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub vocab: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Test side of a split, `<name>.test.txt`
    #[arg(long)]
    pub test: PathBuf,
    /// Guess file, one guess per line in order
    #[arg(long)]
    pub guesses: Option<PathBuf>,
    /// Skip repeated lines of the guess file instead of counting them
    #[arg(long, requires = "guesses")]
    pub dedupe: bool,
    /// Train a native model (on --train, else the split's own training side)
    #[arg(long, value_enum)]
    pub model: Option<NativeKind>,
    /// Previously trained model
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[command(flatten)]
    pub markov: MarkovArgs,
    /// Comma-separated guess counts [default: 1000,10000,100000,1000000]
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    /// Model label in reports and file names
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Test side of a split, `<name>.test.txt`
    #[arg(long)]
    pub test: PathBuf,
    /// NAME=PATH guess file; repeat once per model
    #[arg(long = "guesses", value_parser = parse_named_path)]
    pub guesses: Vec<(String, PathBuf)>,
    /// Native model trained on the split's training side; repeatable
    #[arg(long, value_enum)]
    pub model: Vec<NativeKind>,
    #[arg(long)]
    pub dedupe: bool,
    /// Guesses consumed per model
    #[arg(long, default_value_t = 1_000_000)]
    pub limit: u64,
    #[command(flatten)]
    pub markov: MarkovArgs,
}

pub(crate) fn parse_named_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_owned(), PathBuf::from(path)))
        }
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

pub(crate) fn vocab_arg(flag: Option<&str>) -> Result<Vocabulary> {
    flag.map_or_else(|| Ok(Vocabulary::default()), Vocabulary::new)
}

pub(crate) fn checkpoints_arg(list: &[u64]) -> Result<Checkpoints> {
    if list.is_empty() {
        Ok(Checkpoints::desk_default())
    } else {
        Checkpoints::new(list.to_vec())
    }
}

/// Dataset name of a split member, else the file name up to its first dot.
pub(crate) fn split_name(path: &Path) -> String {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    if let Some(name) = SPLIT_SUFFIXES.iter().find_map(|s| file.strip_suffix(s)) {
        return name.to_owned();
    }
    file.split('.')
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or("input")
        .to_owned()
}

/// The split owning `path`, when `path` is a split member with a sidecar.
fn sibling_split(path: &Path) -> Result<Option<SplitCorpus>> {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let Some(name) = SPLIT_SUFFIXES.iter().find_map(|s| file.strip_suffix(s)) else {
        return Ok(None);
    };
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    if !SplitCorpus::meta_path(dir, name).exists() {
        return Ok(None);
    }
    SplitCorpus::load(dir, name).map(Some)
}

/// Training passwords with the vocabulary and window they were filtered by.
struct Training {
    passwords: Vec<String>,
    vocab: Vocabulary,
    config: Option<PreprocessConfig>,
}

fn load_training(path: &Path, vocab_flag: Option<&str>) -> Result<Training> {
    let mut passwords = read_password_lines(path)?;
    let (vocab, config) = match sibling_split(path)? {
        Some(split) if vocab_flag.is_none() => {
            (split.vocab().clone(), Some(split.config().clone()))
        }
        _ => (vocab_arg(vocab_flag)?, None),
    };
    let before = passwords.len();
    passwords.retain(|p| vocab.admits(p));
    if passwords.len() < before {
        warn!(
            "{}: skipped {} passwords with characters outside the vocabulary",
            path.display(),
            before - passwords.len()
        );
    }
    if passwords.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    Ok(Training {
        passwords,
        vocab,
        config,
    })
}

pub fn preprocess(args: &PreprocessArgs, out: &Output) -> Result<()> {
    let cfg = PreprocessConfig {
        max_length: args.max_len,
        min_length: args.min_len,
        split_ratio: args.split_ratio,
        seed: args.seed,
    };
    cfg.validate()?;
    let vocab = vocab_arg(args.vocab.as_deref())?;
    let raw = load_corpus(&args.input)?;
    let name = args.name.clone().unwrap_or_else(|| split_name(&args.input));
    let split = preprocess_corpus(&raw, &cfg, &vocab)?.with_name(&name);
    let paths = split.save(&out.dir)?;

    let c = split.counts();
    let total = raw.lines.len();
    let removed = total - c.filtered;
    let pct = |n: usize, of: usize| {
        if of == 0 {
            0.0
        } else {
            100.0 * n as f64 / of as f64
        }
    };
    println!("dataset\ttotal\t#Rem\t%Rem\ttrain\ttest_unique\toverlap_removed");
    println!(
        "{name}\t{total}\t{removed}\t{:.2}\t{}\t{}\t{}",
        pct(removed, total),
        c.train,
        c.test_unique,
        c.overlap_removed
    );
    if raw.invalid_lines > 0 {
        println!("{} undecodable lines skipped", raw.invalid_lines);
    }
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct LengthRow {
    length: usize,
    pct: f64,
    cdf: f64,
}

#[derive(Serialize)]
struct PatternRow {
    pattern: String,
    description: &'static str,
    pct: f64,
}

#[derive(Serialize)]
struct CountRow<'a> {
    rank: usize,
    password: &'a str,
    count: u64,
}

pub fn analyze(args: &AnalyzeArgs, out: &Output) -> Result<()> {
    let (passwords, vocab) = match sibling_split(&args.input)? {
        Some(split) if args.input.to_string_lossy().ends_with(".test.txt") => {
            let expanded = split
                .test_freq()
                .iter()
                .flat_map(|(p, &c)| std::iter::repeat_n(p.clone(), c as usize))
                .collect();
            (expanded, split.vocab().clone())
        }
        Some(split) => (split.train().to_vec(), split.vocab().clone()),
        None => {
            let vocab = vocab_arg(args.vocab.as_deref())?;
            let mut lines = read_password_lines(&args.input)?;
            let before = lines.len();
            lines.retain(|p| vocab.admits(p));
            if lines.len() < before {
                warn!(
                    "skipped {} entries with characters outside the vocabulary",
                    before - lines.len()
                );
            }
            (lines, vocab)
        }
    };
    let name = args.name.clone().unwrap_or_else(|| {
        let file = args
            .input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        file.strip_suffix(".txt").unwrap_or(&file).to_owned()
    });
    let report = AnalysisReport::build(&name, &passwords, &vocab, args.top_k, args.min_count)?;

    if out.format.csv() {
        let lengths: Vec<LengthRow> = report
            .lengths
            .pct_by_length
            .iter()
            .map(|(&length, &pct)| LengthRow {
                length,
                pct,
                cdf: report.lengths.cdf[&length],
            })
            .collect();
        out.write_csv(&format!("{name}.lengths.csv"), &lengths)?;
        let patterns: Vec<PatternRow> = report
            .patterns
            .iter()
            .map(|(id, &pct)| PatternRow {
                pattern: id.to_string(),
                description: id.description(),
                pct,
            })
            .collect();
        out.write_csv(&format!("{name}.patterns.csv"), &patterns)?;
        fn rows(list: &[(String, u64)]) -> Vec<CountRow<'_>> {
            list.iter()
                .enumerate()
                .map(|(i, (p, c))| CountRow {
                    rank: i + 1,
                    password: p,
                    count: *c,
                })
                .collect()
        }
        out.write_csv(&format!("{name}.topk.csv"), &rows(&report.top_k))?;
        out.write_csv(
            &format!("{name}.spectrum.csv"),
            &rows(&report.spectrum.ranked),
        )?;
    }
    if out.format.json() {
        out.write_json(&format!("{name}.analysis.json"), &report)?;
    }
    println!(
        "{name}: {} passwords, {} distinct",
        report.total, report.distinct
    );
    match &report.zipf {
        Some(z) => println!("zipf fit: slope {:.4}, r^2 {:.4}", z.slope, z.r_squared),
        None => println!("zipf fit: spectrum too short"),
    }
    Ok(())
}

pub fn train(args: &TrainArgs, out: &Output) -> Result<()> {
    let spec = args.model.spec(&args.markov)?;
    let training = load_training(&args.train, args.vocab.as_deref())?;
    let model = spec.train(&training.passwords, &training.vocab)?;
    let path = args.out.clone().unwrap_or_else(|| {
        out.path(&format!(
            "{}.{}.json",
            split_name(&args.train),
            spec.label()
        ))
    });
    model.save(&path)?;
    println!(
        "trained {} on {} passwords, wrote {}",
        spec.label(),
        training.passwords.len(),
        path.display()
    );
    Ok(())
}

/// Writes up to `limit` guesses, one per line; returns the number written.
pub(crate) fn write_guess_file(
    path: &Path,
    source: &mut dyn GuessSource,
    limit: u64,
) -> Result<u64> {
    let mut written = 0u64;
    write_atomic_with(path, |w| {
        while written < limit {
            let Some(g) = source.next_guess()? else { break };
            w.write_all(g.as_bytes())
                .and_then(|_| w.write_all(b"\n"))
                .map_err(|e| Error::io(path, e))?;
            written += 1;
        }
        Ok(())
    })?;
    Ok(written)
}

pub fn generate(args: &GenerateArgs, out: &Output) -> Result<()> {
    let default_path = |label: &str| out.path(&format!("{label}.guesses.txt"));
    let (path, written) = if let Some(file) = &args.model_file {
        let model = TrainedModel::load(file)?;
        let path = args
            .out
            .clone()
            .unwrap_or_else(|| default_path(&split_name(file)));
        let n = write_guess_file(&path, &mut model.guesses(args.limit), args.limit)?;
        (path, n)
    } else {
        match args.model.expect("clap requires --model or --model-file") {
            GenerateKind::Random => {
                let split = match &args.train {
                    Some(t) => sibling_split(t)?,
                    None => None,
                };
                let vocab = match (&args.vocab, &split) {
                    (None, Some(s)) => s.vocab().clone(),
                    (flag, _) => vocab_arg(flag.as_deref())?,
                };
                let window = split.as_ref().map(|s| s.config());
                let min_len = args
                    .min_len
                    .unwrap_or(window.map_or(1, |c| c.min_length.max(1)));
                let max_len = args.max_len.unwrap_or(window.map_or(12, |c| c.max_length));
                let mut source = random_baseline(&vocab, min_len, max_len, args.seed, args.limit)?;
                let path = args.out.clone().unwrap_or_else(|| default_path("random"));
                let n = write_guess_file(&path, &mut source, args.limit)?;
                (path, n)
            }
            kind => {
                let native = if kind == GenerateKind::Markov {
                    NativeKind::Markov
                } else {
                    NativeKind::Pcfg
                };
                let spec = native.spec(&args.markov)?;
                let train = args.train.as_ref().ok_or_else(|| {
                    Error::Config(format!("--model {} needs --train", spec.label()))
                })?;
                let training = load_training(train, args.vocab.as_deref())?;
                let model = spec.train(&training.passwords, &training.vocab)?;
                let path = args.out.clone().unwrap_or_else(|| {
                    default_path(&format!("{}.{}", split_name(train), spec.label()))
                });
                let n = write_guess_file(&path, &mut model.guesses(args.limit), args.limit)?;
                (path, n)
            }
        }
    };
    println!("wrote {written} guesses to {}", path.display());
    if written < args.limit {
        println!("model exhausted after {written} guesses");
    }
    Ok(())
}

/// Two-column `<key_name>,pct` table.
pub(crate) fn keyed_csv<K: std::fmt::Display>(
    key_name: &str,
    map: &BTreeMap<K, f64>,
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([key_name, "pct"])?;
    for (k, pct) in map {
        w.write_record([k.to_string(), pct.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::malformed("csv", e))
}

/// Writes the ledger plus the report as JSON and/or CSV tables under
/// `<stem>.*`.
pub(crate) fn write_evaluation(
    out: &Output,
    stem: &str,
    report: &EvaluationReport,
    outcome: &MatchOutcome,
) -> Result<()> {
    out.write(&format!("{stem}.ledger.json"), &outcome.ledger.to_json()?)?;
    if out.format.json() {
        out.write_json(&format!("{stem}.report.json"), report)?;
    }
    if out.format.csv() {
        out.write_csv(&format!("{stem}.curve.csv"), &report.curve)?;
        out.write_csv(&format!("{stem}.marginal.csv"), &report.marginal)?;
        out.write(
            &format!("{stem}.lengths.csv"),
            &keyed_csv("length", &report.lengths)?,
        )?;
        out.write(
            &format!("{stem}.patterns.csv"),
            &keyed_csv("pattern", &report.patterns)?,
        )?;
        out.write(
            &format!("{stem}.frequency.csv"),
            &keyed_csv("bucket", &report.frequency)?,
        )?;
    }
    Ok(())
}

fn print_curve(name: &str, report: &EvaluationReport) {
    println!(
        "{name} on {}: {} unique test passwords",
        report.dataset, report.summary.test_unique
    );
    println!("guesses\tmatched\tpct_unique\tpct_weighted");
    for p in &report.curve {
        println!(
            "{}\t{}\t{:.4}\t{:.4}",
            p.guess_count, p.matched_unique, p.pct_unique, p.pct_weighted
        );
    }
}

pub fn evaluate(args: &EvaluateArgs, out: &Output) -> Result<()> {
    let chosen = [
        args.guesses.is_some(),
        args.model.is_some(),
        args.model_file.is_some(),
    ];
    if chosen.iter().filter(|&&c| c).count() != 1 {
        return Err(Error::Config(
            "evaluate needs exactly one of --guesses, --model or --model-file".into(),
        ));
    }
    let split = SplitCorpus::load_from_member(&args.test)?;
    let cps = checkpoints_arg(&args.checkpoints)?;

    let (name, outcome) = if let Some(path) = &args.guesses {
        let name = args.name.clone().unwrap_or_else(|| split_name(path));
        let mut stream = open_external_stream(path, args.dedupe)?.with_name(&name);
        let outcome = run_match(&mut stream, &split, &cps)?;
        if stream.invalid_lines() > 0 {
            warn!(
                "{}: {} undecodable lines skipped",
                path.display(),
                stream.invalid_lines()
            );
        }
        (name, outcome)
    } else if let Some(file) = &args.model_file {
        let model = TrainedModel::load(file)?;
        if let TrainedModel::Markov(m) = &model {
            if m.alphabet() != split.vocab() {
                warn!("model alphabet differs from the test split's vocabulary");
            }
        }
        let name = args.name.clone().unwrap_or_else(|| model.kind().to_owned());
        let outcome = run_match(&mut model.guesses(cps.last()), &split, &cps)?;
        (name, outcome)
    } else {
        let spec = args.model.expect("checked above").spec(&args.markov)?;
        let model = match &args.train {
            Some(path) => {
                let training = load_training(path, None)?;
                if let Some(cfg) = &training.config {
                    split.check_compatible(cfg, &training.vocab)?;
                }
                spec.train(&training.passwords, &training.vocab)?
            }
            None => spec.train(split.train(), split.vocab())?,
        };
        let name = args.name.clone().unwrap_or_else(|| spec.label().to_owned());
        let outcome = run_match(&mut model.guesses(cps.last()), &split, &cps)?;
        (name, outcome)
    };

    let report = EvaluationReport::build(&name, &split, &cps, &outcome)?;
    write_evaluation(out, &format!("{name}.{}", split.name()), &report, &outcome)?;
    print_curve(&name, &report);
    if outcome.exhausted {
        println!(
            "stream exhausted after {} guesses",
            outcome.ledger.guesses_consumed
        );
    }
    Ok(())
}

/// Everything `compare` computes for one test set.
#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub dataset: String,
    pub limit: u64,
    pub matched: BTreeMap<String, usize>,
    pub jaccard: PairMatrix,
    pub mergeability: PairMatrix,
    pub multimodel: Vec<SelectionStep>,
}

/// Pairwise matrices and greedy selection over named runs on one split.
pub(crate) fn compare_runs(
    dataset: &str,
    test_len: usize,
    limit: u64,
    runs: &[(&str, &GuessSetSummary)],
) -> Result<CompareReport> {
    if runs.len() < 2 {
        return Err(Error::Config(format!(
            "compare needs at least two models, got {}",
            runs.len()
        )));
    }
    let mut seen = HashSet::new();
    if let Some((dup, _)) = runs.iter().find(|(n, _)| !seen.insert(*n)) {
        return Err(Error::Config(format!("model name {dup:?} is used twice")));
    }
    let models: Vec<String> = runs.iter().map(|(n, _)| n.to_string()).collect();
    let mut jaccard = PairMatrix {
        models,
        cells: BTreeMap::new(),
    };
    let mut mergeability = jaccard.clone();
    for &(a, ra) in runs {
        for &(b, rb) in runs {
            let j = jaccard_cell(&ra.generated, &rb.generated).ok();
            jaccard
                .cells
                .entry(a.to_owned())
                .or_default()
                .insert(b.to_owned(), j);
            let m = mergeability_cell(&ra.matched, &rb.matched);
            if m.is_none() && a < b {
                warn!("mergeability of {a} and {b} on {dataset} is undefined: neither matched anything");
            }
            mergeability
                .cells
                .entry(a.to_owned())
                .or_default()
                .insert(b.to_owned(), m);
        }
    }
    let sets: Vec<(String, &HashSet<String>)> = runs
        .iter()
        .map(|(n, r)| (n.to_string(), &r.matched))
        .collect();
    Ok(CompareReport {
        schema_version: crate::SCHEMA_VERSION,
        dataset: dataset.to_owned(),
        limit,
        matched: runs
            .iter()
            .map(|(n, r)| (n.to_string(), r.matched.len()))
            .collect(),
        jaccard,
        mergeability,
        multimodel: multi_model_select(&sets, test_len)?,
    })
}

pub fn compare(args: &CompareArgs, out: &Output) -> Result<()> {
    let total = args.guesses.len() + args.model.len();
    if total < 2 {
        return Err(Error::Config(format!(
            "compare needs at least two models (--guesses NAME=PATH or --model), got {total}"
        )));
    }
    let split = SplitCorpus::load_from_member(&args.test)?;
    let cps = Checkpoints::new(vec![args.limit])?;
    let mut runs = Vec::with_capacity(total);
    for (name, path) in &args.guesses {
        let mut stream = open_external_stream(path, args.dedupe)?.with_name(name);
        runs.push((name.clone(), run_match(&mut stream, &split, &cps)?));
    }
    for kind in &args.model {
        let spec = kind.spec(&args.markov)?;
        let model = spec.train(split.train(), split.vocab())?;
        runs.push((
            spec.label().to_owned(),
            run_match(&mut model.guesses(args.limit), &split, &cps)?,
        ));
    }
    let refs: Vec<(&str, &GuessSetSummary)> =
        runs.iter().map(|(n, o)| (n.as_str(), &o.summary)).collect();
    let report = compare_runs(split.name(), split.test_len(), args.limit, &refs)?;
    if out.format.csv() {
        out.write("jaccard.csv", &report.jaccard.to_csv()?)?;
        out.write("mergeability.csv", &report.mergeability.to_csv()?)?;
    }
    if out.format.json() {
        out.write_json("compare.json", &report)?;
    }
    out.write("multimodel.json", &json_bytes(&report.multimodel)?)?;
    println!("models\tcumulative_pct\tgain_pct");
    for step in &report.multimodel {
        println!(
            "{}\t{:.4}\t{:.4}",
            step.models.join("+"),
            step.cumulative_pct,
            step.gain_pct
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_from_paths() {
        assert_eq!(split_name(Path::new("d/rock.train.txt")), "rock");
        assert_eq!(split_name(Path::new("d/rock.test.txt")), "rock");
        assert_eq!(split_name(Path::new("fla.txt")), "fla");
        assert_eq!(split_name(Path::new("x/a.pcfg.json")), "a");
    }

    #[test]
    fn named_paths() {
        assert_eq!(
            parse_named_path("m=a/b.txt").unwrap(),
            ("m".into(), PathBuf::from("a/b.txt"))
        );
        assert!(parse_named_path("novalue").is_err());
        assert!(parse_named_path("=x").is_err());
    }

    #[test]
    fn keyed_table() {
        let map = BTreeMap::from([(3usize, 50.0), (4, 25.5)]);
        assert_eq!(
            keyed_csv("length", &map).unwrap(),
            b"length,pct\n3,50\n4,25.5\n"
        );
    }
}
