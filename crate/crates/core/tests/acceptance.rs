//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach stdout.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use passbench::analysis::{
    frequency_spectrum, zipf_fit, LengthDistribution, DEFAULT_SPECTRUM_MIN_COUNT,
};
use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, SplitCorpus, Vocabulary};
use passbench::eval::{marginal_gain, run_match, Checkpoints, MatchOutcome};
use passbench::metrics::{
    builtin_distances, humanness_normalize, jaccard_cell, jaccard_index, length_jsd,
    mergeability_cell, mergeability_index, multi_model_select, GuessSetSummary,
};
use passbench::models::{
    enumerate_markov, enumerate_pcfg, random_baseline, train_markov, train_pcfg, MarkovConfig,
    NativeSpec, SliceGuesses,
};
use passbench::rng::SeededRng;
use passbench::synthetic::{zipf_corpus, SyntheticConfig};

struct Verdict {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Verdict {
    Verdict {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Verdict {
    Verdict {
        ok: false,
        detail: detail.into(),
    }
}

/// Runs one criterion, folds its time budget into the verdict and prints
/// the result line.
fn criterion(id: u32, title: &str, budget: Duration, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = body();
    let took = start.elapsed();
    let in_time = took <= budget;
    let ok = v.ok && in_time;
    println!(
        "criterion {id} [{}] {title}: {}; {:.2}s of {}s{}",
        if ok { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { " (over budget)" }
    );
    ok
}

// 1. Printed average density row to printed CDF row.
fn length_cdf_fixture() -> Verdict {
    let average = [2.60, 16.29, 13.63, 24.05, 14.19, 11.98, 5.93, 4.01, 7.32];
    let printed = [
        2.60, 18.90, 32.53, 56.58, 70.77, 82.75, 88.68, 92.68, 100.00,
    ];
    let masses: BTreeMap<usize, f64> = (4..=12).zip(average).collect();
    let dist = match LengthDistribution::from_masses(&masses) {
        Ok(d) => d,
        Err(e) => return fail(format!("error {e}")),
    };
    let worst = dist
        .cdf
        .values()
        .zip(printed)
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    let line: Vec<String> = dist.cdf.values().map(|v| format!("{v:.2}")).collect();
    let detail = format!("cdf {} (max |diff| {worst:.4})", line.join(" "));
    if worst <= 0.01 + 1e-9 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn random_set(rng: &mut ChaCha8Rng, universe: &[String]) -> BTreeSet<String> {
    let n = rng.random_range(0..=20);
    (0..n)
        .map(|_| universe[rng.random_range(0..universe.len())].clone())
        .collect()
}

fn hashset(s: &BTreeSet<String>) -> HashSet<String> {
    s.iter().cloned().collect()
}

// 2. Jaccard and mergeability against explicit set arithmetic.
fn set_metrics_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let universe: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    let mut checked = 0;
    for trial in 0..1000 {
        let datasets = rng.random_range(1..=3);
        let mut sums = (Vec::new(), Vec::new());
        let mut expected_j = Vec::new();
        let mut expected_m = Vec::new();
        for _ in 0..datasets {
            let (ga, gb) = (
                random_set(&mut rng, &universe),
                random_set(&mut rng, &universe),
            );
            let (ma, mb) = (
                random_set(&mut rng, &universe),
                random_set(&mut rng, &universe),
            );
            let inter = ga.intersection(&gb).count();
            let union = ga.union(&gb).count();
            let j = (union > 0).then(|| inter as f64 / union as f64);
            if jaccard_cell(&hashset(&ga), &hashset(&gb)).ok() != j {
                return fail(format!("trial {trial}: jaccard cell mismatch"));
            }
            expected_j.push(j);
            let big = ma.len().max(mb.len());
            let m = (big > 0).then(|| (ma.union(&mb).count() - big) as f64 / big as f64);
            if mergeability_cell(&hashset(&ma), &hashset(&mb)) != m {
                return fail(format!("trial {trial}: mergeability cell mismatch"));
            }
            expected_m.push(m);
            let summary = |g: &BTreeSet<String>, m: &BTreeSet<String>| GuessSetSummary {
                generated: hashset(g),
                matched: hashset(m),
                total_emitted: g.len() as u64,
            };
            sums.0.push(summary(&ga, &ma));
            sums.1.push(summary(&gb, &mb));
            checked += 2;
        }
        let a: Vec<&GuessSetSummary> = sums.0.iter().collect();
        let b: Vec<&GuessSetSummary> = sums.1.iter().collect();
        let want_j = if expected_j.iter().all(Option::is_some) {
            Some(expected_j.iter().flatten().sum::<f64>() / datasets as f64)
        } else {
            None
        };
        if jaccard_index(&a, &b).ok() != want_j {
            return fail(format!("trial {trial}: jaccard index mismatch"));
        }
        let defined: Vec<f64> = expected_m.iter().flatten().copied().collect();
        let want_m =
            (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        match mergeability_index(&a, &b) {
            Ok(got) if got.mean == want_m && got.cells == expected_m => {}
            other => {
                return fail(format!(
                    "trial {trial}: mergeability index mismatch {other:?}"
                ))
            }
        }
    }
    pass(format!("1000 trials, {checked} cells, all exact"))
}

fn level(count: u64, total: u64, cfg: &MarkovConfig) -> u32 {
    let p = count as f64 / total as f64;
    (-p.ln() / cfg.level_base.ln())
        .floor()
        .clamp(0.0, (cfg.level_count - 1) as f64) as u32
}

/// Exhaustive (level sum, length, string) order recomputed from raw counts.
fn markov_oracle(train: &[String], cfg: &MarkovConfig, alphabet: &[char]) -> Vec<(String, u32)> {
    let ctx = cfg.order - 1;
    let mut starts: HashMap<String, u64> = HashMap::new();
    let mut lengths: HashMap<usize, u64> = HashMap::new();
    let mut trans: HashMap<String, HashMap<char, u64>> = HashMap::new();
    for p in train {
        let chars: Vec<char> = p.chars().collect();
        *starts
            .entry(chars[..ctx.min(chars.len())].iter().collect())
            .or_default() += 1;
        *lengths.entry(chars.len()).or_default() += 1;
        for i in ctx..chars.len() {
            let key: String = chars[i - ctx..i].iter().collect();
            *trans.entry(key).or_default().entry(chars[i]).or_default() += 1;
        }
    }
    let total = train.len() as u64;
    let mut all = Vec::new();
    let mut frontier = vec![String::new()];
    for _ in 0..4 {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let mut scored = Vec::new();
    'candidates: for s in all {
        let chars: Vec<char> = s.chars().collect();
        let key: String = chars[..ctx.min(chars.len())].iter().collect();
        let (Some(&sc), Some(&lc)) = (starts.get(&key), lengths.get(&chars.len())) else {
            continue;
        };
        let mut score = level(sc, total, cfg) + level(lc, total, cfg);
        for i in ctx..chars.len() {
            let k: String = chars[i - ctx..i].iter().collect();
            let Some(row) = trans.get(&k) else {
                continue 'candidates;
            };
            let Some(&c) = row.get(&chars[i]) else {
                continue 'candidates;
            };
            score += level(c, row.values().sum(), cfg);
        }
        scored.push((s, score));
    }
    scored.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(a.0.len().cmp(&b.0.len()))
            .then(a.0.cmp(&b.0))
    });
    scored
}

// 3. Markov enumeration against exhaustive level-sum sorting.
fn markov_oracle_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pools = ["abc", "ab1", "a1!", "xyz", "01", "aZ"];
    let mut strings = 0;
    for trial in 0..200 {
        let pool: Vec<char> = pools[rng.random_range(0..pools.len())].chars().collect();
        let k = rng.random_range(1..=pool.len().min(3));
        let alphabet: Vec<char> = pool[..k].to_vec();
        let train: Vec<String> = (0..rng.random_range(1..=30))
            .map(|_| {
                let len = rng.random_range(1..=4);
                (0..len)
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                    .collect()
            })
            .collect();
        let cfg = MarkovConfig {
            order: rng.random_range(2..=5),
            level_count: rng.random_range(2..=11),
            level_base: [1.5, 2.0, 2.5, 3.0, 5.0][rng.random_range(0..5)],
        };
        let vocab = Vocabulary::new(&alphabet.iter().collect::<String>()).unwrap();
        let model = match train_markov(&train, &cfg, &vocab) {
            Ok(m) => m,
            Err(e) => return fail(format!("trial {trial}: training failed: {e}")),
        };
        let mut stream = enumerate_markov(&model, u64::MAX);
        let mut got = Vec::new();
        while let Some(item) = stream.next_with_level() {
            got.push(item);
        }
        let want = markov_oracle(&train, &cfg, &alphabet);
        if got != want {
            let at = got
                .iter()
                .zip(&want)
                .position(|(a, b)| a != b)
                .unwrap_or(got.len().min(want.len()));
            return fail(format!(
                "trial {trial}: {} emitted vs {} expected, first difference at {at}",
                got.len(),
                want.len()
            ));
        }
        strings += want.len();
    }
    pass(format!("200 trials, {strings} strings in identical order"))
}

fn class_of(c: char) -> u8 {
    if c.is_ascii_alphabetic() {
        0
    } else if c.is_ascii_digit() {
        1
    } else {
        2
    }
}

/// Maximal single-class runs as (class, text).
fn runs(p: &str) -> Vec<(u8, String)> {
    let mut out: Vec<(u8, String)> = Vec::new();
    for c in p.chars() {
        match out.last_mut() {
            Some((cls, text)) if *cls == class_of(c) => text.push(c),
            _ => out.push((class_of(c), c.to_string())),
        }
    }
    out
}

/// Every expansion with its probability from raw counts, sorted by
/// probability descending then string ascending.
fn pcfg_oracle(train: &[String]) -> Vec<(String, f64)> {
    type Slot = (u8, usize);
    let mut structures: BTreeMap<Vec<Slot>, u64> = BTreeMap::new();
    let mut terminals: BTreeMap<Slot, BTreeMap<String, u64>> = BTreeMap::new();
    for p in train {
        let r = runs(p);
        *structures
            .entry(r.iter().map(|(c, t)| (*c, t.len())).collect())
            .or_default() += 1;
        for (c, t) in r {
            *terminals
                .entry((c, t.len()))
                .or_default()
                .entry(t)
                .or_default() += 1;
        }
    }
    let total = train.len() as u64;
    let mut out = Vec::new();
    for (structure, count) in &structures {
        let mut partial: Vec<(String, f64)> = vec![(String::new(), *count as f64 / total as f64)];
        for slot in structure {
            let terms = &terminals[slot];
            let slot_total: u64 = terms.values().sum();
            partial = partial
                .into_iter()
                .flat_map(|(s, p)| {
                    terms
                        .iter()
                        .map(move |(t, c)| (format!("{s}{t}"), p * (*c as f64 / slot_total as f64)))
                })
                .collect();
        }
        out.extend(partial);
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

// 4. PCFG enumeration against brute force.
fn pcfg_oracle_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let classes = ["abZ", "0129", "!#"];
    let mut trials = 0;
    let mut strings = 0;
    while trials < 200 {
        let train: Vec<String> = (0..rng.random_range(1..=12))
            .map(|_| {
                let mut s = String::new();
                let mut last = usize::MAX;
                for _ in 0..rng.random_range(1..=3) {
                    let mut cls = rng.random_range(0..3);
                    if cls == last {
                        cls = (cls + 1) % 3;
                    }
                    last = cls;
                    let pool: Vec<char> = classes[cls].chars().collect();
                    for _ in 0..rng.random_range(1..=2) {
                        s.push(pool[rng.random_range(0..pool.len())]);
                    }
                }
                s
            })
            .collect();
        let model = train_pcfg(&train).unwrap();
        if model.expansion_count() > 100 {
            continue;
        }
        let mut stream = enumerate_pcfg(&model, u64::MAX);
        let mut got = Vec::new();
        while let Some(item) = stream.next_with_probability() {
            got.push(item);
        }
        let want = pcfg_oracle(&train);
        let distinct: HashSet<&String> = got.iter().map(|(s, _)| s).collect();
        if distinct.len() != got.len() {
            return fail(format!("trial {trials}: duplicate guesses"));
        }
        if got != want {
            let at = got
                .iter()
                .zip(&want)
                .position(|(a, b)| a != b)
                .unwrap_or(got.len().min(want.len()));
            return fail(format!(
                "trial {trials}: {} emitted vs {} expected, first difference at {at}",
                got.len(),
                want.len()
            ));
        }
        strings += want.len();
        trials += 1;
    }
    pass(format!(
        "200 grammars, {strings} expansions, no duplicates or omissions"
    ))
}

// 5. Preprocessing invariants and byte-exact reruns.
fn preprocessing_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alphabet: Vec<char> = "abcXY019!@ é\u{7f}".chars().collect();
    let vocab = Vocabulary::default();
    let mut nonempty = 0;
    for trial in 0..500 {
        let pool: Vec<String> = (0..rng.random_range(1..=60))
            .map(|_| {
                let len = rng.random_range(0..=15);
                (0..len)
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                    .collect()
            })
            .collect();
        let lines: Vec<String> = (0..rng.random_range(1..=200))
            .map(|_| pool[rng.random_range(0..pool.len())].clone())
            .collect();
        let max_length = rng.random_range(1..=14);
        let cfg = PreprocessConfig {
            max_length,
            min_length: rng.random_range(0..=max_length),
            split_ratio: rng.random_range(0.05..0.95),
            seed: rng.random(),
        };
        let raw = RawCorpus {
            lines: lines.clone(),
            source_name: "r".into(),
            invalid_lines: 0,
        };
        let admitted: Vec<&String> = lines.iter().filter(|p| cfg.admits(p, &vocab)).collect();
        let split = match preprocess(&raw, &cfg, &vocab) {
            Ok(s) => s,
            Err(passbench::Error::EmptyCorpus) if admitted.is_empty() => continue,
            Err(e) => return fail(format!("trial {trial}: {e}")),
        };
        nonempty += 1;
        let c = split.counts();
        let train: HashSet<&String> = split.train().iter().collect();
        if split.test_freq().keys().any(|p| train.contains(p)) {
            return fail(format!("trial {trial}: train and test intersect"));
        }
        let sound = |p: &String| {
            p.is_ascii()
                && p.len() >= cfg.min_length
                && p.len() <= cfg.max_length
                && p.chars().all(|ch| vocab.contains(ch))
        };
        if !split.train().iter().all(sound) || !split.test_freq().keys().all(sound) {
            return fail(format!("trial {trial}: an inadmissible password survived"));
        }
        let n = admitted.len();
        let cut = (cfg.split_ratio * n as f64).floor() as usize;
        let test_occurrences: u64 = split.test_freq().values().sum();
        let conserved = c.filtered == n
            && c.raw_train == cut
            && c.raw_test == n - cut
            && c.raw_train == c.train + c.overlap_removed
            && test_occurrences as usize == c.raw_test
            && c.test_unique == split.test_len();
        if !conserved {
            return fail(format!("trial {trial}: counts not conserved {c:?}"));
        }
        // The kept multiset plus removed train occurrences is the filtered multiset.
        let mut expected: BTreeMap<&str, u64> = BTreeMap::new();
        for p in &admitted {
            *expected.entry(p.as_str()).or_default() += 1;
        }
        let mut seen: BTreeMap<&str, u64> = BTreeMap::new();
        for p in split.train() {
            *seen.entry(p.as_str()).or_default() += 1;
        }
        for (p, k) in split.test_freq() {
            *seen.entry(p.as_str()).or_default() += k;
        }
        let removed: u64 = expected
            .iter()
            .map(|(p, &k)| k - seen.get(p).copied().unwrap_or(0).min(k))
            .sum();
        let over = seen
            .iter()
            .any(|(p, &k)| expected.get(p).copied().unwrap_or(0) < k);
        if over || removed as usize != c.overlap_removed {
            return fail(format!("trial {trial}: multiset not conserved"));
        }

        if trial % 10 == 0 {
            let dirs = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
            let again = preprocess(&raw, &cfg, &vocab).unwrap();
            split.save(dirs.0.path()).unwrap();
            again.save(dirs.1.path()).unwrap();
            for file in ["r.train.txt", "r.test.txt", "r.meta.json"] {
                let a = std::fs::read(dirs.0.path().join(file)).unwrap();
                let b = std::fs::read(dirs.1.path().join(file)).unwrap();
                if a != b {
                    return fail(format!("trial {trial}: rerun differs in {file}"));
                }
            }
        }
    }
    pass(format!("500 corpora ({nonempty} non-empty after filtering), all invariants hold, reruns byte-identical"))
}

/// State shared by the desk-scale criteria.
struct Desk {
    corpus: Vec<String>,
    split: SplitCorpus,
    runs: Vec<(String, Vec<String>, MatchOutcome)>,
}

fn desk_setup() -> Desk {
    let corpus = zipf_corpus(&SyntheticConfig::default()).unwrap();
    let raw = RawCorpus {
        lines: corpus.clone(),
        source_name: "zipf".into(),
        invalid_lines: 0,
    };
    let split = preprocess(&raw, &PreprocessConfig::default(), &Vocabulary::default()).unwrap();
    let cps = Checkpoints::desk_default();
    let mut runs = Vec::new();
    for spec in [
        NativeSpec::Markov(MarkovConfig::default()),
        NativeSpec::Pcfg,
    ] {
        let model = spec.train(split.train(), split.vocab()).unwrap();
        let guesses =
            passbench::models::take_guesses(&mut model.guesses(cps.last()), cps.last() as usize)
                .unwrap();
        let outcome =
            run_match(&mut SliceGuesses::new(spec.label(), &guesses), &split, &cps).unwrap();
        runs.push((spec.label().to_owned(), guesses, outcome));
    }
    Desk {
        corpus,
        split,
        runs,
    }
}

// 6. End-to-end desk benchmark.
fn desk_benchmark(desk: &Desk) -> Verdict {
    let cps = Checkpoints::desk_default();
    let fit = match zipf_fit(&frequency_spectrum(
        &desk.corpus,
        DEFAULT_SPECTRUM_MIN_COUNT,
    )) {
        Ok(f) => f,
        Err(e) => return fail(format!("zipf fit failed: {e}")),
    };
    let mut notes = vec![format!("zipf slope {:.3}", fit.slope)];
    let mut ok = (fit.slope + 1.0).abs() <= 0.1;
    for (name, _, outcome) in &desk.runs {
        let curve = &outcome.curve;
        let monotone = curve.len() == cps.as_slice().len()
            && !outcome.exhausted
            && curve.windows(2).all(|w| {
                w[0].matched_unique <= w[1].matched_unique && w[0].pct_weighted <= w[1].pct_weighted
            });
        let gains = marginal_gain(curve, &cps.consecutive_pairs()).unwrap();
        let rel: Vec<f64> = gains
            .iter()
            .map(|g| g.relative.unwrap_or(f64::NAN))
            .collect();
        let unsaturated = curve.last().is_some_and(|p| p.pct_unique < 100.0);
        let positive = rel.iter().all(|r| *r > 0.0);
        let decreasing = rel.len() == 3 && rel.windows(2).all(|w| w[0] > w[1]);
        ok &= monotone && unsaturated && positive && decreasing;
        notes.push(format!(
            "{name} {:.2}% at 1e6, relative gains {}",
            curve.last().map_or(0.0, |p| p.pct_unique),
            rel.iter()
                .map(|r| format!("{r:.1}"))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    let detail = notes.join("; ");
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn draw(items: &[String], n: usize, seed: u64) -> Vec<String> {
    let mut pool = items.to_vec();
    SeededRng::new(seed).shuffle(&mut pool);
    pool.truncate(n);
    pool
}

// 7. Humanness normalization.
fn humanness(desk: &Desk) -> Verdict {
    const N: usize = 10_000;
    let split = &desk.split;
    let test_all: Vec<String> = split.test_unique().map(String::from).collect();
    let test = draw(&test_all, N, 71);
    let shuffled_train = draw(split.train(), split.train().len(), 72);
    let (train_lower, train_probe) = shuffled_train.split_at(shuffled_train.len() / 2);
    let (train_lower, train_probe) = (
        &train_lower[..N.min(train_lower.len())],
        &train_probe[..N.min(train_probe.len())],
    );
    let random: Vec<String> = random_baseline(split.vocab(), 1, 12, 73, N as u64)
        .unwrap()
        .collect();

    let mut ok = true;
    let mut notes = Vec::new();
    for f in builtin_distances(split.vocab()) {
        let bounds = f.bounds(&test, train_lower, &random).unwrap();
        let probe = humanness_normalize(f.dist(&test, train_probe).unwrap(), &bounds).unwrap();
        let rand = humanness_normalize(f.dist(&test, &random).unwrap(), &bounds).unwrap();
        ok &= probe < 15.0 && (rand - 100.0).abs() <= 0.01;
        notes.push(format!("{} train {probe:.2} random {rand:.2}", f.name()));
    }
    let random_raw = length_jsd(&test, &random).unwrap();
    for (name, guesses, _) in &desk.runs {
        let generated = draw(guesses, N, 74);
        let raw = length_jsd(&test, &generated).unwrap();
        ok &= random_raw > raw;
        notes.push(format!(
            "length_jsd {name} {raw:.4} < random {random_raw:.4}"
        ));
    }
    let detail = notes.join("; ");
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

// 8. Multi-model composition.
fn composition(desk: &Desk) -> Verdict {
    let sets: Vec<(String, &HashSet<String>)> = desk
        .runs
        .iter()
        .map(|(n, _, o)| (n.clone(), &o.summary.matched))
        .collect();
    let (a, b) = (sets[0].1, sets[1].1);
    let union: HashSet<&String> = a.iter().chain(b.iter()).collect();
    let best = a.len().max(b.len());
    let contained = a.is_subset(b) || b.is_subset(a);
    let steps = multi_model_select(&sets, desk.split.test_len()).unwrap();
    let union_pct = 100.0 * union.len() as f64 / desk.split.test_len() as f64;
    let ok = union.len() >= best
        && (union.len() > best || contained)
        && (steps.last().unwrap().cumulative_pct - union_pct).abs() < 1e-9;
    let detail = format!(
        "markov {} pcfg {} union {} (+{:.2} points over the best single model)",
        a.len(),
        b.len(),
        union.len(),
        steps.last().unwrap().gain_pct
    );
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["passbench"];
    argv.extend_from_slice(args);
    passbench::cli::main_with_args(argv)
}

// 9. generate -> evaluate round trip through a guess file.
fn round_trip() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = |f: &str| d.join(f).to_string_lossy().into_owned();
    let corpus = zipf_corpus(&SyntheticConfig {
        population: 5_000,
        samples: 20_000,
        ..Default::default()
    })
    .unwrap();
    std::fs::write(d.join("site.txt"), corpus.join("\n") + "\n").unwrap();
    if cli(&[
        "preprocess",
        "--input",
        &p("site.txt"),
        "--output-dir",
        &p("splits"),
    ]) != 0
    {
        return fail("preprocess failed");
    }
    let (train, test) = (p("splits/site.train.txt"), p("splits/site.test.txt"));
    let (ext, native) = (p("ext"), p("native"));
    let mut notes = Vec::new();
    for model in ["pcfg", "markov"] {
        let guesses = p(&format!("{model}.txt"));
        let steps: [Vec<&str>; 3] = [
            vec![
                "generate", "--model", model, "--train", &train, "--limit", "1000", "-o", &guesses,
            ],
            vec![
                "evaluate",
                "--guesses",
                &guesses,
                "--test",
                &test,
                "--checkpoints",
                "10,100,1000",
                "--name",
                "x",
                "--output-dir",
                &ext,
            ],
            vec![
                "evaluate",
                "--model",
                model,
                "--train",
                &train,
                "--test",
                &test,
                "--checkpoints",
                "10,100,1000",
                "--name",
                "x",
                "--output-dir",
                &native,
            ],
        ];
        for s in &steps {
            if cli(s) != 0 {
                return fail(format!("{model}: `{}` failed", s[0]));
            }
        }
        let a = std::fs::read(Path::new(&p("ext/x.site.ledger.json"))).unwrap();
        let b = std::fs::read(Path::new(&p("native/x.site.ledger.json"))).unwrap();
        if a != b {
            return fail(format!("{model}: ledgers differ"));
        }
        let matched = serde_json::from_slice::<serde_json::Value>(&a).unwrap()["first_match_rank"]
            .as_object()
            .map_or(0, |m| m.len());
        notes.push(format!(
            "{model} ledger identical ({} bytes, {matched} matches)",
            a.len()
        ));
    }
    pass(notes.join("; "))
}

fn main() {
    let secs = Duration::from_secs;
    let mut results = vec![
        criterion(1, "length CDF fixture", secs(1), length_cdf_fixture),
        criterion(
            2,
            "jaccard/mergeability oracle",
            secs(5),
            set_metrics_oracle,
        ),
        criterion(
            3,
            "markov enumeration oracle",
            secs(30),
            markov_oracle_suite,
        ),
        criterion(4, "pcfg enumeration oracle", secs(30), pcfg_oracle_suite),
        criterion(5, "preprocessing invariants", secs(30), preprocessing_suite),
    ];
    let setup = Instant::now();
    let desk = desk_setup();
    let setup_time = setup.elapsed();
    results.push(criterion(
        6,
        "desk benchmark",
        secs(600) - setup_time,
        || {
            let mut v = desk_benchmark(&desk);
            v.detail = format!("{} (setup {:.2}s)", v.detail, setup_time.as_secs_f64());
            v
        },
    ));
    results.push(criterion(7, "humanness normalization", secs(60), || {
        humanness(&desk)
    }));
    results.push(criterion(8, "multi-model composition", secs(60), || {
        composition(&desk)
    }));
    results.push(criterion(
        9,
        "generate/evaluate round trip",
        secs(60),
        round_trip,
    ));
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
