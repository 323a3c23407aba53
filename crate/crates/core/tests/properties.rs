use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use proptest::prelude::*;

use passbench::analysis::{
    classify_patterns, frequency_spectrum, length_distribution, top_k, zipf_fit, FrequencySpectrum,
    PatternId,
};
use passbench::corpus::{preprocess, PreprocessConfig, RawCorpus, SplitCorpus, Vocabulary};
use passbench::eval::{breakdown_by_frequency, breakdown_by_length, run_match, Checkpoints};
use passbench::metrics::{
    humanness_normalize, jaccard_index, length_jsd, mergeability_index, multi_model_select,
    ngram_jsd, pattern_jsd, BaselineBounds, GuessSetSummary,
};
use passbench::models::{
    enumerate_markov, enumerate_pcfg, train_markov, train_pcfg, MarkovConfig, SliceGuesses,
};

fn password(chars: &'static str, max: usize) -> impl Strategy<Value = String> {
    let pool: Vec<char> = chars.chars().collect();
    prop::collection::vec(prop::sample::select(pool), 1..=max).prop_map(|v| v.into_iter().collect())
}

fn rule(set: passbench::analysis::PatternSet, i: u8) -> bool {
    set.contains(PatternId::new(i).unwrap())
}

fn split_of(train: Vec<String>, test: &[String]) -> SplitCorpus {
    let mut freq = BTreeMap::new();
    for p in test {
        *freq.entry(p.clone()).or_insert(0u64) += 1;
    }
    let train = train
        .into_iter()
        .filter(|p| !freq.contains_key(p))
        .collect();
    SplitCorpus::from_parts(
        "p",
        train,
        freq,
        PreprocessConfig::default(),
        Vocabulary::default(),
    )
    .unwrap()
}

fn summary(generated: &BTreeSet<String>, matched: &BTreeSet<String>) -> GuessSetSummary {
    GuessSetSummary {
        generated: generated.iter().cloned().collect(),
        matched: matched.iter().cloned().collect(),
        total_emitted: generated.len() as u64,
    }
}

type Distance<'a> = dyn Fn(&[String], &[String]) -> f64 + 'a;

fn small_set() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(password("abc", 2), 0..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn splits_are_disjoint_sound_and_conserved(
        lines in prop::collection::vec(password("ab1!Zé\t ", 6), 1..80),
        max_length in 1usize..7,
        min_length in 0usize..4,
        split_ratio in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let cfg = PreprocessConfig { max_length, min_length: min_length.min(max_length), split_ratio, seed };
        let vocab = Vocabulary::default();
        let raw = RawCorpus { lines, source_name: "p".into(), invalid_lines: 0 };
        let n = raw.lines.iter().filter(|p| cfg.admits(p, &vocab)).count();
        let split = match preprocess(&raw, &cfg, &vocab) {
            Err(passbench::Error::EmptyCorpus) => { prop_assert_eq!(n, 0); return Ok(()); }
            other => other.unwrap(),
        };
        let test: HashSet<&String> = split.test_freq().keys().collect();
        prop_assert!(split.train().iter().all(|p| !test.contains(p)));
        for p in split.train().iter().chain(split.test_freq().keys()) {
            prop_assert!(p.chars().all(|c| vocab.contains(c)));
            prop_assert!((cfg.min_length..=cfg.max_length).contains(&p.len()));
        }
        let c = split.counts();
        let raw_test: u64 = split.test_freq().values().sum();
        prop_assert_eq!(c.filtered, n);
        prop_assert_eq!(c.filtered, c.raw_train + raw_test as usize);
        prop_assert_eq!(c.raw_train, (split_ratio * n as f64).floor() as usize);
        prop_assert_eq!(preprocess(&raw, &cfg, &vocab).unwrap(), split);
    }

    #[test]
    fn resplitting_the_union_is_deterministic(
        lines in prop::collection::vec(password("abc12", 5), 2..60),
        seed in any::<u64>(),
    ) {
        let cfg = PreprocessConfig { seed, ..Default::default() };
        let vocab = Vocabulary::default();
        let raw = RawCorpus { lines, source_name: "p".into(), invalid_lines: 0 };
        let split = preprocess(&raw, &cfg, &vocab).unwrap();
        let mut union = split.train().to_vec();
        for (p, &k) in split.test_freq() {
            union.extend(std::iter::repeat_n(p.clone(), k as usize));
        }
        let again = RawCorpus { lines: union, source_name: "p".into(), invalid_lines: 0 };
        prop_assert_eq!(preprocess(&again, &cfg, &vocab).unwrap(), preprocess(&again, &cfg, &vocab).unwrap());
    }

    #[test]
    fn whole_string_patterns_cover_every_password(p in password("aZ0!@#qR7", 10)) {
        let set = classify_patterns(&p, &Vocabulary::default()).unwrap();
        prop_assert!([1, 4, 5, 6, 7, 8, 9].iter().any(|&i| rule(set, i)));
        let lower = p.chars().any(|c| c.is_ascii_lowercase());
        let upper = p.chars().any(|c| c.is_ascii_uppercase());
        let letters_only = p.chars().all(|c| c.is_ascii_alphabetic());
        prop_assert_eq!(rule(set, 1) && !rule(set, 2) && !rule(set, 3), letters_only && lower && upper);
        prop_assert!(!rule(set, 2) || rule(set, 1));
        prop_assert!(!rule(set, 3) || rule(set, 1));
        prop_assert_eq!(rule(set, 18), p.ends_with('!'));
        prop_assert_eq!(rule(set, 19), p.ends_with('1'));
    }

    #[test]
    fn length_cdf_is_prefix_sum(passwords in prop::collection::vec(password("ab", 9), 1..50)) {
        let d = length_distribution(&passwords).unwrap();
        let mut running = 0.0;
        for (len, pct) in &d.pct_by_length {
            running += pct;
            prop_assert!((d.cdf[len] - running).abs() < 1e-9);
        }
        prop_assert!((running - 100.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_top_k_is_a_ranked_permutation(passwords in prop::collection::vec(password("abc", 3), 0..60)) {
        let ranked = top_k(&passwords, usize::MAX);
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for p in &passwords {
            *counts.entry(p).or_default() += 1;
        }
        prop_assert_eq!(ranked.len(), counts.len());
        for (p, c) in &ranked {
            prop_assert_eq!(counts[p.as_str()], *c);
        }
        prop_assert!(ranked.windows(2).all(|w| w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0)));
        let spectrum = frequency_spectrum(&passwords, 2);
        prop_assert!(spectrum.ranked.iter().all(|(_, c)| *c >= 2));
    }

    #[test]
    fn zipf_fit_recovers_exact_exponent(exponent in 0.5f64..2.0, ranks in 20usize..300) {
        let ranked = (1..=ranks)
            .map(|r| (format!("p{r}"), (1e9 * (r as f64).powf(-exponent)).round() as u64))
            .collect();
        let fit = zipf_fit(&FrequencySpectrum { ranked, min_count: 1 }).unwrap();
        prop_assert!((fit.slope + exponent).abs() <= 0.02 * exponent);
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn markov_streams_are_deterministic_and_within_support(
        train in prop::collection::vec(password("ab1", 5), 1..25),
        order in 2usize..5,
    ) {
        let cfg = MarkovConfig { order, ..Default::default() };
        let model = train_markov(&train, &cfg, &Vocabulary::new("ab1").unwrap()).unwrap();
        let collect = || {
            let mut s = enumerate_markov(&model, 5_000);
            std::iter::from_fn(move || s.next_with_level()).collect::<Vec<_>>()
        };
        let first = collect();
        prop_assert_eq!(&first, &collect());
        prop_assert!(first.windows(2).all(|w| w[0].1 <= w[1].1));
        for (p, level) in &first {
            prop_assert_eq!(model.level_sum(p), Some(*level));
        }
        if first.len() < 5_000 {
            let emitted: HashSet<&String> = first.iter().map(|(p, _)| p).collect();
            prop_assert!(train.iter().all(|p| emitted.contains(p)));
        }
    }

    #[test]
    fn pcfg_probabilities_are_normalized_and_non_increasing(
        train in prop::collection::vec(password("ab12!", 6), 1..25),
    ) {
        let model = train_pcfg(&train).unwrap();
        let total: f64 = model.structures().iter().map(|s| s.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for slot in model.slots() {
            let terms = model.terminals(slot);
            prop_assert!((terms.iter().map(|t| t.probability).sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let mut s = enumerate_pcfg(&model, 20_000);
        let emitted: Vec<(String, f64)> = std::iter::from_fn(|| s.next_with_probability()).collect();
        prop_assert!(emitted.windows(2).all(|w| w[0].1 >= w[1].1));
        let distinct: HashSet<&String> = emitted.iter().map(|(p, _)| p).collect();
        prop_assert_eq!(distinct.len(), emitted.len());
        if (emitted.len() as u128) < 20_000 {
            prop_assert_eq!(emitted.len() as u128, model.expansion_count());
            prop_assert!(train.iter().all(|p| distinct.contains(p)));
        }
    }

    #[test]
    fn match_ledger_replays_and_curves_are_monotone(
        train in prop::collection::vec(password("abc1", 4), 1..20),
        test in prop::collection::vec(password("abc1", 4), 1..40),
        guesses in prop::collection::vec(password("abc1", 4), 0..120),
    ) {
        let split = split_of(train, &test);
        let cps = Checkpoints::new(vec![5, 20, 60, 120]).unwrap();
        let outcome = run_match(&mut SliceGuesses::new("g", &guesses), &split, &cps).unwrap();
        let mut replay = BTreeMap::new();
        for (i, g) in guesses.iter().enumerate() {
            if split.freq(g) > 0 {
                replay.entry(g.clone()).or_insert(i as u64 + 1);
            }
        }
        prop_assert_eq!(&outcome.ledger.first_match_rank, &replay);
        let monotone = outcome.curve.windows(2).all(|w| {
            w[0].pct_unique <= w[1].pct_unique && w[0].pct_weighted <= w[1].pct_weighted
        });
        prop_assert!(monotone);
        prop_assert!(outcome.summary.matched.is_subset(&outcome.summary.generated));

        let at = outcome.ledger.guesses_consumed;
        if at == 0 {
            return Ok(());
        }
        let matched = outcome.ledger.matched_by(at) as f64;
        let by_len = breakdown_by_length(&outcome.ledger, &split, at).unwrap();
        let mut per_len: HashMap<usize, f64> = HashMap::new();
        for p in split.test_unique() {
            *per_len.entry(p.len()).or_default() += 1.0;
        }
        let recovered: f64 = by_len.iter().map(|(l, pct)| pct / 100.0 * per_len[l]).sum();
        prop_assert!((recovered - matched).abs() < 1e-6);
        if let Ok(by_freq) = breakdown_by_frequency(&outcome.ledger, &split, at) {
            use passbench::analysis::{frequency_buckets, Bucket};
            let buckets = frequency_buckets(&split).unwrap();
            let part = |b: Bucket| by_freq.get(&b).copied().unwrap_or(0.0) / 100.0 * buckets.get(b).len() as f64;
            prop_assert!((part(Bucket::Top10) + part(Bucket::Bottom90) - matched).abs() < 1e-6);
        }
    }

    #[test]
    fn weighted_equals_unique_for_singleton_frequencies(
        test in prop::collection::btree_set(password("ab1", 4), 1..30),
        guesses in prop::collection::vec(password("ab1", 4), 1..60),
    ) {
        let test: Vec<String> = test.into_iter().collect();
        let split = split_of(Vec::new(), &test);
        let cps = Checkpoints::new(vec![10, 60]).unwrap();
        let outcome = run_match(&mut SliceGuesses::new("g", &guesses), &split, &cps).unwrap();
        for p in &outcome.curve {
            prop_assert!((p.pct_unique - p.pct_weighted).abs() < 1e-9);
        }
    }

    #[test]
    fn overlap_metrics_are_symmetric(
        ga in small_set(), gb in small_set(), ma in small_set(), mb in small_set(),
    ) {
        prop_assume!(!ga.is_empty() && !gb.is_empty());
        let (a, b) = (summary(&ga, &ma), summary(&gb, &mb));
        prop_assert_eq!(jaccard_index(&[&a], &[&b]).unwrap(), jaccard_index(&[&b], &[&a]).unwrap());
        prop_assert_eq!(jaccard_index(&[&a], &[&a]).unwrap(), 1.0);
        let ab = mergeability_index(&[&a], &[&b]).unwrap().mean;
        prop_assert_eq!(ab, mergeability_index(&[&b], &[&a]).unwrap().mean);
        prop_assert!(ab.is_none_or(|v| v >= 0.0));
        let own = mergeability_index(&[&a], &[&a]).unwrap().mean;
        prop_assert!(own.is_none_or(|v| v == 0.0));
    }

    #[test]
    fn greedy_selection_is_optimal_at_the_top_two_sizes(
        sets in prop::collection::vec(prop::collection::btree_set(0u8..12, 0..8), 1..=4),
    ) {
        let sets: Vec<HashSet<String>> =
            sets.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect();
        let models: Vec<(String, &HashSet<String>)> =
            sets.iter().enumerate().map(|(i, s)| (format!("m{i}"), s)).collect();
        let steps = multi_model_select(&models, 12).unwrap();
        let k = sets.len();
        prop_assert_eq!(steps.len(), k);
        let best = |size: usize| {
            (0u32..1 << k)
                .filter(|mask| mask.count_ones() as usize == size)
                .map(|mask| {
                    let u: HashSet<&String> = (0..k).filter(|i| mask & (1 << i) != 0).flat_map(|i| &sets[i]).collect();
                    100.0 * u.len() as f64 / 12.0
                })
                .fold(0.0, f64::max)
        };
        prop_assert!((steps[k - 1].cumulative_pct - best(k)).abs() < 1e-9);
        if k >= 2 {
            prop_assert!(steps[k - 2].cumulative_pct >= best(k - 1) - 1e-9);
        }
    }

    #[test]
    fn humanness_normalization_is_affine_invariant(
        d in -5.0f64..5.0, lower in -3.0f64..3.0, width in 0.1f64..4.0,
        alpha in 0.1f64..10.0, beta in -10.0f64..10.0,
    ) {
        let bounds = BaselineBounds { distance: "d".into(), lower, upper: lower + width };
        let moved = BaselineBounds { distance: "d".into(), lower: alpha * lower + beta, upper: alpha * (lower + width) + beta };
        let x = humanness_normalize(d, &bounds).unwrap();
        let y = humanness_normalize(alpha * d + beta, &moved).unwrap();
        prop_assert!((x - y).abs() < 1e-6 * (1.0 + x.abs()));
    }

    #[test]
    fn jsd_builtins_are_bounded_symmetric_and_zero_on_identity(
        a in prop::collection::vec(password("aB3!", 6), 1..30),
        b in prop::collection::vec(password("aB3!", 6), 1..30),
    ) {
        let vocab = Vocabulary::default();
        let fns: [&Distance; 3] = [
            &|x, y| length_jsd(x, y).unwrap(),
            &|x, y| ngram_jsd(x, y).unwrap(),
            &|x, y| pattern_jsd(x, y, &vocab).unwrap(),
        ];
        let mut doubled = a.clone();
        doubled.extend(a.iter().cloned());
        for f in fns {
            let ab = f(&a, &b);
            prop_assert!((0.0..=std::f64::consts::LN_2).contains(&ab));
            prop_assert!((ab - f(&b, &a)).abs() < 1e-12);
            prop_assert!(f(&a, &a).abs() < 1e-12);
            prop_assert!(f(&a, &doubled).abs() < 1e-12);
        }
    }
}

#[test]
fn disjoint_lengths_reach_ln2() {
    let a = vec!["ab".to_string()];
    let b = vec!["abc".to_string()];
    assert!((length_jsd(&a, &b).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
}
