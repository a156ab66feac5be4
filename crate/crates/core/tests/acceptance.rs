//! Acceptance suite: one test per release criterion, each printing a PASS
//! line on success. Criterion 4 (KPTimes / KP20k reproduction) needs the
//! public datasets on disk and is skipped with a SKIP line when the
//! `GRAPHITE_KPTIMES_TRAIN` / `GRAPHITE_KPTIMES_TEST` environment variables
//! are unset; see the README for how to provide them.

mod common;

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphite_core::corpus::{encode, load_jsonl, RawSample};
use graphite_core::inference::{
    self, explain, gather_candidates, predict, predict_batch, predict_batch_ids,
    rank_candidates, retrieve_instances, InferenceConfig, RankingStrategy, ScratchSpace,
};
use graphite_core::metrics::{evaluate, truth_sets};
use graphite_core::model::{build_model, GraphiteModel};
use graphite_core::oracle::oracle_predict;
use graphite_core::synth::{generate, SynthConfig};

use common::{figure_samples, random_corpus, random_query};

fn build(samples: &[RawSample]) -> GraphiteModel {
    build_model(encode(samples).unwrap()).unwrap()
}

/// Criterion 1: synthetic perfect recovery. Reduced-scale twin dataset,
/// trained and evaluated end to end; P@1, P@5, and AVP must equal 1.0
/// exactly.
#[test]
fn criterion_1_synthetic_perfect_recovery() {
    let started = Instant::now();
    let config = SynthConfig {
        train_n: 50_000,
        test_n: 1_000,
        valid_n: 0,
        label_n: 20_000,
        title_len: 10,
        labels_per: 10,
        seed: 20_240_101,
    };
    let data = generate(&config).unwrap();
    let model = build(&data.train);

    let truths = truth_sets(&model, &data.test);
    let titles: Vec<String> = data.test.iter().map(|s| s.title.clone()).collect();
    let infer = InferenceConfig {
        k: 10,
        ..Default::default()
    };
    let preds = predict_batch_ids(&model, &titles, &infer, 8);
    let report = evaluate(&truths, &preds, &[1, 5]).unwrap();

    assert_eq!(report.precision_at[&1], 1.0, "P@1 must be exactly 1.0");
    assert_eq!(report.precision_at[&5], 1.0, "P@5 must be exactly 1.0");
    assert_eq!(report.avp, 1.0, "AVP must be exactly 1.0");
    println!(
        "PASS criterion 1: synthetic perfect recovery (P@1 = P@5 = AVP = 1.0, {:.1}s)",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 2: oracle equivalence. 500 randomized trials, unbounded
/// instance budget, all five ranking strategies, k in {1, 5, 10}: the fast
/// path must equal the brute-force oracle list-exactly.
#[test]
fn criterion_2_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ks = [1usize, 5, 10];
    for trial in 0..500 {
        let corpus = random_corpus(&mut rng);
        let dataset = encode(&corpus.samples).unwrap();
        let model = build_model(dataset.clone()).unwrap();
        let query = random_query(&mut rng, &corpus.pool);
        for strategy in RankingStrategy::ALL {
            for k in ks {
                let config = InferenceConfig {
                    k,
                    instance_budget: usize::MAX,
                    strategy,
                };
                let fast = predict(&model, &query, &config);
                let slow = oracle_predict(&dataset, &query, k, strategy);
                assert_eq!(
                    fast, slow,
                    "trial {trial}: strategy {strategy}, k {k}, query {query:?}"
                );
            }
        }
    }
    println!("PASS criterion 2: oracle equivalence (500 trials x 5 strategies x 3 ks, 0 mismatches)");
}

/// Criterion 3: the worked four-item example. The oracle certifies the
/// expected ranking first; the engine must reproduce it exactly.
#[test]
fn criterion_3_figure_example() {
    let expected = vec![
        "iphone 13 pro".to_owned(),
        "black phone".to_owned(),
        "iphone 12 pro".to_owned(),
        "grey phone".to_owned(),
    ];
    let samples = figure_samples();
    let dataset = encode(&samples).unwrap();
    assert_eq!(
        oracle_predict(&dataset, "black iphone 13", 4, RankingStrategy::Default),
        expected,
        "oracle disagrees with the hand-derived ranking"
    );
    let model = build_model(dataset).unwrap();
    let config = InferenceConfig {
        k: 4,
        ..Default::default()
    };
    assert_eq!(predict(&model, "black iphone 13", &config), expected);
    println!("PASS criterion 3: worked example ranking (oracle-certified)");
}

/// Criterion 4: KPTimes reproduction at desk scale, gated on the dataset
/// being provided via environment variables.
#[test]
fn criterion_4_public_dataset_reproduction() {
    let train_path = std::env::var("GRAPHITE_KPTIMES_TRAIN").ok();
    let test_path = std::env::var("GRAPHITE_KPTIMES_TEST").ok();
    let (Some(train_path), Some(test_path)) = (train_path, test_path) else {
        println!(
            "SKIP criterion 4: set GRAPHITE_KPTIMES_TRAIN and GRAPHITE_KPTIMES_TEST to \
             the converted KPTimes JSONL files to run this criterion"
        );
        return;
    };

    let expectations = PublicDatasetExpectation {
        name: "KPTimes",
        p1: (0.41, 0.04),
        p10: Some((0.14, 0.03)),
        r10: Some((0.27, 0.04)),
        avp: Some((0.22, 0.04)),
    };
    run_public_dataset(&train_path, &test_path, &expectations);

    if let (Ok(kp20k_train), Ok(kp20k_test)) = (
        std::env::var("GRAPHITE_KP20K_TRAIN"),
        std::env::var("GRAPHITE_KP20K_TEST"),
    ) {
        let expectations = PublicDatasetExpectation {
            name: "KP20k",
            p1: (0.28, 0.05),
            p10: None,
            r10: None,
            avp: None,
        };
        run_public_dataset(&kp20k_train, &kp20k_test, &expectations);
    }
}

struct PublicDatasetExpectation {
    name: &'static str,
    p1: (f64, f64),
    p10: Option<(f64, f64)>,
    r10: Option<(f64, f64)>,
    avp: Option<(f64, f64)>,
}

fn run_public_dataset(train_path: &str, test_path: &str, exp: &PublicDatasetExpectation) {
    let train = load_jsonl(train_path).unwrap();
    let test = load_jsonl(test_path).unwrap();

    let train_start = Instant::now();
    let model = build(&train);
    let train_secs = train_start.elapsed().as_secs_f64();
    assert!(
        train_secs < 300.0,
        "{}: training took {train_secs:.1}s (budget 300s)",
        exp.name
    );

    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.gx");
    model.save(&model_path).unwrap();
    let size = std::fs::metadata(&model_path).unwrap().len();
    assert!(
        size < 100 * 1024 * 1024,
        "{}: model is {size} bytes on disk (budget 100 MB)",
        exp.name
    );

    let titles: Vec<String> = test.iter().map(|s| s.title.clone()).collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(8)
        .max(8);
    let config = InferenceConfig {
        k: 10,
        ..Default::default()
    };
    let infer_start = Instant::now();
    let preds = predict_batch_ids(&model, &titles, &config, workers);
    let per_sample_ms = infer_start.elapsed().as_secs_f64() * 1000.0 / titles.len() as f64;
    assert!(
        per_sample_ms < 1.0,
        "{}: amortized inference {per_sample_ms:.3} ms/sample (budget 1 ms)",
        exp.name
    );

    let truths = truth_sets(&model, &test);
    let report = evaluate(&truths, &preds, &[1, 5, 10]).unwrap();
    let check = |metric: &str, actual: f64, (target, tol): (f64, f64)| {
        assert!(
            (actual - target).abs() <= tol,
            "{}: {metric} = {actual:.4}, expected {target} +/- {tol}",
            exp.name
        );
    };
    check("P@1", report.precision_at[&1], exp.p1);
    if let Some(p10) = exp.p10 {
        check("P@10", report.precision_at[&10], p10);
    }
    if let Some(r10) = exp.r10 {
        check("R@10", report.recall_at[&10], r10);
    }
    if let Some(avp) = exp.avp {
        check("AVP", report.avp, avp);
    }
    println!(
        "PASS criterion 4: {} reproduction (P@1 {:.3}, P@10 {:.3}, R@10 {:.3}, AVP {:.3}, \
         train {:.1}s, {} bytes, {:.3} ms/sample)",
        exp.name,
        report.precision_at[&1],
        report.precision_at[&10],
        report.recall_at[&10],
        report.avp,
        train_secs,
        size,
        per_sample_ms
    );
}

/// Criterion 5: determinism and parallel safety. Identical output files for
/// 1, 4, and 16 workers over 10,000 titles; byte-identical model builds;
/// byte-identical save/load/re-save.
#[test]
fn criterion_5_determinism_and_parallel_safety() {
    let config = SynthConfig {
        train_n: 5_000,
        test_n: 10_000,
        valid_n: 0,
        label_n: 2_000,
        title_len: 10,
        labels_per: 10,
        seed: 555,
    };
    let data = generate(&config).unwrap();
    let model = build(&data.train);
    let titles: Vec<String> = data.test.iter().map(|s| s.title.clone()).collect();
    let infer = InferenceConfig {
        k: 10,
        ..Default::default()
    };

    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for workers in [1usize, 4, 16] {
        let preds = predict_batch(&model, &titles, &infer, workers);
        let mut out = Vec::new();
        for (title, predictions) in titles.iter().zip(&preds) {
            let line = serde_json::json!({ "title": title, "predictions": predictions });
            out.extend_from_slice(line.to_string().as_bytes());
            out.push(b'\n');
        }
        let path = dir.path().join(format!("preds_{workers}.jsonl"));
        std::fs::write(&path, &out).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1], "1 vs 4 workers differ");
    assert_eq!(files[0], files[2], "1 vs 16 workers differ");

    // Two independent builds of the same input are byte-identical.
    let rebuilt = build(&data.train);
    assert_eq!(model.to_bytes(), rebuilt.to_bytes());

    // Save, load, re-save: byte-identical.
    let model_path = dir.path().join("model.gx");
    model.save(&model_path).unwrap();
    let loaded = GraphiteModel::load(&model_path).unwrap();
    assert_eq!(std::fs::read(&model_path).unwrap(), loaded.to_bytes());

    println!("PASS criterion 5: determinism and parallel safety (10k titles x {{1,4,16}} workers)");
}

/// Criterion 6: invariant suite, each invariant over >= 200 random cases.
#[test]
fn criterion_6_invariant_suite() {
    permutation_invariance(200);
    wmr_bounds(300);
    tier_monotonicity(200);
    budget_monotonicity(200);
    duplication_scaling_neutrality(200);
    recall_monotonicity(200);
    println!("PASS criterion 6: invariant suite (6 invariants x >=200 cases)");
}

fn shuffle_words(rng: &mut ChaCha8Rng, title: &str) -> String {
    use rand::seq::SliceRandom;
    let mut words: Vec<&str> = title.split_whitespace().collect();
    words.shuffle(rng);
    words.join(" ")
}

fn permutation_invariance(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..cases {
        let corpus = random_corpus(&mut rng);
        let model = build(&corpus.samples);
        let query = random_query(&mut rng, &corpus.pool);
        let shuffled = shuffle_words(&mut rng, &query);
        let config = InferenceConfig::default();
        assert_eq!(
            predict(&model, &query, &config),
            predict(&model, &shuffled, &config),
            "query {query:?} vs {shuffled:?}"
        );
    }
}

fn wmr_bounds(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..cases {
        let t: Vec<u32> = (0..rng.random_range(0..10))
            .map(|_| rng.random_range(0..20))
            .collect();
        let l: Vec<u32> = (0..rng.random_range(1..6))
            .map(|_| rng.random_range(0..20))
            .collect();
        let value = inference::wmr(&t, &l);
        assert!((0.0..=1.0).contains(&value), "wmr({t:?}, {l:?}) = {value}");
        let t_set: HashSet<u32> = t.iter().copied().collect();
        let covered = l.iter().all(|w| t_set.contains(w));
        assert_eq!(value == 1.0, covered, "wmr({t:?}, {l:?}) = {value}");
    }
}

fn tier_monotonicity(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..cases {
        let corpus = random_corpus(&mut rng);
        let model = build(&corpus.samples);
        let query = random_query(&mut rng, &corpus.pool);
        let config = InferenceConfig::default();
        let t = model.encode_title(&query);
        let mut scratch = ScratchSpace::for_model(&model);
        let retrieved = retrieve_instances(&model, &t, &config, &mut scratch);
        let candidates = gather_candidates(&model, &retrieved, &t, &config);
        let ranked = rank_candidates(candidates, &config);
        assert!(
            ranked.windows(2).all(|w| w[0].similarity >= w[1].similarity),
            "similarities increase along the output for {query:?}"
        );
    }
}

fn budget_monotonicity(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..cases {
        let corpus = random_corpus(&mut rng);
        let model = build(&corpus.samples);
        let query = random_query(&mut rng, &corpus.pool);
        let t = model.encode_title(&query);
        let small = rng.random_range(1..=5);
        let large = small + rng.random_range(1..=30);
        let top_tier_labels = |budget: usize| -> HashSet<u32> {
            let config = InferenceConfig {
                k: usize::MAX / 2,
                instance_budget: budget,
                strategy: RankingStrategy::Default,
            };
            let mut scratch = ScratchSpace::for_model(&model);
            let retrieved = retrieve_instances(&model, &t, &config, &mut scratch);
            let candidates = gather_candidates(&model, &retrieved, &t, &config);
            let ranked = rank_candidates(candidates, &config);
            let Some(max_sim) = ranked.first().map(|c| c.similarity) else {
                return HashSet::new();
            };
            ranked
                .iter()
                .take_while(|c| c.similarity == max_sim)
                .map(|c| c.label)
                .collect()
        };
        let with_small = top_tier_labels(small);
        let with_large = top_tier_labels(large);
        assert!(
            with_small.is_subset(&with_large),
            "raising the budget {small}->{large} removed top-tier labels for {query:?}"
        );
    }
}

fn duplication_scaling_neutrality(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    for _ in 0..cases {
        let corpus = random_corpus(&mut rng);
        let doubled: Vec<RawSample> = corpus
            .samples
            .iter()
            .chain(corpus.samples.iter())
            .cloned()
            .collect();
        let model = build(&corpus.samples);
        let model2 = build(&doubled);
        let query = random_query(&mut rng, &corpus.pool);
        // Unbounded budget: tier sizes double, so a finite budget could cut
        // at a different tier.
        let config = InferenceConfig {
            k: 10,
            instance_budget: usize::MAX,
            strategy: RankingStrategy::Default,
        };
        assert_eq!(
            predict(&model, &query, &config),
            predict(&model2, &query, &config),
            "duplication changed the ranking for {query:?}"
        );

        let t = model.encode_title(&query);
        let mut scratch = ScratchSpace::for_model(&model);
        let retrieved = retrieve_instances(&model, &t, &config, &mut scratch);
        let single = gather_candidates(&model, &retrieved, &t, &config);
        let t2 = model2.encode_title(&query);
        let mut scratch2 = ScratchSpace::for_model(&model2);
        let retrieved2 = retrieve_instances(&model2, &t2, &config, &mut scratch2);
        let double = gather_candidates(&model2, &retrieved2, &t2, &config);
        let mult_of = |cands: &[graphite_core::Candidate], label: u32| {
            cands.iter().find(|c| c.label == label).map(|c| c.multiplicity)
        };
        assert_eq!(single.len(), double.len());
        for c in &single {
            assert_eq!(
                mult_of(&double, c.label),
                Some(c.multiplicity * 2),
                "multiplicity of label {} did not double for {query:?}",
                c.label
            );
        }
    }
}

fn recall_monotonicity(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let ks: Vec<usize> = (1..=10).collect();
    for _ in 0..cases {
        let n = rng.random_range(1..=20);
        let truths: Vec<HashSet<u32>> = (0..n)
            .map(|_| {
                (0..rng.random_range(1..=6))
                    .map(|_| rng.random_range(0..30))
                    .collect()
            })
            .collect();
        let preds: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let len = rng.random_range(0..=12);
                let mut p: Vec<u32> = (0..30).collect();
                use rand::seq::SliceRandom;
                p.shuffle(&mut rng);
                p.truncate(len);
                p
            })
            .collect();
        let report = evaluate(&truths, &preds, &ks).unwrap();
        let recalls: Vec<f64> = ks.iter().map(|k| report.recall_at[k]).collect();
        assert!(
            recalls.windows(2).all(|w| w[0] <= w[1] + 1e-12),
            "recall not monotone: {recalls:?}"
        );
    }
}

/// Criterion 7: explain consistency over 1,000 random queries.
#[test]
fn criterion_7_explain_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut queries = 0;
    while queries < 1000 {
        let corpus = random_corpus(&mut rng);
        let model = build(&corpus.samples);
        let config = InferenceConfig::default();
        let mut scratch = ScratchSpace::for_model(&model);
        for _ in 0..20 {
            let query = random_query(&mut rng, &corpus.pool);
            let (preds, trace) = explain(&model, &query, &config);
            assert_eq!(
                preds,
                predict(&model, &query, &config),
                "explain diverges from predict for {query:?}"
            );

            let trace_ids: HashSet<u32> = trace.instances.iter().map(|r| r.instance).collect();
            for (label, contributors) in &trace.provenance {
                assert!(
                    contributors.iter().all(|id| trace_ids.contains(id)),
                    "provenance of {label:?} leaves the trace for {query:?}"
                );
            }

            // Every predicted label in the top similarity tier must have
            // provenance within the trace.
            let t = model.encode_title(&query);
            let retrieved = retrieve_instances(&model, &t, &config, &mut scratch);
            let candidates = gather_candidates(&model, &retrieved, &t, &config);
            let ranked = rank_candidates(candidates, &config);
            if let Some(max_sim) = ranked.first().map(|c| c.similarity) {
                for c in ranked.iter().take_while(|c| c.similarity == max_sim) {
                    let name = model.label_string(c.label);
                    let contributors = trace
                        .provenance
                        .iter()
                        .find(|(l, _)| l == name)
                        .map(|(_, ids)| ids.as_slice())
                        .unwrap_or(&[]);
                    assert!(
                        !contributors.is_empty(),
                        "top-tier label {name:?} has no provenance for {query:?}"
                    );
                }
            }
            queries += 1;
        }
    }
    println!("PASS criterion 7: explain consistency (1000 queries)");
}
