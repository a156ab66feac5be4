//! Real-time inference: count-array instance retrieval over `g_wi`,
//! candidate gathering over `g_il`, word-match ratios, and ranking.
//!
//! All scores are set-based: duplicate words in the query or in a label
//! count once. Retrieval returns complete similarity tiers from the highest
//! downward, never splitting a tier, and stops at the first tier boundary
//! where the accumulated instance count reaches the configured budget.
//! The model is shared read-only; per-query state lives in a
//! [`ScratchSpace`] that each worker owns privately.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::thread;

use crate::model::GraphiteModel;

pub const DEFAULT_INSTANCE_BUDGET: usize = 1000;

/// How gathered candidates are ordered before truncation to `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingStrategy {
    /// similarity desc, word-match ratio desc, multiplicity desc, label asc.
    Default,
    /// Default key with Jaccard similarity |t∩l| / |t∪l| as the ratio.
    JaccardWmr,
    /// Default key with |t∩l| / |l∖t| as the ratio; labels fully covered by
    /// the query rank first (+inf sentinel). Prefers longer, more specific
    /// labels.
    MissingRatio,
    /// Word-match ratio desc first, then similarity desc.
    WmrFirst,
    /// The two highest similarity tiers are merged before the Default key
    /// applies.
    MergeTop2,
}

impl RankingStrategy {
    pub const ALL: [RankingStrategy; 5] = [
        RankingStrategy::Default,
        RankingStrategy::JaccardWmr,
        RankingStrategy::MissingRatio,
        RankingStrategy::WmrFirst,
        RankingStrategy::MergeTop2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RankingStrategy::Default => "default",
            RankingStrategy::JaccardWmr => "jaccard-wmr",
            RankingStrategy::MissingRatio => "missing-ratio",
            RankingStrategy::WmrFirst => "wmr-first",
            RankingStrategy::MergeTop2 => "merge-top2",
        }
    }
}

impl fmt::Display for RankingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RankingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "default" => Ok(RankingStrategy::Default),
            "jaccard" | "jaccard-wmr" | "jaccard_wmr" => Ok(RankingStrategy::JaccardWmr),
            "missing-ratio" | "missing_ratio" => Ok(RankingStrategy::MissingRatio),
            "wmr-first" | "wmr_first" => Ok(RankingStrategy::WmrFirst),
            "merge-top2" | "merge_top2" => Ok(RankingStrategy::MergeTop2),
            other => Err(format!(
                "unknown ranking strategy '{other}' (expected default, jaccard-wmr, \
                 missing-ratio, wmr-first, or merge-top2)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    /// Number of predictions requested; must be >= 1.
    pub k: usize,
    /// Maximum instances retrieved before tier completion; must be >= 1.
    pub instance_budget: usize,
    pub strategy: RankingStrategy,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            k: 10,
            instance_budget: DEFAULT_INSTANCE_BUDGET,
            strategy: RankingStrategy::Default,
        }
    }
}

/// A training instance retrieved for a query, with the number of distinct
/// query words it shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrievedInstance {
    pub instance: u32,
    pub similarity: u32,
}

/// A candidate label with its ranking attributes: the maximum similarity
/// among contributing instances, the strategy's word-match ratio, and the
/// count of distinct retrieved instances that carry it.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: u32,
    pub similarity: u32,
    pub ratio: f64,
    pub multiplicity: u32,
}

/// Decision-path record for one prediction: the retrieved instances in the
/// top two similarity tiers, and for each output label the ids of the trace
/// instances that contributed it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplainTrace {
    pub instances: Vec<RetrievedInstance>,
    pub provenance: Vec<(String, Vec<u32>)>,
}

/// Per-worker mutable state. The count array is sized to the model's
/// instance count and reset through the touched list after each query, so
/// per-query cost stays linear in the touched instances rather than in the
/// training-set size.
pub struct ScratchSpace {
    counts: Vec<u32>,
    touched: Vec<u32>,
    tiers: Vec<Vec<u32>>,
    label_slots: HashMap<u32, usize>,
}

impl ScratchSpace {
    pub fn for_model(model: &GraphiteModel) -> Self {
        Self {
            counts: vec![0; model.num_instances()],
            touched: Vec::new(),
            tiers: Vec::new(),
            label_slots: HashMap::new(),
        }
    }
}

fn distinct_sorted(t: &[u32]) -> Vec<u32> {
    let mut d = t.to_vec();
    d.sort_unstable();
    d.dedup();
    d
}

/// Retrieves the training instances sharing at least one word with `t`,
/// sorted by similarity descending (instance id ascending within a tier).
/// `t` may contain duplicates and ids unknown to the model; both are
/// harmless. An empty or fully-unknown query retrieves nothing.
pub fn retrieve_instances(
    model: &GraphiteModel,
    t: &[u32],
    config: &InferenceConfig,
    scratch: &mut ScratchSpace,
) -> Vec<RetrievedInstance> {
    retrieve_distinct(model, &distinct_sorted(t), config.instance_budget, scratch)
}

fn retrieve_distinct(
    model: &GraphiteModel,
    distinct: &[u32],
    budget: usize,
    scratch: &mut ScratchSpace,
) -> Vec<RetrievedInstance> {
    assert!(budget >= 1, "instance_budget must be >= 1");
    if distinct.is_empty() {
        return Vec::new();
    }
    let max_sim = distinct.len();
    if scratch.tiers.len() < max_sim {
        scratch.tiers.resize_with(max_sim, Vec::new);
    }
    debug_assert!(scratch.touched.is_empty());

    for &w in distinct {
        for &i in model.g_wi().row(w) {
            let c = &mut scratch.counts[i as usize];
            if *c == 0 {
                scratch.touched.push(i);
            }
            *c += 1;
        }
    }
    for &i in &scratch.touched {
        let sim = scratch.counts[i as usize] as usize;
        scratch.tiers[sim - 1].push(i);
    }

    let mut out = Vec::new();
    let mut included = 0usize;
    let mut over_budget = false;
    for sim in (1..=max_sim).rev() {
        let tier = &mut scratch.tiers[sim - 1];
        if tier.is_empty() {
            continue;
        }
        if !over_budget {
            tier.sort_unstable();
            out.extend(tier.iter().map(|&i| RetrievedInstance {
                instance: i,
                similarity: sim as u32,
            }));
            included += tier.len();
            over_budget = included >= budget;
        }
        tier.clear();
    }
    for &i in &scratch.touched {
        scratch.counts[i as usize] = 0;
    }
    scratch.touched.clear();
    out
}

/// One candidate per distinct label among the retrieved instances' label
/// rows. `retrieved` must not repeat instances (as produced by
/// [`retrieve_instances`]).
pub fn gather_candidates(
    model: &GraphiteModel,
    retrieved: &[RetrievedInstance],
    t: &[u32],
    config: &InferenceConfig,
) -> Vec<Candidate> {
    let mut slots = HashMap::new();
    gather_into(model, retrieved, &distinct_sorted(t), config.strategy, &mut slots)
}

fn gather_into(
    model: &GraphiteModel,
    retrieved: &[RetrievedInstance],
    distinct: &[u32],
    strategy: RankingStrategy,
    slots: &mut HashMap<u32, usize>,
) -> Vec<Candidate> {
    slots.clear();
    let mut candidates: Vec<Candidate> = Vec::new();
    for r in retrieved {
        for &label in model.g_il().row(r.instance) {
            match slots.entry(label) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    let c = &mut candidates[*e.get()];
                    c.similarity = c.similarity.max(r.similarity);
                    c.multiplicity += 1;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(candidates.len());
                    candidates.push(Candidate {
                        label,
                        similarity: r.similarity,
                        ratio: 0.0,
                        multiplicity: 1,
                    });
                }
            }
        }
    }
    for c in &mut candidates {
        c.ratio = strategy_ratio(strategy, distinct, model.label_table().constituents(c.label));
    }
    candidates
}

fn intersect_stats(t_sorted: &[u32], label_words: &[u32]) -> (usize, usize) {
    let mut common = 0;
    let mut distinct = 0;
    for (i, &w) in label_words.iter().enumerate() {
        if label_words[..i].contains(&w) {
            continue;
        }
        distinct += 1;
        if t_sorted.binary_search(&w).is_ok() {
            common += 1;
        }
    }
    (common, distinct)
}

fn strategy_ratio(strategy: RankingStrategy, t_sorted: &[u32], label_words: &[u32]) -> f64 {
    assert!(!label_words.is_empty(), "label has no constituent words");
    let (common, distinct_l) = intersect_stats(t_sorted, label_words);
    match strategy {
        RankingStrategy::JaccardWmr => {
            common as f64 / (t_sorted.len() + distinct_l - common) as f64
        }
        RankingStrategy::MissingRatio => {
            let missing = distinct_l - common;
            if missing == 0 {
                f64::INFINITY
            } else {
                common as f64 / missing as f64
            }
        }
        _ => common as f64 / distinct_l as f64,
    }
}

/// Word Match Ratio: |t ∩ l| / |l| over distinct word sets. Both arguments
/// may contain duplicates. Panics on a label with no constituent words,
/// which cannot occur for interned labels.
pub fn wmr(t: &[u32], label_words: &[u32]) -> f64 {
    strategy_ratio(RankingStrategy::Default, &distinct_sorted(t), label_words)
}

/// Jaccard variant: |t ∩ l| / |t ∪ l|.
pub fn jaccard_wmr(t: &[u32], label_words: &[u32]) -> f64 {
    strategy_ratio(RankingStrategy::JaccardWmr, &distinct_sorted(t), label_words)
}

/// Missing-word variant: |t ∩ l| / |l ∖ t|, +inf when the query covers the
/// whole label.
pub fn missing_ratio(t: &[u32], label_words: &[u32]) -> f64 {
    strategy_ratio(RankingStrategy::MissingRatio, &distinct_sorted(t), label_words)
}

fn default_cmp(a: &Candidate, b: &Candidate) -> Ordering {
    b.similarity
        .cmp(&a.similarity)
        .then_with(|| b.ratio.total_cmp(&a.ratio))
        .then_with(|| b.multiplicity.cmp(&a.multiplicity))
        .then_with(|| a.label.cmp(&b.label))
}

fn wmr_first_cmp(a: &Candidate, b: &Candidate) -> Ordering {
    b.ratio
        .total_cmp(&a.ratio)
        .then_with(|| b.similarity.cmp(&a.similarity))
        .then_with(|| b.multiplicity.cmp(&a.multiplicity))
        .then_with(|| a.label.cmp(&b.label))
}

fn merge_top_two_tiers(candidates: &mut [Candidate]) {
    let mut sims: Vec<u32> = candidates.iter().map(|c| c.similarity).collect();
    sims.sort_unstable();
    sims.dedup();
    if sims.len() < 2 {
        return;
    }
    let top = sims[sims.len() - 1];
    let second = sims[sims.len() - 2];
    for c in candidates {
        if c.similarity == second {
            c.similarity = top;
        }
    }
}

/// Sorts candidates by the configured strategy and truncates to `k`.
pub fn rank_candidates(mut candidates: Vec<Candidate>, config: &InferenceConfig) -> Vec<Candidate> {
    assert!(config.k >= 1, "k must be >= 1");
    if config.strategy == RankingStrategy::MergeTop2 {
        merge_top_two_tiers(&mut candidates);
    }
    let cmp = match config.strategy {
        RankingStrategy::WmrFirst => wmr_first_cmp,
        _ => default_cmp,
    };
    candidates.sort_unstable_by(cmp);
    candidates.truncate(config.k);
    candidates
}

/// As [`rank_candidates`], returning label ids only.
pub fn rank(candidates: Vec<Candidate>, config: &InferenceConfig) -> Vec<u32> {
    rank_candidates(candidates, config)
        .into_iter()
        .map(|c| c.label)
        .collect()
}

/// Full pipeline for one title: tokenize, encode against the model
/// vocabulary (unknown tokens dropped), retrieve, gather, rank, decode.
/// A title sharing no vocabulary with the training data yields an empty
/// list rather than a guess.
pub fn predict(model: &GraphiteModel, title: &str, config: &InferenceConfig) -> Vec<String> {
    let mut scratch = ScratchSpace::for_model(model);
    predict_with(model, &mut scratch, title, config)
}

pub fn predict_with(
    model: &GraphiteModel,
    scratch: &mut ScratchSpace,
    title: &str,
    config: &InferenceConfig,
) -> Vec<String> {
    predict_ids_with(model, scratch, title, config)
        .into_iter()
        .map(|l| model.label_string(l).to_owned())
        .collect()
}

/// As [`predict_with`], returning label ids instead of strings.
pub fn predict_ids_with(
    model: &GraphiteModel,
    scratch: &mut ScratchSpace,
    title: &str,
    config: &InferenceConfig,
) -> Vec<u32> {
    assert!(config.k >= 1, "k must be >= 1");
    let t = model.encode_title(title);
    let distinct = distinct_sorted(&t);
    let retrieved = retrieve_distinct(model, &distinct, config.instance_budget, scratch);
    let mut slots = std::mem::take(&mut scratch.label_slots);
    let candidates = gather_into(model, &retrieved, &distinct, config.strategy, &mut slots);
    scratch.label_slots = slots;
    rank(candidates, config)
}

/// Coarse-grained parallel batch prediction: titles are partitioned into
/// contiguous chunks, one worker thread per chunk, each with a private
/// scratch space. Output order equals input order and is independent of the
/// worker count.
pub fn predict_batch<S: AsRef<str> + Sync>(
    model: &GraphiteModel,
    titles: &[S],
    config: &InferenceConfig,
    workers: usize,
) -> Vec<Vec<String>> {
    run_batch(model, titles, config, workers, predict_with)
}

/// As [`predict_batch`], returning label ids.
pub fn predict_batch_ids<S: AsRef<str> + Sync>(
    model: &GraphiteModel,
    titles: &[S],
    config: &InferenceConfig,
    workers: usize,
) -> Vec<Vec<u32>> {
    run_batch(model, titles, config, workers, predict_ids_with)
}

fn run_batch<S, T, F>(
    model: &GraphiteModel,
    titles: &[S],
    config: &InferenceConfig,
    workers: usize,
    f: F,
) -> Vec<T>
where
    S: AsRef<str> + Sync,
    T: Send,
    F: Fn(&GraphiteModel, &mut ScratchSpace, &str, &InferenceConfig) -> T + Send + Sync + Copy,
{
    if titles.is_empty() {
        return Vec::new();
    }
    let workers = workers.max(1).min(titles.len());
    let chunk_len = titles.len().div_ceil(workers);
    thread::scope(|scope| {
        let handles: Vec<_> = titles
            .chunks(chunk_len)
            .map(|chunk| {
                scope.spawn(move || {
                    let mut scratch = ScratchSpace::for_model(model);
                    chunk
                        .iter()
                        .map(|title| f(model, &mut scratch, title.as_ref(), config))
                        .collect::<Vec<T>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("prediction worker panicked"))
            .collect()
    })
}

/// Predicts and records the decision path. Predictions are identical to
/// [`predict`]; the trace keeps the retrieved instances of the two highest
/// similarity tiers and maps each output label to the trace instances that
/// contributed it.
pub fn explain(
    model: &GraphiteModel,
    title: &str,
    config: &InferenceConfig,
) -> (Vec<String>, ExplainTrace) {
    let mut scratch = ScratchSpace::for_model(model);
    explain_with(model, &mut scratch, title, config)
}

pub fn explain_with(
    model: &GraphiteModel,
    scratch: &mut ScratchSpace,
    title: &str,
    config: &InferenceConfig,
) -> (Vec<String>, ExplainTrace) {
    assert!(config.k >= 1, "k must be >= 1");
    let t = model.encode_title(title);
    let distinct = distinct_sorted(&t);
    let retrieved = retrieve_distinct(model, &distinct, config.instance_budget, scratch);
    let mut slots = std::mem::take(&mut scratch.label_slots);
    let candidates = gather_into(model, &retrieved, &distinct, config.strategy, &mut slots);
    scratch.label_slots = slots;
    let ranked = rank_candidates(candidates, config);
    let predictions: Vec<String> = ranked
        .iter()
        .map(|c| model.label_string(c.label).to_owned())
        .collect();

    let cut = top_two_tier_cut(&retrieved);
    let trace_instances = retrieved[..cut].to_vec();
    let slot_of: HashMap<u32, usize> = ranked
        .iter()
        .enumerate()
        .map(|(i, c)| (c.label, i))
        .collect();
    let mut contributors: Vec<Vec<u32>> = vec![Vec::new(); ranked.len()];
    for r in &trace_instances {
        for &label in model.g_il().row(r.instance) {
            if let Some(&slot) = slot_of.get(&label) {
                contributors[slot].push(r.instance);
            }
        }
    }
    let provenance = predictions
        .iter()
        .cloned()
        .zip(contributors)
        .collect();
    (
        predictions,
        ExplainTrace {
            instances: trace_instances,
            provenance,
        },
    )
}

fn top_two_tier_cut(retrieved: &[RetrievedInstance]) -> usize {
    let mut tiers = 0;
    let mut last = None;
    for (idx, r) in retrieved.iter().enumerate() {
        if last != Some(r.similarity) {
            tiers += 1;
            last = Some(r.similarity);
            if tiers > 2 {
                return idx;
            }
        }
    }
    retrieved.len()
}
