//! Brute-force reference predictor.
//!
//! Scores every training instance by set intersection against the encoded
//! dataset directly — no CSR graphs, no count array, no instance budget —
//! and ranks with the same key contract as the real inference path. Used by
//! property tests to certify the fast path, and exposed through the CLI for
//! debugging. Test-scale only: every prediction is a full dataset scan.

use std::collections::{HashMap, HashSet};

use crate::corpus::{tokenize, EncodedDataset};
use crate::inference::RankingStrategy;

struct OracleCandidate {
    label: u32,
    similarity: u32,
    ratio: f64,
    multiplicity: u32,
}

/// Predicts the top-`k` keyphrases for `title` by exhaustive scan.
pub fn oracle_predict(
    dataset: &EncodedDataset,
    title: &str,
    k: usize,
    strategy: RankingStrategy,
) -> Vec<String> {
    let t: HashSet<u32> = tokenize(title)
        .iter()
        .filter_map(|w| dataset.vocabulary.id(w))
        .collect();

    // Max similarity and distinct-instance multiplicity per label, over every
    // instance sharing at least one word with the query.
    let mut gathered: HashMap<u32, (u32, u32)> = HashMap::new();
    for (i, words) in dataset.instances.iter().enumerate() {
        let instance_words: HashSet<u32> = words.iter().copied().collect();
        let similarity = instance_words.intersection(&t).count() as u32;
        if similarity == 0 {
            continue;
        }
        for &label in &dataset.labels[i] {
            let entry = gathered.entry(label).or_insert((0, 0));
            entry.0 = entry.0.max(similarity);
            entry.1 += 1;
        }
    }

    let mut candidates: Vec<OracleCandidate> = gathered
        .into_iter()
        .map(|(label, (similarity, multiplicity))| {
            let constituents: HashSet<u32> = dataset
                .label_table
                .constituents(label)
                .iter()
                .copied()
                .collect();
            let common = constituents.iter().filter(|w| t.contains(w)).count();
            let ratio = match strategy {
                RankingStrategy::JaccardWmr => {
                    common as f64 / (t.len() + constituents.len() - common) as f64
                }
                RankingStrategy::MissingRatio => {
                    let missing = constituents.len() - common;
                    if missing == 0 {
                        f64::INFINITY
                    } else {
                        common as f64 / missing as f64
                    }
                }
                _ => common as f64 / constituents.len() as f64,
            };
            OracleCandidate {
                label,
                similarity,
                ratio,
                multiplicity,
            }
        })
        .collect();

    if strategy == RankingStrategy::MergeTop2 {
        let mut sims: Vec<u32> = candidates.iter().map(|c| c.similarity).collect();
        sims.sort_unstable();
        sims.dedup();
        if sims.len() >= 2 {
            let top = sims[sims.len() - 1];
            let second = sims[sims.len() - 2];
            for c in &mut candidates {
                if c.similarity == second {
                    c.similarity = top;
                }
            }
        }
    }

    candidates.sort_by(|a, b| {
        let by_sim = b.similarity.cmp(&a.similarity);
        let by_ratio = b.ratio.total_cmp(&a.ratio);
        let by_mult = b.multiplicity.cmp(&a.multiplicity);
        let by_label = a.label.cmp(&b.label);
        match strategy {
            RankingStrategy::WmrFirst => by_ratio.then(by_sim).then(by_mult).then(by_label),
            _ => by_sim.then(by_ratio).then(by_mult).then(by_label),
        }
    });
    candidates.truncate(k);
    candidates
        .into_iter()
        .map(|c| dataset.label_table.display(c.label).to_owned())
        .collect()
}
