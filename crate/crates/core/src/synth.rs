//! Synthetic dataset generator for the exact-match recovery experiment.
//!
//! Every training title is a set of distinct synthetic words containing one
//! anchor word private to that sample, so no two training titles share a
//! complete word set. Each test/validation sample clones the word set of
//! exactly one training sample (order shuffled) and inherits its labels;
//! that training sample is therefore the unique nearest neighbour at maximal
//! similarity, and a correct ranker recovers its labels perfectly.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::RawSample;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub train_n: usize,
    pub test_n: usize,
    pub valid_n: usize,
    pub label_n: usize,
    pub title_len: usize,
    pub labels_per: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            train_n: 500_000,
            test_n: 10_000,
            valid_n: 10_000,
            label_n: 200_000,
            title_len: 10,
            labels_per: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthDataset {
    pub train: Vec<RawSample>,
    pub test: Vec<RawSample>,
    pub valid: Vec<RawSample>,
}

/// Deterministically generates the three splits for the given seed.
///
/// Words are named `w<index>`: index `i < train_n` is the anchor of training
/// sample `i`; the remaining indices form a shared filler pool, so titles
/// overlap on fillers but never coincide as sets. Labels are single-token
/// phrases `l<index>` drawn without replacement per sample.
pub fn generate(config: &SynthConfig) -> Result<SynthDataset, SynthError> {
    if config.title_len < 1 {
        return Err(SynthError::Infeasible("title_len must be >= 1".into()));
    }
    if config.labels_per < 1 {
        return Err(SynthError::Infeasible("labels_per must be >= 1".into()));
    }
    if config.label_n < config.labels_per {
        return Err(SynthError::Infeasible(format!(
            "label_n ({}) smaller than labels_per ({})",
            config.label_n, config.labels_per
        )));
    }
    if config.train_n < 1 {
        return Err(SynthError::Infeasible("train_n must be >= 1".into()));
    }

    let filler_pool = (8 * config.title_len).max(64);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut train = Vec::with_capacity(config.train_n);
    let mut train_words: Vec<Vec<String>> = Vec::with_capacity(config.train_n);
    for i in 0..config.train_n {
        let mut words: Vec<String> = Vec::with_capacity(config.title_len);
        words.push(format!("w{i}"));
        for f in index::sample(&mut rng, filler_pool, config.title_len - 1) {
            words.push(format!("w{}", config.train_n + f));
        }
        words.shuffle(&mut rng);
        let keyphrases = index::sample(&mut rng, config.label_n, config.labels_per)
            .iter()
            .map(|j| format!("l{j}"))
            .collect();
        train.push(RawSample {
            title: words.join(" "),
            keyphrases,
        });
        train_words.push(words);
    }

    let paired_split = |rng: &mut ChaCha8Rng, n: usize| -> Vec<RawSample> {
        (0..n)
            .map(|_| {
                let twin = rng.random_range(0..config.train_n);
                let mut words = train_words[twin].clone();
                words.shuffle(rng);
                RawSample {
                    title: words.join(" "),
                    keyphrases: train[twin].keyphrases.clone(),
                }
            })
            .collect()
    };
    let test = paired_split(&mut rng, config.test_n);
    let valid = paired_split(&mut rng, config.valid_n);

    Ok(SynthDataset { train, test, valid })
}
