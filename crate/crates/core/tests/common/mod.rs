//! Shared helpers for the integration suites: the worked four-item phone
//! example and seeded random corpora/queries for the property criteria.

use graphite_core::corpus::RawSample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn figure_samples() -> Vec<RawSample> {
    let rows = [
        (
            "black iphone 12 pro 128GB",
            vec!["iphone 12 pro", "black phone"],
        ),
        ("google pixel black 64GB", vec!["pixel 6", "black phone"]),
        ("grey iphone 13 pro", vec!["iphone 13 pro", "grey phone"]),
        ("Samsung s6 grey", vec!["Samsung galaxy", "grey phone"]),
    ];
    rows.iter()
        .map(|(title, keyphrases)| RawSample {
            title: (*title).to_owned(),
            keyphrases: keyphrases.iter().map(|k| (*k).to_owned()).collect(),
        })
        .collect()
}

pub struct RandomCorpus {
    pub samples: Vec<RawSample>,
    pub pool: Vec<String>,
}

/// A corpus within the oracle-equivalence bounds: at most 200 instances,
/// 50 vocabulary words, 100 label pool entries. Titles and keyphrases draw
/// words with replacement, so duplicate words and repeated keyphrases occur.
pub fn random_corpus(rng: &mut ChaCha8Rng) -> RandomCorpus {
    let n_words = rng.random_range(3..=50);
    let pool: Vec<String> = (0..n_words).map(|i| format!("w{i}")).collect();
    let n_labels = rng.random_range(1..=100);
    let label_pool: Vec<String> = (0..n_labels)
        .map(|_| {
            let len = rng.random_range(1..=4);
            (0..len)
                .map(|_| pool[rng.random_range(0..n_words)].clone())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let n_instances = rng.random_range(1..=200);
    let samples = (0..n_instances)
        .map(|_| {
            let title_len = rng.random_range(1..=10);
            let title = (0..title_len)
                .map(|_| pool[rng.random_range(0..n_words)].clone())
                .collect::<Vec<_>>()
                .join(" ");
            let n_kp = rng.random_range(1..=4);
            let keyphrases = (0..n_kp)
                .map(|_| label_pool[rng.random_range(0..label_pool.len())].clone())
                .collect();
            RawSample { title, keyphrases }
        })
        .collect();
    RandomCorpus { samples, pool }
}

/// A query mixing in-vocabulary words, unseen words, and duplicates.
pub fn random_query(rng: &mut ChaCha8Rng, pool: &[String]) -> String {
    let len = rng.random_range(0..=8);
    (0..len)
        .map(|_| {
            if rng.random_range(0..5) == 0 {
                format!("zz{}", rng.random_range(0..20))
            } else {
                pool[rng.random_range(0..pool.len())].clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
