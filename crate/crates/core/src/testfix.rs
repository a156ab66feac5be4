//! Shared fixture for unit tests: the four-item phone dataset used across
//! the corpus, model, and inference tests.

use crate::corpus::RawSample;

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
