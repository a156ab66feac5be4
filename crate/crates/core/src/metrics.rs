//! Evaluation metrics: Precision@k, Recall@k, and Average Variable
//! Precision (per-sample precision at the capped ground-truth depth).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{tokenize, RawSample};
use crate::model::GraphiteModel;

/// Ground-truth lists longer than this are capped for AVP: both the
/// prediction depth and the denominator use `min(|truth|, 10)`, which keeps
/// AVP in [0, 1].
pub const AVP_TRUTH_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("truths and predictions differ in length ({truths} vs {predictions})")]
    LengthMismatch { truths: usize, predictions: usize },
    #[error("sample {index} has an empty truth set")]
    EmptyTruth { index: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("k must be >= 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub precision_at: BTreeMap<usize, f64>,
    pub recall_at: BTreeMap<usize, f64>,
    pub avp: f64,
    pub sample_count: usize,
    /// Ground-truth cap applied to both the AVP depth and denominator.
    pub avp_truth_cap: usize,
}

/// Number of relevant predictions within the first `k`: |truth ∩ preds[..k]|.
/// `preds` must be duplicate-free.
pub fn relevance(truth: &HashSet<u32>, preds: &[u32], k: usize) -> usize {
    preds.iter().take(k).filter(|l| truth.contains(l)).count()
}

/// Averages Precision@k, Recall@k (for each requested `k`), and AVP over all
/// samples. Precision@k divides by min(k, |preds_i|) so short prediction
/// lists are not rewarded; a sample with no predictions contributes zero.
pub fn evaluate(
    truths: &[HashSet<u32>],
    preds: &[Vec<u32>],
    ks: &[usize],
) -> Result<EvalReport, MetricsError> {
    if truths.len() != preds.len() {
        return Err(MetricsError::LengthMismatch {
            truths: truths.len(),
            predictions: preds.len(),
        });
    }
    if truths.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(index) = truths.iter().position(HashSet::is_empty) {
        return Err(MetricsError::EmptyTruth { index });
    }
    if ks.contains(&0) {
        return Err(MetricsError::ZeroK);
    }

    let n = truths.len() as f64;
    let mut precision_at = BTreeMap::new();
    let mut recall_at = BTreeMap::new();
    for &k in ks {
        let mut precision_sum = 0.0;
        let mut recall_sum = 0.0;
        for (truth, pred) in truths.iter().zip(preds) {
            let rel = relevance(truth, pred, k) as f64;
            if !pred.is_empty() {
                precision_sum += rel / k.min(pred.len()) as f64;
            }
            recall_sum += rel / truth.len() as f64;
        }
        precision_at.insert(k, precision_sum / n);
        recall_at.insert(k, recall_sum / n);
    }

    let mut avp_sum = 0.0;
    for (truth, pred) in truths.iter().zip(preds) {
        let depth = truth.len().min(AVP_TRUTH_CAP);
        avp_sum += relevance(truth, pred, depth) as f64 / depth as f64;
    }

    Ok(EvalReport {
        precision_at,
        recall_at,
        avp: avp_sum / n,
        sample_count: truths.len(),
        avp_truth_cap: AVP_TRUTH_CAP,
    })
}

/// Maps each sample's ground-truth keyphrases into the model's label-id
/// space so they can be intersected with predicted ids.
///
/// Keyphrases outside the model label space get synthetic ids at and above
/// `model.num_labels()`; they can never be predicted and count as misses.
/// Keyphrases that tokenize to nothing are dropped. Two keyphrases that
/// normalize to the same word sequence share one id.
pub fn truth_sets(model: &GraphiteModel, samples: &[RawSample]) -> Vec<HashSet<u32>> {
    let mut unseen: HashMap<Vec<String>, u32> = HashMap::new();
    samples
        .iter()
        .map(|sample| {
            let mut set = HashSet::new();
            for keyphrase in &sample.keyphrases {
                let tokens = tokenize(keyphrase);
                if tokens.is_empty() {
                    continue;
                }
                let id = match model.label_id_for(keyphrase) {
                    Some(id) => id,
                    None => {
                        let next = model.num_labels() as u32 + unseen.len() as u32;
                        *unseen.entry(tokens).or_insert(next)
                    }
                };
                set.insert(id);
            }
            set
        })
        .collect()
}
