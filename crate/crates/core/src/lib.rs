//! Graphite: a train-free, graph-based extreme multi-label classifier for
//! short text, built for keyphrase recommendation.
//!
//! Training constructs two bipartite graphs in CSR form — words to the
//! training instances containing them, and instances to their labels — with
//! no weight updates or hyper-parameter search. Inference walks a test
//! title's words through both graphs: a count array scores every touched
//! training instance by the number of distinct shared words, complete
//! similarity tiers are retrieved highest-first under an instance budget,
//! and the candidate labels are ranked by similarity, word-match ratio, and
//! multiplicity. The whole pipeline is deterministic, CPU-only, and shares
//! the immutable model across any number of prediction threads.

pub mod corpus;
pub mod csr;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod synth;

#[cfg(test)]
pub(crate) mod testfix;

pub use corpus::{
    encode, load_jsonl, tokenize, CorpusError, EncodedDataset, LabelTable, RawSample, Vocabulary,
};
pub use csr::CsrGraph;
pub use inference::{
    explain, jaccard_wmr, missing_ratio, predict, predict_batch, predict_batch_ids, wmr,
    Candidate, ExplainTrace, InferenceConfig, RankingStrategy, RetrievedInstance, ScratchSpace,
    DEFAULT_INSTANCE_BUDGET,
};
pub use metrics::{evaluate, relevance, truth_sets, EvalReport, MetricsError, AVP_TRUTH_CAP};
pub use model::{build_model, GraphiteModel, ModelError, FORMAT_VERSION};
pub use oracle::oracle_predict;
pub use synth::{generate, SynthConfig, SynthDataset, SynthError};
