//! Dataset ingestion, tokenization, and integer encoding.
//!
//! Titles and keyphrases are tokenized with the same rules and share one
//! word-id space, so label constituents can be intersected with title words
//! directly on ids. Keyphrases are order-sensitive: "black phone" and
//! "phone black" intern to distinct label ids.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed JSON: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: missing title")]
    MissingTitle { line: usize },
    #[error("line {line}: title is empty")]
    EmptyTitle { line: usize },
    #[error("dataset contains no samples")]
    EmptyDataset,
}

/// One training or test item: a title plus its associated keyphrases.
/// Test-only inputs may carry an empty keyphrase list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSample {
    pub title: String,
    pub keyphrases: Vec<String>,
}

/// Splits a title or keyphrase into normalized tokens.
///
/// Lowercases, splits on Unicode whitespace, strips leading/trailing
/// non-alphanumeric characters from each token, and drops tokens that end up
/// empty. Order and duplicates are preserved. Internal punctuation such as
/// the hyphen in "bird-bath" survives.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            raw.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Bidirectional word-string <-> word-id mapping. Ids are dense unsigned
/// integers assigned in first-encounter order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    word_to_id: HashMap<String, u32>,
    id_to_word: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `word`, registering it if unseen.
    pub fn get_or_intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.word_to_id.get(word) {
            return id;
        }
        let id = u32::try_from(self.id_to_word.len()).expect("word id space exhausted");
        self.word_to_id.insert(word.to_owned(), id);
        self.id_to_word.push(word.to_owned());
        id
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.word_to_id.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.id_to_word.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_word.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.id_to_word
    }

    /// Rebuilds a vocabulary from its id-ordered word list.
    pub fn from_words(words: Vec<String>) -> Self {
        let word_to_id = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Self {
            word_to_id,
            id_to_word: words,
        }
    }
}

/// Bidirectional keyphrase <-> label-id mapping.
///
/// The identity of a label is its ordered sequence of constituent word-ids;
/// the constituents of every label are stored row-by-row in CSR form. Each
/// label also keeps the first raw keyphrase string it was interned from, for
/// decoding predictions back to text.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    key_to_id: HashMap<Vec<u32>, u32>,
    offsets: Vec<u32>,
    constituent_words: Vec<u32>,
    display: Vec<String>,
}

impl Default for LabelTable {
    fn default() -> Self {
        Self::new()
    }
}

impl LabelTable {
    pub fn new() -> Self {
        Self {
            key_to_id: HashMap::new(),
            offsets: vec![0],
            constituent_words: Vec::new(),
            display: Vec::new(),
        }
    }

    /// Interns the ordered word-id sequence `words`, returning its label id.
    /// `raw` is kept as the display string the first time a label is seen.
    pub fn intern(&mut self, words: &[u32], raw: &str) -> u32 {
        if let Some(&id) = self.key_to_id.get(words) {
            return id;
        }
        let id = u32::try_from(self.display.len()).expect("label id space exhausted");
        self.key_to_id.insert(words.to_vec(), id);
        self.constituent_words.extend_from_slice(words);
        let end = u32::try_from(self.constituent_words.len()).expect("label constituents overflow");
        self.offsets.push(end);
        self.display.push(raw.to_owned());
        id
    }

    pub fn lookup(&self, words: &[u32]) -> Option<u32> {
        self.key_to_id.get(words).copied()
    }

    /// Ordered constituent word-ids of label `id`.
    pub fn constituents(&self, id: u32) -> &[u32] {
        let i = id as usize;
        &self.constituent_words[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn display(&self, id: u32) -> &str {
        &self.display[id as usize]
    }

    pub fn len(&self) -> usize {
        self.display.len()
    }

    pub fn is_empty(&self) -> bool {
        self.display.is_empty()
    }

    pub(crate) fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub(crate) fn constituent_slab(&self) -> &[u32] {
        &self.constituent_words
    }

    pub(crate) fn displays(&self) -> &[String] {
        &self.display
    }

    /// Rebuilds a table from its serialized parts.
    pub(crate) fn from_parts(
        offsets: Vec<u32>,
        constituent_words: Vec<u32>,
        display: Vec<String>,
    ) -> Self {
        let mut key_to_id = HashMap::with_capacity(display.len());
        for id in 0..display.len() {
            let row =
                constituent_words[offsets[id] as usize..offsets[id + 1] as usize].to_vec();
            key_to_id.insert(row, id as u32);
        }
        Self {
            key_to_id,
            offsets,
            constituent_words,
            display,
        }
    }
}

/// A fully integer-encoded dataset: instance word-id lists, per-instance
/// label-id lists, and the vocabulary/label table they index into.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub instances: Vec<Vec<u32>>,
    pub labels: Vec<Vec<u32>>,
    pub vocabulary: Vocabulary,
    pub label_table: LabelTable,
}

#[derive(Deserialize)]
struct JsonlRecord {
    title: Option<String>,
    #[serde(default)]
    keyphrases: Vec<String>,
}

/// Reads a UTF-8 JSONL dataset: one JSON object per line with a "title"
/// string and an optional "keyphrases" array. Duplicate keyphrases within a
/// sample are dropped, keeping the first occurrence. Blank lines are skipped.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<RawSample>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord = serde_json::from_str(&line).map_err(|source| {
            CorpusError::Malformed {
                line: line_no,
                source,
            }
        })?;
        let title = record
            .title
            .ok_or(CorpusError::MissingTitle { line: line_no })?;
        if title.trim().is_empty() {
            return Err(CorpusError::EmptyTitle { line: line_no });
        }
        let mut seen = HashSet::new();
        let keyphrases = record
            .keyphrases
            .into_iter()
            .filter(|kp| seen.insert(kp.clone()))
            .collect();
        samples.push(RawSample { title, keyphrases });
    }
    Ok(samples)
}

/// Encodes raw samples into integer form.
///
/// The vocabulary is built over title tokens and label tokens together, in
/// first-encounter order (title first, then keyphrases, per sample), so that
/// label constituents resolve against the same word-id space as titles.
/// Keyphrases that tokenize to nothing are skipped; keyphrases that normalize
/// to an already-seen label id within the same sample are deduplicated.
pub fn encode(samples: &[RawSample]) -> Result<EncodedDataset, CorpusError> {
    if samples.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let mut vocabulary = Vocabulary::new();
    let mut label_table = LabelTable::new();
    let mut instances = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    let mut word_buf = Vec::new();
    for sample in samples {
        let instance: Vec<u32> = tokenize(&sample.title)
            .iter()
            .map(|t| vocabulary.get_or_intern(t))
            .collect();
        let mut sample_labels: Vec<u32> = Vec::with_capacity(sample.keyphrases.len());
        for keyphrase in &sample.keyphrases {
            word_buf.clear();
            word_buf.extend(
                tokenize(keyphrase)
                    .iter()
                    .map(|t| vocabulary.get_or_intern(t)),
            );
            if word_buf.is_empty() {
                continue;
            }
            let id = label_table.intern(&word_buf, keyphrase.trim());
            if !sample_labels.contains(&id) {
                sample_labels.push(id);
            }
        }
        instances.push(instance);
        labels.push(sample_labels);
    }
    Ok(EncodedDataset {
        instances,
        labels,
        vocabulary,
        label_table,
    })
}
