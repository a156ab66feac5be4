//! The trained model: two bipartite CSR graphs plus the vocabularies they
//! index, with a versioned, checksummed binary file format.
//!
//! `g_wi` maps word-ids to the training instances whose titles contain them;
//! `g_il` maps instance-ids to their label-ids. Construction is a sort and
//! de-duplication of edge tuples; there is no iterative optimization. The
//! model is immutable after construction and safe to share across threads.

use std::path::Path;

use thiserror::Error;

use crate::corpus::{tokenize, EncodedDataset, LabelTable, Vocabulary};
use crate::csr::CsrGraph;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"GRPH";
/// Header flag: CSR offsets and lengths are stored as u64 instead of u32.
const FLAG_WIDE_OFFSETS: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance {index} has no labels")]
    InstanceWithoutLabels { index: usize },
    #[error("not a graphite model (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model file is truncated")]
    Truncated,
    #[error("model file checksum mismatch")]
    ChecksumMismatch,
    #[error("model file has trailing bytes")]
    TrailingBytes,
    #[error("model file is corrupt: {0}")]
    Corrupt(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphiteModel {
    g_wi: CsrGraph,
    g_il: CsrGraph,
    vocabulary: Vocabulary,
    label_table: LabelTable,
}

/// Builds the model from an encoded dataset.
///
/// Every training instance must carry at least one label; instances without
/// labels are rejected rather than dropped, since dropping them would shift
/// instance ids.
pub fn build_model(dataset: EncodedDataset) -> Result<GraphiteModel, ModelError> {
    if let Some(index) = dataset.labels.iter().position(|b| b.is_empty()) {
        return Err(ModelError::InstanceWithoutLabels { index });
    }
    let num_instances = dataset.instances.len();
    let mut wi_edges = Vec::with_capacity(dataset.instances.iter().map(Vec::len).sum());
    for (i, words) in dataset.instances.iter().enumerate() {
        for &w in words {
            wi_edges.push((w, i as u32));
        }
    }
    let g_wi = CsrGraph::from_edges(dataset.vocabulary.len(), wi_edges);

    let mut il_edges = Vec::with_capacity(dataset.labels.iter().map(Vec::len).sum());
    for (i, labels) in dataset.labels.iter().enumerate() {
        for &l in labels {
            il_edges.push((i as u32, l));
        }
    }
    let g_il = CsrGraph::from_edges(num_instances, il_edges);

    Ok(GraphiteModel {
        g_wi,
        g_il,
        vocabulary: dataset.vocabulary,
        label_table: dataset.label_table,
    })
}

impl GraphiteModel {
    pub fn g_wi(&self) -> &CsrGraph {
        &self.g_wi
    }

    pub fn g_il(&self) -> &CsrGraph {
        &self.g_il
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn label_table(&self) -> &LabelTable {
        &self.label_table
    }

    pub fn num_instances(&self) -> usize {
        self.g_il.rows()
    }

    pub fn num_words(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn num_labels(&self) -> usize {
        self.label_table.len()
    }

    /// The raw keyphrase string label `id` was first interned from.
    pub fn label_string(&self, id: u32) -> &str {
        self.label_table.display(id)
    }

    /// Tokenizes `title` and encodes it against the model vocabulary.
    /// Unknown tokens are dropped; duplicates and order are preserved.
    pub fn encode_title(&self, title: &str) -> Vec<u32> {
        tokenize(title)
            .iter()
            .filter_map(|t| self.vocabulary.id(t))
            .collect()
    }

    /// Resolves a keyphrase string to its label id, if the normalized
    /// word-id sequence is part of the model's label space.
    pub fn label_id_for(&self, keyphrase: &str) -> Option<u32> {
        let words: Option<Vec<u32>> = tokenize(keyphrase)
            .iter()
            .map(|t| self.vocabulary.id(t))
            .collect();
        let words = words?;
        if words.is_empty() {
            return None;
        }
        self.label_table.lookup(&words)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let wide = self.g_wi.num_edges() > u32::MAX as usize
            || self.g_il.num_edges() > u32::MAX as usize;
        self.to_bytes_with(wide)
    }

    pub(crate) fn to_bytes_with(&self, wide: bool) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        put_u32(&mut buf, FORMAT_VERSION);
        put_u32(&mut buf, if wide { FLAG_WIDE_OFFSETS } else { 0 });
        put_u32(&mut buf, self.num_words() as u32);
        put_u32(&mut buf, self.num_instances() as u32);
        put_u32(&mut buf, self.num_labels() as u32);

        put_strings(&mut buf, self.vocabulary.words());
        put_strings(&mut buf, self.label_table.displays());
        put_u32_array(
            &mut buf,
            self.label_table.offsets().iter().copied(),
            self.label_table.offsets().len(),
        );
        put_u32_array(
            &mut buf,
            self.label_table.constituent_slab().iter().copied(),
            self.label_table.constituent_slab().len(),
        );
        put_csr(&mut buf, &self.g_wi, wide);
        put_csr(&mut buf, &self.g_il, wide);

        let crc = crc32fast::hash(&buf);
        put_u32(&mut buf, crc);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        if bytes.len() < MAGIC.len() {
            return Err(ModelError::Truncated);
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(ModelError::BadMagic);
        }
        let mut r = Reader {
            buf: bytes,
            pos: MAGIC.len(),
        };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(version));
        }
        let flags = r.u32()?;
        let wide = flags & FLAG_WIDE_OFFSETS != 0;
        let n_words = r.u32()? as usize;
        let n_instances = r.u32()? as usize;
        let n_labels = r.u32()? as usize;

        let words = read_strings(&mut r, n_words)?;
        let displays = read_strings(&mut r, n_labels)?;
        let label_offsets = read_u32_array(&mut r)?;
        if label_offsets.len() != n_labels + 1 {
            return Err(ModelError::Corrupt("label offsets length"));
        }
        let label_words = read_u32_array(&mut r)?;
        if label_offsets[0] != 0
            || label_offsets.windows(2).any(|w| w[0] > w[1])
            || *label_offsets.last().unwrap() as usize != label_words.len()
        {
            return Err(ModelError::Corrupt("label constituents shape"));
        }
        let g_wi = read_csr(&mut r, n_words, wide)?;
        let g_il = read_csr(&mut r, n_instances, wide)?;

        let body_end = r.pos;
        let stored_crc = r.u32()?;
        if r.pos != bytes.len() {
            return Err(ModelError::TrailingBytes);
        }
        if crc32fast::hash(&bytes[..body_end]) != stored_crc {
            return Err(ModelError::ChecksumMismatch);
        }

        Ok(GraphiteModel {
            g_wi,
            g_il,
            vocabulary: Vocabulary::from_words(words),
            label_table: LabelTable::from_parts(label_offsets, label_words, displays),
        })
    }
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_len(buf: &mut Vec<u8>, len: usize, wide: bool) {
    if wide {
        put_u64(buf, len as u64);
    } else {
        put_u32(buf, u32::try_from(len).expect("array length overflows u32"));
    }
}

fn put_strings(buf: &mut Vec<u8>, strings: &[String]) {
    put_u32(buf, strings.len() as u32);
    for s in strings {
        put_u32(buf, s.len() as u32);
        buf.extend_from_slice(s.as_bytes());
    }
}

fn put_u32_array(buf: &mut Vec<u8>, values: impl Iterator<Item = u32>, len: usize) {
    put_u32(buf, len as u32);
    for v in values {
        put_u32(buf, v);
    }
}

fn put_csr(buf: &mut Vec<u8>, graph: &CsrGraph, wide: bool) {
    put_len(buf, graph.offsets().len(), wide);
    for &o in graph.offsets() {
        if wide {
            put_u64(buf, o);
        } else {
            put_u32(buf, o as u32);
        }
    }
    put_len(buf, graph.targets().len(), wide);
    for &t in graph.targets() {
        put_u32(buf, t);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.buf.len() - self.pos < n {
            return Err(ModelError::Truncated);
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self, wide: bool) -> Result<usize, ModelError> {
        if wide {
            usize::try_from(self.u64()?).map_err(|_| ModelError::Corrupt("length overflow"))
        } else {
            Ok(self.u32()? as usize)
        }
    }
}

fn read_strings(r: &mut Reader, expected: usize) -> Result<Vec<String>, ModelError> {
    let count = r.u32()? as usize;
    if count != expected {
        return Err(ModelError::Corrupt("string count mismatch"));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32()? as usize;
        let bytes = r.take(len)?;
        let s = std::str::from_utf8(bytes).map_err(|_| ModelError::Corrupt("invalid UTF-8"))?;
        out.push(s.to_owned());
    }
    Ok(out)
}

fn read_u32_array(r: &mut Reader) -> Result<Vec<u32>, ModelError> {
    let count = r.u32()? as usize;
    let bytes = r.take(count.checked_mul(4).ok_or(ModelError::Truncated)?)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_csr(r: &mut Reader, rows: usize, wide: bool) -> Result<CsrGraph, ModelError> {
    let offsets_len = r.len(wide)?;
    if offsets_len != rows + 1 {
        return Err(ModelError::Corrupt("offsets length mismatch"));
    }
    let mut offsets = Vec::with_capacity(offsets_len.min(r.buf.len()));
    for _ in 0..offsets_len {
        offsets.push(if wide { r.u64()? } else { r.u32()? as u64 });
    }
    let targets_len = r.len(wide)?;
    let bytes = r.take(targets_len.checked_mul(4).ok_or(ModelError::Truncated)?)?;
    let targets: Vec<u32> = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    CsrGraph::from_parts(offsets, targets).ok_or(ModelError::Corrupt("invalid CSR shape"))
}
