//! Compressed Sparse Row storage for bipartite edge sets.

/// A bipartite edge set stored as an offsets array plus a flat adjacency
/// array. Row `r` owns `targets[offsets[r]..offsets[r+1]]`; within each row
/// the targets are sorted ascending and contain no duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    offsets: Vec<u64>,
    targets: Vec<u32>,
}

impl CsrGraph {
    /// Builds a graph from raw `(source, target)` pairs: the edges are
    /// sorted, de-duplicated, and packed row by row. Every source must be
    /// below `num_rows`.
    pub fn from_edges(num_rows: usize, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0u64; num_rows + 1];
        for &(src, _) in &edges {
            offsets[src as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let targets = edges.into_iter().map(|(_, dst)| dst).collect();
        Self { offsets, targets }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Adjacency of `row`; empty for out-of-range rows.
    pub fn row(&self, row: u32) -> &[u32] {
        let r = row as usize;
        if r >= self.rows() {
            return &[];
        }
        &self.targets[self.offsets[r] as usize..self.offsets[r + 1] as usize]
    }

    pub(crate) fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub(crate) fn targets(&self) -> &[u32] {
        &self.targets
    }

    /// Reassembles a graph from serialized arrays, checking the CSR shape.
    pub(crate) fn from_parts(offsets: Vec<u64>, targets: Vec<u32>) -> Option<Self> {
        if offsets.is_empty() || offsets[0] != 0 {
            return None;
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return None;
        }
        if *offsets.last().unwrap() != targets.len() as u64 {
            return None;
        }
        Some(Self { offsets, targets })
    }
}
