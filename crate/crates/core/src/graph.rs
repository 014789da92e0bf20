//! Undirected simple graphs in compressed sparse row form.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::DenseSymmetricMatrix;

/// A real symmetric linear operator: anything the eigensolver can multiply by.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn to_dense(&self) -> DMatrix<f64>;
}

/// Counts of input pairs that did not become edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Undirected graph without self-loops; neighbor lists are sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSymmetricGraph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl SparseSymmetricGraph {
    /// Builds a graph from unordered pairs. Self-loops are dropped (with a
    /// warning) and repeated pairs, in either orientation, collapse to one edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<(Self, EdgeStats)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut stats = EdgeStats::default();
        let mut half: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) has an endpoint outside [0, {n})")));
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            half.push((u.min(v), u.max(v)));
        }
        half.sort_unstable();
        let before = half.len();
        half.dedup();
        stats.duplicates = before - half.len();
        if stats.self_loops > 0 {
            log::warn!("dropped {} self-loop(s)", stats.self_loops);
        }
        Ok((Self::from_sorted_upper(n, &half), stats))
    }

    /// `pairs` must be sorted, deduplicated, with `u < v < n`.
    pub(crate) fn from_sorted_upper(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        // Lower neighbors of v arrive in increasing u order, upper ones after them.
        for &(u, v) in pairs {
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        for &(u, v) in pairs {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { n, offsets, neighbors }
    }

    /// Builds a graph from per-row upper neighbor lists: `rows[i]` holds sorted `j > i`.
    pub(crate) fn from_upper_rows(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let pairs: Vec<(usize, usize)> = rows
            .into_iter()
            .enumerate()
            .flat_map(|(i, js)| js.into_iter().map(move |j| (i, j)))
            .collect();
        Self::from_sorted_upper(n, &pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.neighbors.len() as f64 / self.n as f64
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Subgraph induced by `keep` (ascending node indices), relabelled `0..keep.len()`.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let pairs: Vec<(usize, usize)> = self
            .edges()
            .filter_map(|(u, v)| {
                let (a, b) = (new_index[u], new_index[v]);
                (a != usize::MAX && b != usize::MAX).then(|| (a.min(b), a.max(b)))
            })
            .collect();
        let mut pairs = pairs;
        pairs.sort_unstable();
        Self::from_sorted_upper(keep.len(), &pairs)
    }
}

impl SymmetricOperator for SparseSymmetricGraph {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.neighbors(i).iter().map(|&j| x[j]).sum();
        });
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (u, v) in self.edges() {
            m[(u, v)] = 1.0;
            m[(v, u)] = 1.0;
        }
        m
    }
}

impl SymmetricOperator for DenseSymmetricMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.matrix();
        let n = self.n();
        // column-major storage: column j is contiguous, and by symmetry equals row j
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let col = &m.as_slice()[i * n..(i + 1) * n];
            *yi = col.iter().zip(x).map(|(a, b)| a * b).sum();
        });
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.matrix().clone()
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let col = &self.as_slice()[i * n..(i + 1) * n];
            *yi = col.iter().zip(x).map(|(a, b)| a * b).sum();
        });
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}
