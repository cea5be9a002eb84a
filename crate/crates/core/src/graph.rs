//! Immutable sparse undirected simple graphs.
//!
//! Adjacency is stored CSR-style with sorted column indices per row, which
//! gives deterministic traversal order everywhere downstream. Edge input is
//! treated as undirected; duplicates and self-loops are dropped at build time
//! (counts are available through [`Graph::from_edges_counted`]).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    num_edges: usize,
}

/// Counts of inputs discarded while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DroppedEdges {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Per-node degree bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn min_max(&self) -> (usize, usize) {
        let min = self.0.iter().copied().min().unwrap_or(0);
        let max = self.0.iter().copied().max().unwrap_or(0);
        (min, max)
    }
}

impl Graph {
    /// Build a graph from an undirected edge list. Self-loops and duplicates
    /// are dropped; the layout is deterministic (sorted columns per row).
    pub fn from_edges(edges: &[(usize, usize)], num_nodes: usize) -> Result<Graph> {
        Ok(Self::from_edges_counted(edges, num_nodes)?.0)
    }

    /// Same as [`Graph::from_edges`] but also reports how many inputs were dropped.
    pub fn from_edges_counted(
        edges: &[(usize, usize)],
        num_nodes: usize,
    ) -> Result<(Graph, DroppedEdges)> {
        if num_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut dropped = DroppedEdges::default();
        let mut pairs = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= num_nodes {
                    return Err(Error::NodeOutOfRange { id, num_nodes });
                }
            }
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        dropped.duplicates = before - pairs.len();

        let num_edges = pairs.len();
        let mut degrees = vec![0usize; num_nodes];
        for &(u, v) in &pairs {
            degrees[u] += 1;
            degrees[v] += 1;
        }
        let mut row_offsets = vec![0usize; num_nodes + 1];
        for i in 0..num_nodes {
            row_offsets[i + 1] = row_offsets[i] + degrees[i];
        }
        let mut cursor = row_offsets.clone();
        let mut col_indices = vec![0usize; 2 * num_edges];
        for &(u, v) in &pairs {
            col_indices[cursor[u]] = v;
            cursor[u] += 1;
            col_indices[cursor[v]] = u;
            cursor[v] += 1;
        }
        // Each row sees its neighbors in ascending order because pairs were
        // sorted and rows are filled front to back, except the row of the
        // larger endpoint, which interleaves; sort rows to guarantee it.
        for i in 0..num_nodes {
            col_indices[row_offsets[i]..row_offsets[i + 1]].sort_unstable();
        }
        Ok((
            Graph {
                num_nodes,
                row_offsets,
                col_indices,
                num_edges,
            },
            dropped,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Undirected edge count (each edge counted once).
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn degree_vector(&self) -> DegreeVector {
        DegreeVector((0..self.num_nodes).map(|v| self.degree(v)).collect())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Iterate undirected edges (u < v) in deterministic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Subgraph induced by `nodes` (deduplicated, sorted). Returns the graph
    /// and the sorted list of original ids; new id `i` maps to `kept[i]`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let mut kept: Vec<usize> = nodes.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() {
            return Err(Error::EmptyMask);
        }
        if let Some(&id) = kept.iter().find(|&&id| id >= self.num_nodes) {
            return Err(Error::NodeOutOfRange {
                id,
                num_nodes: self.num_nodes,
            });
        }
        let mut new_id = vec![usize::MAX; self.num_nodes];
        for (i, &v) in kept.iter().enumerate() {
            new_id[v] = i;
        }
        let mut edges = Vec::new();
        for &u in &kept {
            for &v in self.neighbors(u) {
                if v > u && new_id[v] != usize::MAX {
                    edges.push((new_id[u], new_id[v]));
                }
            }
        }
        let g = Graph::from_edges(&edges, kept.len())?;
        Ok((g, kept))
    }

    /// Relabel nodes by permutation `perm`, where new id of node `v` is `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.num_nodes {
            return Err(Error::InvalidParameter {
                name: "perm",
                reason: format!("length {} != num_nodes {}", perm.len(), self.num_nodes),
            });
        }
        let edges: Vec<(usize, usize)> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::from_edges(&edges, self.num_nodes)
    }
}
