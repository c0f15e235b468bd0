//! Undirected simple graphs, benchmark datasets and initial node labels.

mod dataset;
mod features;

pub use dataset::{load_edge_list, load_tudataset, write_tudataset, Dataset};
pub use features::{FeatureMode, NodeFeatureInit};

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// An undirected, unweighted simple graph stored in CSR form.
///
/// Edges are kept once each as `(u, v)` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    node_category: Option<Vec<i64>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges (in either
    /// orientation) and out-of-range endpoints.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        node_category: Option<Vec<i64>>,
    ) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            check_endpoints(node_count, a, b)?;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {{{}, {}}}",
                w[0].0, w[0].1
            )));
        }
        Self::from_sorted(node_count, list, node_category)
    }

    /// Like [`Graph::new`] but silently merges duplicate edges. Benchmark files
    /// list every undirected edge in both directions.
    pub fn from_edges_dedup(
        node_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        node_category: Option<Vec<i64>>,
    ) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            check_endpoints(node_count, a, b)?;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        Self::from_sorted(node_count, list, node_category)
    }

    fn from_sorted(
        node_count: usize,
        edges: Vec<(u32, u32)>,
        node_category: Option<Vec<i64>>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        if let Some(cats) = &node_category {
            if cats.len() != node_count {
                return Err(Error::InvalidGraph(format!(
                    "{} node categories for {} nodes",
                    cats.len(),
                    node_count
                )));
            }
        }
        let mut degree = vec![0usize; node_count];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..node_count].to_vec();
        let mut neighbors = vec![0u32; 2 * edges.len()];
        for &(u, v) in &edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..node_count {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(Graph {
            node_count,
            edges,
            offsets,
            neighbors,
            node_category,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count).map(|v| self.degree(v))
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Sum of all degrees, `2m`.
    pub fn volume(&self) -> u64 {
        2 * self.edges.len() as u64
    }

    pub fn node_category(&self) -> Option<&[i64]> {
        self.node_category.as_deref()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    reached += 1;
                    queue.push_back(u as usize);
                }
            }
        }
        reached == self.node_count
    }
}

fn check_endpoints(node_count: usize, a: u32, b: u32) -> Result<()> {
    if a == b {
        return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
    }
    if a as usize >= node_count || b as usize >= node_count {
        return Err(Error::InvalidGraph(format!(
            "edge ({a}, {b}) references a node outside 0..{node_count}"
        )));
    }
    Ok(())
}
