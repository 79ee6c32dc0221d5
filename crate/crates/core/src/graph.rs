//! Multigraphs and per-node attributes.

use crate::error::Error;
use crate::numeric::{Capacity, Cost, Extended};

/// A node pair. For directed graphs `tail -> head`; for undirected graphs the
/// order is only the order the edge was written in.
pub type Edge = (usize, usize);

/// Directed or undirected multigraph on nodes `0..node_count`.
///
/// Parallel edges are kept with their multiplicity; self-loops are rejected.
/// Undirected edges are stored once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    directed: bool,
}

impl Graph {
    pub fn new(node_count: usize, directed: bool) -> Self {
        Graph {
            node_count,
            edges: Vec::new(),
            directed,
        }
    }

    pub fn from_edges(
        node_count: usize,
        directed: bool,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, Error> {
        let mut g = Graph::new(node_count, directed);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<usize, Error> {
        if u >= self.node_count || v >= self.node_count {
            return Err(Error::NodeOutOfRange {
                node: u.max(v),
                node_count: self.node_count,
            });
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.edges.push((u, v));
        Ok(self.edges.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// `G + I`: a copy of this graph with extra edges appended.
    pub fn augmented<'a>(&self, extra: impl IntoIterator<Item = &'a Edge>) -> Graph {
        let mut g = self.clone();
        g.edges.extend(extra.into_iter().copied());
        g
    }

    /// The subgraph `(V, F)` keeping only the listed edge indices.
    pub fn edge_subgraph(&self, keep: impl IntoIterator<Item = usize>) -> Graph {
        Graph {
            node_count: self.node_count,
            edges: keep.into_iter().map(|i| self.edges[i]).collect(),
            directed: self.directed,
        }
    }

    /// Number of edge endpoints at `v` (out-degree plus in-degree when directed).
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Adds an isolated node and returns its index.
    pub fn add_node(&mut self) -> usize {
        self.node_count += 1;
        self.node_count - 1
    }
}

/// Per-node data of a source location instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeAttrs {
    pub cost: Cost,
    pub demand: u64,
    pub capacity: Capacity,
    pub supply: Capacity,
    pub flow_cost_bound: Cost,
}

impl Default for NodeAttrs {
    fn default() -> Self {
        NodeAttrs {
            cost: Cost::int(1),
            demand: 0,
            capacity: Extended::Infinite,
            supply: Extended::Infinite,
            flow_cost_bound: Extended::Infinite,
        }
    }
}

/// True when every pair shares one common endpoint; returns that endpoint.
///
/// An empty edge list has no center. A list of parallel copies of one pair
/// has two candidate centers; the smaller index is returned.
pub fn star_center(pairs: &[Edge]) -> Option<usize> {
    let &(u, v) = pairs.first()?;
    let shared = |c: usize| pairs.iter().all(|&(x, y)| x == c || y == c);
    if shared(u.min(v)) {
        Some(u.min(v))
    } else if shared(u.max(v)) {
        Some(u.max(v))
    } else {
        None
    }
}
