//! Weighted undirected graphs with dense node ids.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Symmetric, loop-free graph on nodes `0..n` with edge weights in (0, 1].
///
/// Stored as an edge list plus adjacency lists; the Laplacian is built on
/// demand as a dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeProfile {
    pub weighted: Vec<f64>,
    pub unweighted: Vec<usize>,
    pub max_weighted: f64,
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, w)` triples. Duplicate unordered pairs
    /// are rejected rather than merged.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v, weight) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::InvalidWeight { u, v, weight });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            adjacency[u].push((v, weight));
            adjacency[v].push((u, weight));
            list.push(Edge { u, v, weight });
        }
        Ok(WeightedGraph {
            n,
            edges: list,
            adjacency,
        })
    }

    pub fn empty(n: usize) -> Self {
        WeightedGraph {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in insertion order, each unordered pair once.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    /// Weight of the pair `(u, v)`, zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adjacency[u]
            .iter()
            .find(|&&(x, _)| x == v)
            .map_or(0.0, |&(_, w)| w)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn degrees(&self) -> DegreeProfile {
        let weighted: Vec<f64> = self
            .adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum())
            .collect();
        let unweighted = self.adjacency.iter().map(Vec::len).collect();
        let max_weighted = weighted.iter().copied().fold(0.0, f64::max);
        DegreeProfile {
            weighted,
            unweighted,
            max_weighted,
        }
    }

    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| self.adjacency[v].is_empty())
            .collect()
    }

    /// Dense combinatorial Laplacian `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.u, e.v)] -= e.weight;
            l[(e.v, e.u)] -= e.weight;
            l[(e.u, e.u)] += e.weight;
            l[(e.v, e.v)] += e.weight;
        }
        l
    }

    /// Drops zero-degree nodes and restricts `opinions` to the survivors.
    ///
    /// Returns the reduced graph, the reduced opinions and, for every new
    /// id, the old id it came from.
    pub fn remove_isolated(
        &self,
        opinions: &OpinionVector,
    ) -> Result<(WeightedGraph, OpinionVector, Vec<usize>)> {
        if opinions.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: opinions.len(),
            });
        }
        let kept: Vec<usize> = (0..self.n)
            .filter(|&v| !self.adjacency[v].is_empty())
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyModel);
        }
        let mut new_id = vec![usize::MAX; self.n];
        for (new, &old) in kept.iter().enumerate() {
            new_id[old] = new;
        }
        let graph = WeightedGraph::from_edges(
            kept.len(),
            self.edges
                .iter()
                .map(|e| (new_id[e.u], new_id[e.v], e.weight)),
        )?;
        let values = kept.iter().map(|&old| opinions[old]).collect();
        Ok((graph, OpinionVector::from_raw(values), kept))
    }
}

/// See [`WeightedGraph::laplacian`].
pub fn laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    g.laplacian()
}

/// See [`WeightedGraph::degrees`].
pub fn degrees(g: &WeightedGraph) -> DegreeProfile {
    g.degrees()
}

/// See [`WeightedGraph::remove_isolated`].
pub fn remove_isolated(
    g: &WeightedGraph,
    s: &OpinionVector,
) -> Result<(WeightedGraph, OpinionVector, Vec<usize>)> {
    g.remove_isolated(s)
}
