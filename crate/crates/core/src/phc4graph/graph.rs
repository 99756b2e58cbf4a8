use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a vertex of a docking graph stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexLabel {
    /// A contact between ligand pharmacophore `ligand` and pocket
    /// pharmacophore `pocket` (both are pharmacophore ids).
    Pair { ligand: usize, pocket: usize },
    /// Free-form label, used by synthetic graphs.
    Opaque(String),
}

/// Vertex-weighted simple undirected graph.
///
/// Adjacency is kept as a dense `n × n` boolean matrix; the graphs this crate
/// targets are small enough for that to be the cheapest representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DockingGraph {
    weights: Vec<f64>,
    adjacency: Vec<bool>,
    labels: Option<Vec<VertexLabel>>,
}

impl DockingGraph {
    /// Builds a graph, checking every invariant: no self-loops, endpoints in
    /// range, weights finite and strictly positive, labels (if any) one per
    /// vertex. Duplicate or reversed edges are merged.
    pub fn new(
        weights: Vec<f64>,
        edges: &[(usize, usize)],
        labels: Option<Vec<VertexLabel>>,
    ) -> Result<Self> {
        let n = weights.len();
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::validation(format!(
                    "weight of vertex {i} must be finite and > 0, got {w}"
                )));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::validation(format!(
                    "{} labels for {n} vertices",
                    labels.len()
                )));
            }
        }
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            if i == j {
                return Err(Error::validation(format!("self-loop at vertex {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::validation(format!(
                    "edge ({i},{j}) references a vertex outside 0..{n}"
                )));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        Ok(Self {
            weights,
            adjacency,
            labels,
        })
    }

    /// Graph with unit weights and no labels.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(vec![1.0; n], edges, None)
    }

    pub fn complete(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::new(weights, &edges, None)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[VertexLabel]> {
        self.labels.as_deref()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let n = self.n();
        i < n && j < n && self.adjacency[i * n + j]
    }

    /// Edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.pairs_where(true)
    }

    /// Unordered vertex pairs `(i, j)`, `i < j`, that do not share an edge.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        self.pairs_where(false)
    }

    fn pairs_where(&self, adjacent: bool) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[i * n + j] == adjacent)
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        let n = self.n();
        self.adjacency[i * n..(i + 1) * n].iter().filter(|&&a| a).count()
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(a, &i)| {
            i < self.n()
                && vertices[a + 1..]
                    .iter()
                    .all(|&j| i != j && self.has_edge(i, j))
        })
    }

    pub fn weight_of(&self, vertices: &[usize]) -> f64 {
        vertices.iter().map(|&i| self.weights[i]).sum()
    }

    /// Neighbourhood of every vertex as a bitmask. Only for `n <= 64`.
    pub fn neighbor_masks(&self) -> Result<Vec<u64>> {
        let n = self.n();
        if n > 64 {
            return Err(Error::ResourceLimit {
                what: "bitmask adjacency",
                n,
                cap: 64,
            });
        }
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| self.adjacency[i * n + j])
                    .fold(0u64, |m, j| m | (1 << j))
            })
            .collect())
    }

    /// Copy of this graph with one more edge.
    pub fn with_edge(&self, i: usize, j: usize) -> Result<Self> {
        let mut edges = self.edges();
        edges.push((i, j));
        Self::new(self.weights.clone(), &edges, self.labels.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loop() {
        let err = DockingGraph::unweighted(4, &[(3, 3)]).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DockingGraph::new(vec![1.0, 0.0], &[], None).is_err());
        assert!(DockingGraph::new(vec![1.0, f64::NAN], &[], None).is_err());
        assert!(DockingGraph::new(vec![-1.0], &[], None).is_err());
    }

    #[test]
    fn edges_are_symmetric_and_merged() {
        let g = DockingGraph::unweighted(3, &[(0, 1), (1, 0), (2, 1)]).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.non_edges(), vec![(0, 2)]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
            }
        }
    }

    #[test]
    fn clique_checks() {
        let g = DockingGraph::unweighted(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert!(g.is_clique(&[]));
        assert!(g.is_clique(&[3]));
        assert!(g.is_clique(&[0, 1, 2]));
        assert!(!g.is_clique(&[0, 1, 3]));
        assert_eq!(g.neighbor_masks().unwrap(), vec![0b0110, 0b0101, 0b1011, 0b0100]);
    }
}
