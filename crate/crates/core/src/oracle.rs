//! Exact classical references for the maximum vertex-weight clique problem
//! and for the QUBO energy table.
//!
//! Both clique searches enumerate cliques in lexicographic order of their
//! sorted vertex lists, so among equally heavy cliques the lexicographically
//! smallest one is reported. Weights are compared with a relative tolerance
//! of `1e-9` when counting ties.

use serde::{Deserialize, Serialize};

use crate::encoding::{Bitstring, CostDiagonal};
use crate::error::{Error, Result};
use crate::phc4graph::DockingGraph;

/// Largest graph [`max_weight_clique_exhaustive`] accepts.
pub const EXHAUSTIVE_MAX_N: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_vertices: Vec<usize>,
    pub best_weight: f64,
    /// Number of distinct cliques attaining `best_weight`.
    pub count_optimal: usize,
    pub method: OracleMethod,
}

fn same_weight(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

struct Incumbent {
    vertices: Vec<usize>,
    weight: f64,
    count: usize,
}

impl Incumbent {
    fn new() -> Self {
        Self {
            vertices: Vec::new(),
            weight: 0.0,
            count: 1,
        }
    }

    fn offer(&mut self, clique: &[usize], weight: f64) {
        if same_weight(weight, self.weight) {
            self.count += 1;
        } else if weight > self.weight {
            self.vertices = clique.to_vec();
            self.weight = weight;
            self.count = 1;
        }
    }

    fn beats(&self, bound: f64) -> bool {
        bound < self.weight && !same_weight(bound, self.weight)
    }

    fn finish(self, method: OracleMethod) -> OracleResult {
        OracleResult {
            best_vertices: self.vertices,
            best_weight: self.weight,
            count_optimal: self.count,
            method,
        }
    }
}

/// Enumerates every clique of `graph` (at most `2^n` of them) with bitmask
/// candidate sets. Refuses graphs with more than 24 vertices.
pub fn max_weight_clique_exhaustive(graph: &DockingGraph) -> Result<OracleResult> {
    let n = graph.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::ResourceLimit {
            what: "exhaustive clique oracle",
            n,
            cap: EXHAUSTIVE_MAX_N,
        });
    }
    let masks: Vec<u32> = graph
        .neighbor_masks()?
        .into_iter()
        .map(|m| m as u32)
        .collect();

    fn visit(
        masks: &[u32],
        weights: &[f64],
        clique: &mut Vec<usize>,
        weight: f64,
        mut candidates: u32,
        best: &mut Incumbent,
    ) {
        while candidates != 0 {
            let v = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            clique.push(v);
            let w = weight + weights[v];
            best.offer(clique, w);
            visit(masks, weights, clique, w, candidates & masks[v], best);
            clique.pop();
        }
    }

    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = Incumbent::new();
    visit(&masks, graph.weights(), &mut Vec::new(), 0.0, all, &mut best);
    Ok(best.finish(OracleMethod::Exhaustive))
}

/// Fixed-width bitset over vertex indices.
#[derive(Clone)]
struct VertexSet(Vec<u64>);

impl VertexSet {
    fn empty(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    fn intersect(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    w * 64 + b
                })
            })
        })
    }
}

/// Branch and bound over candidate sets with the weight-sum bound: a branch is
/// cut when the current weight plus every remaining candidate's weight cannot
/// reach the incumbent. Works for any `n`; agrees with the exhaustive oracle.
pub fn max_weight_clique_bb(graph: &DockingGraph) -> OracleResult {
    let n = graph.n();
    let weights = graph.weights();
    // neighbours with a larger index only, so each clique is built once
    let forward: Vec<VertexSet> = (0..n)
        .map(|i| {
            let mut s = VertexSet::empty(n);
            for j in i + 1..n {
                if graph.has_edge(i, j) {
                    s.insert(j);
                }
            }
            s
        })
        .collect();

    fn visit(
        forward: &[VertexSet],
        weights: &[f64],
        clique: &mut Vec<usize>,
        weight: f64,
        candidates: &VertexSet,
        best: &mut Incumbent,
    ) {
        let order: Vec<usize> = candidates.iter().collect();
        let mut remaining: f64 = order.iter().map(|&v| weights[v]).sum();
        for &v in &order {
            if best.beats(weight + remaining) {
                return;
            }
            remaining -= weights[v];
            clique.push(v);
            let w = weight + weights[v];
            best.offer(clique, w);
            let next = candidates.intersect(&forward[v]);
            visit(forward, weights, clique, w, &next, best);
            clique.pop();
        }
    }

    let mut all = VertexSet::empty(n);
    (0..n).for_each(|v| all.insert(v));
    let mut best = Incumbent::new();
    visit(&forward, weights, &mut Vec::new(), 0.0, &all, &mut best);
    best.finish(OracleMethod::BranchAndBound)
}

/// Exact argmax of the energy table; ties go to the smallest index.
pub fn diag_argmax(diag: &CostDiagonal) -> (Bitstring, f64) {
    let (index, energy) = diag
        .energies()
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, be), (i, e)| {
            if e > be {
                (i, e)
            } else {
                (bi, be)
            }
        });
    (Bitstring::from_index(index as u64, diag.n()), energy)
}
