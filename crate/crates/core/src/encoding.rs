//! Penalized QUBO encoding of the maximum vertex-weight clique problem.
//!
//! The objective of a selection `z ∈ {0,1}^n` is
//!
//! ```text
//! F(z) = Σ_i w_i z_i − P · #{(i, j) ∉ E : z_i = z_j = 1}
//! ```
//!
//! with penalty magnitude `P > 0`. The cost Hamiltonian is diagonal in the
//! computational basis with eigenvalue `F(z)` at `|z⟩`, so it is stored as the
//! full table of `2^n` energies ([`CostDiagonal`]).
//!
//! Bit `i` of a basis index is vertex `i` (vertex 0 is the least significant
//! bit). Printed bitstrings list vertex 0 first, so the index `0b01` prints as
//! `"10"`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phc4graph::DockingGraph;
use crate::simulator::qubit_cap;

/// Selection of vertices; printed left to right as vertex `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Bitstring of basis index `index` on `n` qubits (vertex `i` = bit `i`).
    pub fn from_index(index: u64, n: usize) -> Self {
        Self((0..n).map(|i| i < 64 && index >> i & 1 == 1).collect())
    }

    pub fn from_vertices(vertices: &[usize], n: usize) -> Self {
        let mut bits = vec![false; n];
        for &v in vertices {
            bits[v] = true;
        }
        Self(bits)
    }

    /// Basis index; panics above 64 bits.
    pub fn to_index(&self) -> u64 {
        assert!(self.0.len() <= 64, "bitstring longer than 64 bits");
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i]).collect()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("bad bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Linear vertex rewards plus a uniform penalty on every non-adjacent pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    linear: Vec<f64>,
    penalty_pairs: Vec<(usize, usize)>,
    penalty_magnitude: f64,
}

impl QuboProblem {
    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// The non-edges `(i, j)`, `i < j`.
    pub fn penalty_pairs(&self) -> &[(usize, usize)] {
        &self.penalty_pairs
    }

    pub fn penalty_magnitude(&self) -> f64 {
        self.penalty_magnitude
    }

    pub fn objective(&self, z: &Bitstring) -> f64 {
        let reward: f64 = z.ones().iter().map(|&i| self.linear[i]).sum();
        let violations = self
            .penalty_pairs
            .iter()
            .filter(|&&(i, j)| z.0[i] && z.0[j])
            .count();
        reward - self.penalty_magnitude * violations as f64
    }

    /// Multilinear extension of the objective to `x ∈ [0,1]^n`.
    pub fn continuous_objective(&self, x: &[f64]) -> f64 {
        let reward: f64 = self.linear.iter().zip(x).map(|(w, v)| w * v).sum();
        let overlap: f64 = self.penalty_pairs.iter().map(|&(i, j)| x[i] * x[j]).sum();
        reward - self.penalty_magnitude * overlap
    }

    /// Gradient of [`Self::continuous_objective`].
    pub fn continuous_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.linear.clone();
        for &(i, j) in &self.penalty_pairs {
            g[i] -= self.penalty_magnitude * x[j];
            g[j] -= self.penalty_magnitude * x[i];
        }
        g
    }

    /// Non-neighbour bitmask of every vertex (`n <= 64`).
    fn conflict_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.n()];
        for &(i, j) in &self.penalty_pairs {
            masks[i] |= 1 << j;
            masks[j] |= 1 << i;
        }
        masks
    }
}

pub fn build_qubo(graph: &DockingGraph, penalty_magnitude: f64) -> Result<QuboProblem> {
    if graph.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(penalty_magnitude.is_finite() && penalty_magnitude > 0.0) {
        return Err(Error::invalid(format!(
            "penalty magnitude must be finite and > 0, got {penalty_magnitude}"
        )));
    }
    Ok(QuboProblem {
        linear: graph.weights().to_vec(),
        penalty_pairs: graph.non_edges(),
        penalty_magnitude,
    })
}

/// `F(z)` for every basis index `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDiagonal {
    n: usize,
    energies: Vec<f64>,
    penalty_magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalHeader {
    pub n: usize,
    pub penalty_magnitude: f64,
}

impl CostDiagonal {
    /// Wraps a raw table; `energies.len()` must be `2^n`.
    pub fn from_energies(n: usize, energies: Vec<f64>, penalty_magnitude: f64) -> Result<Self> {
        if n >= 64 || energies.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1usize.checked_shl(n as u32).unwrap_or(0),
                got: energies.len(),
            });
        }
        Ok(Self {
            n,
            energies,
            penalty_magnitude,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn penalty_magnitude(&self) -> f64 {
        self.penalty_magnitude
    }

    pub fn max_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn header(&self) -> DiagonalHeader {
        DiagonalHeader {
            n: self.n,
            penalty_magnitude: self.penalty_magnitude,
        }
    }

    /// Energies as consecutive little-endian `f64`s.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.energies.iter().flat_map(|e| e.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(header: DiagonalHeader, bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 8 != 0 {
            return Err(Error::validation("diagonal byte length is not a multiple of 8"));
        }
        let energies = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Self::from_energies(header.n, energies, header.penalty_magnitude)
    }

    /// Writes `<stem>.bin` (raw energies) and `<stem>.json` (header).
    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        let bin = stem.with_extension("bin");
        let json = stem.with_extension("json");
        fs::write(&bin, self.to_le_bytes()).map_err(|e| Error::io(&bin, e))?;
        let header = serde_json::to_string(&self.header()).expect("header serializes");
        fs::write(&json, header).map_err(|e| Error::io(&json, e))
    }
}

pub fn build_cost_diagonal(qubo: &QuboProblem) -> Result<CostDiagonal> {
    build_cost_diagonal_with_cap(qubo, qubit_cap())
}

/// Fills the table by doubling: entries with highest set bit `b` are derived
/// from the already computed lower half as
/// `E[z] = E[z − 2^b] + w_b − P · popcount(z & conflicts_b)`.
/// Every entry is summed in the same order whether or not the halves are
/// processed in parallel.
pub fn build_cost_diagonal_with_cap(qubo: &QuboProblem, cap: usize) -> Result<CostDiagonal> {
    let n = qubo.n();
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "cost diagonal",
            n,
            cap,
        });
    }
    let conflicts = qubo.conflict_masks();
    let p = qubo.penalty_magnitude;
    let mut energies = vec![0.0; 1 << n];
    for b in 0..n {
        let half = 1usize << b;
        let (lower, upper) = energies[..2 * half].split_at_mut(half);
        let w = qubo.linear[b];
        let mask = conflicts[b];
        let fill = |(k, e): (usize, &mut f64)| {
            *e = lower[k] + w - p * f64::from((k as u64 & mask).count_ones());
        };
        if half >= 1 << 14 {
            upper.par_iter_mut().enumerate().for_each(fill);
        } else {
            upper.iter_mut().enumerate().for_each(fill);
        }
    }
    Ok(CostDiagonal {
        n,
        energies,
        penalty_magnitude: p,
    })
}

/// What a bitstring selects and whether it is a clique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueReport {
    pub vertices: Vec<usize>,
    pub is_clique: bool,
    /// Sum of the selected weights, valid clique or not.
    pub weight: f64,
}

pub fn decode(z: &Bitstring, graph: &DockingGraph) -> Result<CliqueReport> {
    if z.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: z.len(),
        });
    }
    let vertices = z.ones();
    Ok(CliqueReport {
        is_clique: graph.is_clique(&vertices),
        weight: graph.weight_of(&vertices),
        vertices,
    })
}
