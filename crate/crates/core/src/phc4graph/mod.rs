//! Pharmacophore instances and the binding interaction graph built from them.
//!
//! A vertex is a compatible (ligand, pocket) pharmacophore pair. Two vertices
//! are joined when the two contacts can hold at the same time, which is decided
//! by an [`EdgeRule`] on the intra-ligand and intra-pocket distances. Cliques of
//! the resulting [`DockingGraph`] are candidate binding poses.

mod graph;
mod io;
mod synthetic;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graph::{DockingGraph, VertexLabel};
pub use io::{
    load_graph, load_instance, parse_graph, parse_instance, save_graph, save_instance, to_dot,
    GraphFile,
};
pub use synthetic::{generate_synthetic, SyntheticSpec};

/// Interaction type of a pharmacophore point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum PharmacophoreKind {
    Hydrophobic,
    Donor,
    Acceptor,
    Aromatic,
    Other(String),
}

impl From<String> for PharmacophoreKind {
    fn from(s: String) -> Self {
        match s.as_str() {
            "hydrophobic" => Self::Hydrophobic,
            "donor" => Self::Donor,
            "acceptor" => Self::Acceptor,
            "aromatic" => Self::Aromatic,
            _ => Self::Other(s),
        }
    }
}

impl From<PharmacophoreKind> for String {
    fn from(k: PharmacophoreKind) -> Self {
        k.to_string()
    }
}

impl fmt::Display for PharmacophoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hydrophobic => f.write_str("hydrophobic"),
            Self::Donor => f.write_str("donor"),
            Self::Acceptor => f.write_str("acceptor"),
            Self::Aromatic => f.write_str("aromatic"),
            Self::Other(tag) => f.write_str(tag),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pharmacophore {
    pub id: usize,
    pub kind: PharmacophoreKind,
    /// Coordinates in Å.
    #[serde(rename = "xyz")]
    pub position: [f64; 3],
}

impl Pharmacophore {
    pub fn new(id: usize, kind: PharmacophoreKind, position: [f64; 3]) -> Self {
        Self { id, kind, position }
    }

    pub fn distance(&self, other: &Pharmacophore) -> f64 {
        self.position
            .iter()
            .zip(&other.position)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Pocket and ligand pharmacophores plus the `|ligand| × |pocket|` matrix of
/// allowed contacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PharmacophoreInstance {
    pub pocket: Vec<Pharmacophore>,
    pub ligand: Vec<Pharmacophore>,
    #[serde(rename = "compat")]
    pub compatibility: Vec<Vec<bool>>,
}

impl PharmacophoreInstance {
    /// Instance where a ligand point may contact a pocket point exactly when
    /// they share a kind.
    pub fn with_type_rule(pocket: Vec<Pharmacophore>, ligand: Vec<Pharmacophore>) -> Result<Self> {
        let compatibility = ligand
            .iter()
            .map(|l| pocket.iter().map(|p| l.kind == p.kind).collect())
            .collect();
        let instance = Self {
            pocket,
            ligand,
            compatibility,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, set) in [("pocket", &self.pocket), ("ligand", &self.ligand)] {
            let mut seen = HashSet::new();
            for p in set {
                if !seen.insert(p.id) {
                    return Err(Error::validation(format!("duplicate {name} id {}", p.id)));
                }
                if p.position.iter().any(|c| !c.is_finite()) {
                    return Err(Error::validation(format!(
                        "{name} pharmacophore {} has a non-finite coordinate",
                        p.id
                    )));
                }
            }
        }
        if self.compatibility.len() != self.ligand.len() {
            return Err(Error::validation(format!(
                "compat has {} rows but there are {} ligand pharmacophores",
                self.compatibility.len(),
                self.ligand.len()
            )));
        }
        for (i, row) in self.compatibility.iter().enumerate() {
            if row.len() != self.pocket.len() {
                return Err(Error::validation(format!(
                    "compat row {i} has {} entries but there are {} pocket pharmacophores",
                    row.len(),
                    self.pocket.len()
                )));
            }
            for (j, &allowed) in row.iter().enumerate() {
                if allowed && self.ligand[i].kind != self.pocket[j].kind {
                    return Err(Error::validation(format!(
                        "compat[{i}][{j}] pairs a {} ligand point with a {} pocket point",
                        self.ligand[i].kind, self.pocket[j].kind
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn compatible_pairs(&self) -> usize {
        self.compatibility.iter().flatten().filter(|&&b| b).count()
    }
}

/// When two contacts may coexist in one pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRule {
    /// `dist(P_p, P_q) + dist(L_p, L_q) <= delta`.
    DeltaSum { delta: f64 },
    /// `|dist(L_i, L_j) - dist(P_i, P_j)| <= 2 * tau`.
    TauBuffer { tau: f64 },
}

impl Default for EdgeRule {
    fn default() -> Self {
        EdgeRule::TauBuffer { tau: 1.0 }
    }
}

impl EdgeRule {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            EdgeRule::DeltaSum { delta } => ("delta", delta),
            EdgeRule::TauBuffer { tau } => ("tau", tau),
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")))
        }
    }

    fn admits(&self, ligand_distance: f64, pocket_distance: f64) -> bool {
        match *self {
            EdgeRule::DeltaSum { delta } => ligand_distance + pocket_distance <= delta,
            EdgeRule::TauBuffer { tau } => (ligand_distance - pocket_distance).abs() <= 2.0 * tau,
        }
    }
}

/// Optional per-kind vertex weights; kinds missing from the table weigh 1.
pub type KindWeights = BTreeMap<PharmacophoreKind, f64>;

/// One vertex per `true` entry of the compatibility matrix, row-major over
/// (ligand, pocket).
pub fn build_nodes(instance: &PharmacophoreInstance) -> Vec<VertexLabel> {
    let mut nodes = Vec::with_capacity(instance.compatible_pairs());
    for (l, row) in instance.ligand.iter().zip(&instance.compatibility) {
        for (p, &allowed) in instance.pocket.iter().zip(row) {
            if allowed {
                nodes.push(VertexLabel::Pair {
                    ligand: l.id,
                    pocket: p.id,
                });
            }
        }
    }
    nodes
}

/// Edges between vertices `nodes` under `rule`. Two contacts that share a
/// ligand or a pocket pharmacophore are never adjacent.
pub fn build_edges(
    nodes: &[VertexLabel],
    instance: &PharmacophoreInstance,
    rule: EdgeRule,
) -> Result<Vec<(usize, usize)>> {
    rule.validate()?;
    let ligand: HashMap<usize, &Pharmacophore> = instance.ligand.iter().map(|p| (p.id, p)).collect();
    let pocket: HashMap<usize, &Pharmacophore> = instance.pocket.iter().map(|p| (p.id, p)).collect();
    let pairs = nodes
        .iter()
        .enumerate()
        .map(|(v, label)| match label {
            VertexLabel::Pair { ligand: l, pocket: p } => match (ligand.get(l), pocket.get(p)) {
                (Some(&l), Some(&p)) => Ok((l, p)),
                _ => Err(Error::validation(format!(
                    "vertex {v} refers to ligand {l} / pocket {p}, not both present"
                ))),
            },
            VertexLabel::Opaque(s) => Err(Error::validation(format!(
                "vertex {v} has opaque label {s:?}; expected a pharmacophore pair"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut edges = Vec::new();
    for (a, &(la, pa)) in pairs.iter().enumerate() {
        for (b, &(lb, pb)) in pairs.iter().enumerate().skip(a + 1) {
            if la.id == lb.id || pa.id == pb.id {
                continue;
            }
            if rule.admits(la.distance(lb), pa.distance(pb)) {
                edges.push((a, b));
            }
        }
    }
    Ok(edges)
}

/// Full pipeline from instance to weighted docking graph.
pub fn build_graph(
    instance: &PharmacophoreInstance,
    rule: EdgeRule,
    kind_weights: Option<&KindWeights>,
) -> Result<DockingGraph> {
    instance.validate()?;
    let nodes = build_nodes(instance);
    let edges = build_edges(&nodes, instance, rule)?;
    let kinds: HashMap<usize, &PharmacophoreKind> =
        instance.ligand.iter().map(|p| (p.id, &p.kind)).collect();
    let weights = nodes
        .iter()
        .map(|label| match (label, kind_weights) {
            (VertexLabel::Pair { ligand, .. }, Some(table)) => {
                table.get(kinds[ligand]).copied().unwrap_or(1.0)
            }
            _ => 1.0,
        })
        .collect();
    DockingGraph::new(weights, &edges, Some(nodes))
}
