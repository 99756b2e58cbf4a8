use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DockingGraph, VertexLabel};
use crate::error::{Error, Result};
use crate::oracle;

const MAX_ATTEMPTS: u64 = 512;

/// Parameters of a random vertex-weighted graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub edge_density: f64,
    pub weight_range: (f64, f64),
    pub planted_clique: Option<usize>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.weight_range;
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return Err(Error::invalid(format!(
                "edge density {} outside [0, 1]",
                self.edge_density
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(Error::invalid(format!("bad weight range ({lo}, {hi})")));
        }
        match self.planted_clique {
            Some(k) if k > self.n => Err(Error::invalid(format!(
                "planted clique of size {k} in a graph of {} vertices",
                self.n
            ))),
            Some(0) => Err(Error::invalid("planted clique size must be at least 1")),
            _ => Ok(()),
        }
    }
}

/// Random graph, optionally with a planted clique that is the unique
/// maximum-weight clique.
///
/// Without a planted clique weights are uniform over `weight_range` and each
/// pair is joined with probability `edge_density`. With a planted `k`-clique,
/// its vertices draw weights from the top tenth of the range and all others
/// from the bottom half. The result is checked against the exact oracle and
/// regenerated with a new seed salt until the planted set is the only optimum.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DockingGraph> {
    spec.validate()?;
    let Some(k) = spec.planted_clique else {
        return Ok(sample(spec, 0).0);
    };
    for salt in 0..MAX_ATTEMPTS {
        let (graph, planted) = sample(spec, salt);
        let best = oracle::max_weight_clique_bb(&graph);
        if best.count_optimal == 1 && best.best_vertices == planted {
            return Ok(graph);
        }
    }
    Err(Error::invalid(format!(
        "no graph with a unique planted {k}-clique found in {MAX_ATTEMPTS} attempts"
    )))
}

fn sample(spec: &SyntheticSpec, salt: u64) -> (DockingGraph, Vec<usize>) {
    let n = spec.n;
    let mut rng =
        ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let (lo, hi) = spec.weight_range;
    let span = hi - lo;

    let mut planted = match spec.planted_clique {
        Some(k) => index::sample(&mut rng, n, k).into_vec(),
        None => Vec::new(),
    };
    planted.sort_unstable();
    let mut in_planted = vec![false; n];
    for &v in &planted {
        in_planted[v] = true;
    }

    let weights = (0..n)
        .map(|v| {
            let u: f64 = rng.gen();
            match (spec.planted_clique.is_some(), in_planted[v]) {
                (false, _) => lo + span * u,
                (true, true) => lo + span * (0.9 + 0.1 * u),
                (true, false) => lo + span * 0.5 * u,
            }
        })
        .collect();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let coin = rng.gen::<f64>() < spec.edge_density;
            if coin || (in_planted[i] && in_planted[j]) {
                edges.push((i, j));
            }
        }
    }
    let labels = (0..n).map(|v| VertexLabel::Opaque(format!("v{v}"))).collect();
    let graph = DockingGraph::new(weights, &edges, Some(labels)).expect("generated graph is valid");
    (graph, planted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, k: Option<usize>, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n,
            edge_density: 0.3,
            weight_range: (0.1, 0.9),
            planted_clique: k,
            seed,
        }
    }

    #[test]
    fn planted_clique_is_the_oracle_optimum() {
        let g = generate_synthetic(&spec(14, Some(4), 7)).unwrap();
        let best = oracle::max_weight_clique_exhaustive(&g).unwrap();
        assert_eq!(best.best_vertices.len(), 4);
        assert_eq!(best.count_optimal, 1);
    }

    #[test]
    fn complete_unit_graph() {
        let g = generate_synthetic(&SyntheticSpec {
            n: 6,
            edge_density: 1.0,
            weight_range: (1.0, 1.0),
            planted_clique: None,
            seed: 1,
        })
        .unwrap();
        assert_eq!(g.edges().len(), 15);
        let best = oracle::max_weight_clique_exhaustive(&g).unwrap();
        assert_eq!(best.best_vertices, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&spec(17, None, 99)).unwrap();
        let b = generate_synthetic(&spec(17, None, 99)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&spec(17, None, 100)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_synthetic(&spec(3, Some(4), 0)).is_err());
        assert!(generate_synthetic(&spec(3, Some(0), 0)).is_err());
        let mut s = spec(3, None, 0);
        s.edge_density = 1.5;
        assert!(generate_synthetic(&s).is_err());
        let mut s = spec(3, None, 0);
        s.weight_range = (0.0, 1.0);
        assert!(generate_synthetic(&s).is_err());
    }
}
