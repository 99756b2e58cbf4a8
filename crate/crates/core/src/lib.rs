//! Maximum-weight clique search on docking interaction graphs with QAOA-style
//! variational circuits, simulated exactly on a dense statevector.
//!
//! The pipeline runs
//! [`phc4graph`] (pharmacophores to a weighted graph) →
//! [`encoding`] (graph to a penalized objective and its diagonal) →
//! [`relax`] (optional continuous relaxation for warm starts) →
//! [`ansatz`] and [`simulator`] (the circuit) →
//! [`optimize`] (classical outer loop and sampling),
//! with [`oracle`] providing exact answers to check against.
//!
//! ```
//! use dockclique::encoding::{build_cost_diagonal, build_qubo};
//! use dockclique::oracle::{diag_argmax, max_weight_clique_exhaustive};
//! use dockclique::phc4graph::DockingGraph;
//!
//! let g = DockingGraph::new(vec![1.0, 2.0, 1.5], &[(0, 1), (1, 2)], None)?;
//! let diag = build_cost_diagonal(&build_qubo(&g, 3.0)?)?;
//! let (z, energy) = diag_argmax(&diag);
//! assert_eq!(z.ones(), vec![1, 2]);
//! assert_eq!(energy, 3.5);
//! assert_eq!(max_weight_clique_exhaustive(&g)?.best_vertices, vec![1, 2]);
//! # Ok::<(), dockclique::Error>(())
//! ```

pub mod ansatz;
pub mod encoding;
mod error;
pub mod experiment;
pub mod optimize;
pub mod oracle;
pub mod phc4graph;
pub mod relax;
pub mod simulator;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/relaxations.md")]
    mod relaxations {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
