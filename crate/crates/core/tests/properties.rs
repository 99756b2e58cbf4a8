use std::collections::BTreeSet;

use proptest::prelude::*;

use dockclique::ansatz::{final_state, AnsatzConfig, AnsatzFamily};
use dockclique::encoding::{build_cost_diagonal, build_qubo, Bitstring};
use dockclique::oracle::{diag_argmax, max_weight_clique_bb, max_weight_clique_exhaustive};
use dockclique::phc4graph::{
    build_graph, build_nodes, DockingGraph, EdgeRule, Pharmacophore, PharmacophoreInstance,
    PharmacophoreKind, VertexLabel,
};
use dockclique::relax::WarmStartAngles;

fn kind() -> impl Strategy<Value = PharmacophoreKind> {
    prop_oneof![
        Just(PharmacophoreKind::Hydrophobic),
        Just(PharmacophoreKind::Donor),
        Just(PharmacophoreKind::Acceptor),
    ]
}

fn points(max: usize) -> impl Strategy<Value = Vec<Pharmacophore>> {
    prop::collection::vec((kind(), prop::array::uniform3(-6.0..6.0f64)), 1..=max).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (k, xyz))| Pharmacophore::new(i, k, xyz))
            .collect()
    })
}

fn instance() -> impl Strategy<Value = PharmacophoreInstance> {
    (points(5), points(6))
        .prop_map(|(pocket, ligand)| PharmacophoreInstance::with_type_rule(pocket, ligand).unwrap())
}

fn graph(max_n: usize) -> impl Strategy<Value = DockingGraph> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                prop::collection::vec(0.1..3.0f64, n),
                prop::collection::vec(any::<bool>(), pairs),
            )
        })
        .prop_map(|(weights, coins)| {
            let n = weights.len();
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if coins[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            DockingGraph::new(weights, &edges, None).unwrap()
        })
}

fn edge_set(g: &DockingGraph) -> BTreeSet<(usize, usize)> {
    g.edges().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_vertex_per_compatible_pair(inst in instance()) {
        let g = build_graph(&inst, EdgeRule::default(), None).unwrap();
        prop_assert_eq!(g.n(), inst.compatible_pairs());
        prop_assert_eq!(build_nodes(&inst).len(), g.n());
    }

    #[test]
    fn edges_are_symmetric_and_between_distinct_contacts(inst in instance(), tau in 0.1..3.0f64) {
        let g = build_graph(&inst, EdgeRule::TauBuffer { tau }, None).unwrap();
        let labels = g.labels().unwrap();
        for i in 0..g.n() {
            prop_assert!(!g.has_edge(i, i));
            for j in 0..g.n() {
                prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                if g.has_edge(i, j) {
                    let (VertexLabel::Pair { ligand: la, pocket: pa }, VertexLabel::Pair { ligand: lb, pocket: pb }) =
                        (&labels[i], &labels[j]) else { unreachable!() };
                    prop_assert!(la != lb && pa != pb);
                }
            }
        }
    }

    #[test]
    fn looser_rules_only_add_edges(inst in instance(), a in 0.1..3.0f64, b in 0.1..3.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let tight = edge_set(&build_graph(&inst, EdgeRule::TauBuffer { tau: lo }, None).unwrap());
        let loose = edge_set(&build_graph(&inst, EdgeRule::TauBuffer { tau: hi }, None).unwrap());
        prop_assert!(tight.is_subset(&loose));
        let tight = edge_set(&build_graph(&inst, EdgeRule::DeltaSum { delta: 4.0 * lo }, None).unwrap());
        let loose = edge_set(&build_graph(&inst, EdgeRule::DeltaSum { delta: 4.0 * hi }, None).unwrap());
        prop_assert!(tight.is_subset(&loose));
    }

    #[test]
    fn diagonal_matches_direct_objective(g in graph(9), p in 0.1..5.0f64) {
        let qubo = build_qubo(&g, p).unwrap();
        let diag = build_cost_diagonal(&qubo).unwrap();
        for z in 0..1u64 << g.n() {
            let direct = qubo.objective(&Bitstring::from_index(z, g.n()));
            prop_assert!((diag.energies()[z as usize] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn sufficient_penalty_selects_a_clique(g in graph(10), extra in 0.01..2.0f64) {
        let diag = build_cost_diagonal(&build_qubo(&g, g.max_weight() + extra).unwrap()).unwrap();
        let (z, energy) = diag_argmax(&diag);
        prop_assert!(g.is_clique(&z.ones()));
        prop_assert!((energy - g.weight_of(&z.ones())).abs() < 1e-9);
    }

    #[test]
    fn adding_an_edge_never_lowers_the_optimum(g in graph(10), i in 0usize..10, j in 0usize..10) {
        let (i, j) = (i % g.n(), j % g.n());
        prop_assume!(i != j);
        let before = max_weight_clique_exhaustive(&g).unwrap().best_weight;
        let after = max_weight_clique_exhaustive(&g.with_edge(i, j).unwrap()).unwrap().best_weight;
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn branch_and_bound_agrees_with_enumeration(g in graph(14)) {
        let a = max_weight_clique_exhaustive(&g).unwrap();
        let b = max_weight_clique_bb(&g);
        prop_assert!((a.best_weight - b.best_weight).abs() <= 1e-9);
        prop_assert_eq!(a.count_optimal, b.count_optimal);
        prop_assert!(g.is_clique(&b.best_vertices));
    }

    #[test]
    fn circuits_preserve_the_norm(
        g in graph(6),
        family in prop::sample::select(AnsatzFamily::ALL.to_vec()),
        layers in 1usize..4,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let diag = build_cost_diagonal(&build_qubo(&g, 1.5).unwrap()).unwrap();
        let angles = family.is_warm().then(|| {
            let values: Vec<f64> = (0..g.n()).map(|_| rng.gen()).collect();
            WarmStartAngles::from_values(&values, 0.1).unwrap()
        });
        let cfg = AnsatzConfig::new(family, layers, angles).unwrap();
        let params: Vec<f64> = (0..cfg.parameter_count()).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let sv = final_state(&cfg, &diag, &params).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_probabilities_are_clipped_values(values in prop::collection::vec(-0.5..1.5f64, 1..12), eps in 0.01..0.49f64) {
        let angles = WarmStartAngles::from_values(&values, eps).unwrap();
        for (v, p) in values.iter().zip(angles.probabilities()) {
            prop_assert!((p - v.clamp(eps, 1.0 - eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn bitstrings_round_trip(n in 1usize..40, raw in any::<u64>()) {
        let index = if n == 64 { raw } else { raw & ((1u64 << n) - 1) };
        let z = Bitstring::from_index(index, n);
        let parsed: Bitstring = z.to_string().parse().unwrap();
        prop_assert_eq!(parsed.to_index(), index);
        prop_assert_eq!(Bitstring::from_vertices(&z.ones(), n), z);
    }
}
