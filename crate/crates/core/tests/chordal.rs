use std::collections::BTreeSet;

use mbk_core::chordal::*;
use mbk_core::oracle::has_chordless_cycle;
use mbk_core::VarSet;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .zip(bits)
                .filter_map(|(e, keep)| keep.then_some(e))
                .collect();
            Graph::from_edges(n, &edges)
        })
    })
}

/// Chordal graphs from a random perfect elimination ordering: each new
/// vertex attaches to a clique among earlier ones.
fn chordal_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((any::<usize>(), any::<u64>()), n),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(n, picks, perm)| {
            let mut g = Graph::new(n);
            for (k, &(anchor, mask)) in picks.iter().enumerate().skip(1) {
                let u = anchor % k;
                let mut clique = vec![u];
                for w in g.neighbors(u).iter().filter(|&w| w < k) {
                    if mask >> w & 1 == 1 && clique.iter().all(|&x| g.has_edge(x, w)) {
                        clique.push(w);
                    }
                }
                if mask >> 63 & 1 == 1 {
                    continue;
                }
                for x in clique {
                    g.add_edge(k, x);
                }
            }
            let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            Graph::from_edges(n, &edges)
        })
}

fn brute_maximal_cliques(g: &Graph) -> Vec<VarSet> {
    let n = g.label_bound();
    let cliques: Vec<VarSet> = (1u64..(1 << n)).map(VarSet::from_bits).filter(|&s| g.is_clique(s)).collect();
    let mut out: Vec<VarSet> = cliques
        .iter()
        .copied()
        .filter(|&c| !cliques.iter().any(|&d| d != c && c.is_subset(d)))
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn chordality_matches_chordless_cycle_search(g in graph_strategy(7)) {
        prop_assert_eq!(is_chordal(&g), !has_chordless_cycle(&g));
    }

    #[test]
    fn maximal_cliques_match_brute_force(g in chordal_strategy(8)) {
        prop_assert_eq!(maximal_cliques(&g).unwrap(), brute_maximal_cliques(&g));
    }

    #[test]
    fn clique_trees_satisfy_running_intersection(g in chordal_strategy(7)) {
        let trees = enumerate_clique_trees(&g, 100_000).unwrap();
        prop_assert!(!trees.is_empty());
        let canonical = clique_tree(&g).unwrap();
        prop_assert!(canonical.is_clique_tree_of(&g));
        let mut reference = canonical.separators();
        reference.sort();
        for t in &trees {
            prop_assert!(t.is_clique_tree_of(&g));
            let mut seps = t.separators();
            seps.sort();
            prop_assert_eq!(&seps, &reference);
        }
    }

    #[test]
    fn boundary_cliques_are_tree_endpoints(g in chordal_strategy(7)) {
        let trees = enumerate_clique_trees(&g, 100_000).unwrap();
        let cliques = maximal_cliques(&g).unwrap();
        let endpoints: BTreeSet<VarSet> = if cliques.len() == 1 {
            cliques.iter().copied().collect()
        } else {
            trees.iter().flat_map(|t| t.leaves().into_iter().map(|l| t.cliques()[l])).collect()
        };
        let boundary: BTreeSet<VarSet> = boundary_cliques(&g).unwrap().iter().map(|b| b.clique).collect();
        prop_assert_eq!(boundary, endpoints);
    }

    #[test]
    fn boundary_clique_parts(g in chordal_strategy(8)) {
        for bc in boundary_cliques(&g).unwrap() {
            prop_assert!(!bc.simplicial.is_empty());
            prop_assert_eq!(bc.simplicial.union(bc.separator), bc.clique);
            for v in bc.simplicial.iter() {
                prop_assert!(g.neighbors(v).is_subset(bc.clique));
            }
        }
    }

    #[test]
    fn elimination_order_has_no_fill_in(g in chordal_strategy(8)) {
        let order = elimination_variable_order(&g).unwrap();
        let mut sorted = order.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..g.label_bound()).collect::<Vec<_>>());
        prop_assert!(is_perfect_elimination_ordering(&g, &order));
    }

    #[test]
    fn non_chordal_graphs_are_rejected(g in graph_strategy(7)) {
        if !is_chordal(&g) {
            prop_assert!(maximal_cliques(&g).is_err());
            prop_assert!(boundary_cliques(&g).is_err());
            prop_assert!(elimination_variable_order(&g).is_err());
        }
    }
}
