use std::collections::BTreeSet;

use mbk_core::bases::*;
use mbk_core::chordal::*;
use mbk_core::gf2::Flavor;
use mbk_core::groebner::*;
use mbk_core::*;
use proptest::prelude::*;

/// Small decomposable models: a random chordal graph on up to four
/// vertices with its maximal cliques as facets.
fn decomposable_strategy() -> impl Strategy<Value = ModelSpec> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n * (n - 1) / 2),
                prop::collection::vec(2u32..=3, n),
            )
        })
        .prop_filter_map("chordal, at most 36 cells", |(bits, levels)| {
            let n = levels.len();
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .zip(bits)
                .filter_map(|(e, keep)| keep.then_some(e))
                .collect();
            let g = Graph::from_edges(n, &edges);
            let cliques = maximal_cliques(&g).ok()?;
            let facets: Vec<Vec<usize>> = cliques.iter().map(|c| c.iter().collect()).collect();
            let model = ModelSpec::new(levels, &facets).ok()?;
            (model.num_cells()? <= 36).then_some(model)
        })
}

fn move_set(b: &MarkovBasis) -> BTreeSet<Move> {
    b.to_moves().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn groebner_basis_is_the_star_basis(model in decomposable_strategy()) {
        let lim = Limits::default();
        let gb = groebner_basis(&model, &lim).unwrap();
        let star = minimal_basis(&model, TreePolicy::StarAtMin, &lim).unwrap();
        prop_assert_eq!(move_set(&gb), move_set(&star));
    }

    #[test]
    fn star_basis_is_groebner_to_degree_three(model in decomposable_strategy()) {
        let lim = Limits::default();
        let gb = groebner_basis(&model, &lim).unwrap().to_moves();
        let ord = TermOrder::for_model(&model);
        let report = is_groebner_empirically(&gb, &model, &ord, 3, &lim).unwrap();
        prop_assert!(report.passed(), "{:?}", report.counterexample);
        prop_assert!(is_reduced(&gb, &ord));
    }

    #[test]
    fn minimal_bases_share_fiber_counts(model in decomposable_strategy(), seed in any::<u64>()) {
        let lim = Limits::default();
        let star = minimal_basis(&model, TreePolicy::StarAtMin, &lim).unwrap();
        let bases = [
            star.clone(),
            minimal_basis(&model, TreePolicy::Path, &lim).unwrap(),
            minimal_basis(&model, TreePolicy::Random(seed), &lim).unwrap(),
            minimal_basis_from_invariant(&model, Flavor::Staircase, &lim).unwrap(),
            minimal_basis_from_invariant(&model, Flavor::Standard, &lim).unwrap(),
        ];
        for b in &bases {
            prop_assert_eq!(b.len(), star.len());
            prop_assert!(has_minimal_fiber_counts(&model, b, &lim).unwrap());
            prop_assert!(is_markov_basis(&model, &b.to_moves(), 3, &lim).unwrap().passed());
        }
    }

    #[test]
    fn dobra_and_invariant_bases_connect_fibers(model in decomposable_strategy()) {
        let lim = Limits::default();
        let g = independence_graph(&model);
        for tree in enumerate_clique_trees(&g, 1000).unwrap() {
            let dobra = dobra_basis(&model, &tree, &lim).unwrap();
            prop_assert!(dobra.len() >= minimal_basis(&model, TreePolicy::StarAtMin, &lim).unwrap().len());
            prop_assert!(is_markov_basis(&model, &dobra.to_moves(), 3, &lim).unwrap().passed());
        }
        let inv = invariant_basis(&model, Flavor::Staircase, &lim).unwrap().to_basis(&model).unwrap();
        prop_assert!(is_markov_basis(&model, &inv.to_moves(), 3, &lim).unwrap().passed());
    }

    #[test]
    fn invariant_basis_is_closed_under_level_permutations(model in decomposable_strategy(), shift in any::<u64>()) {
        let lim = Limits::default();
        let inv = invariant_basis(&model, Flavor::Staircase, &lim).unwrap().to_basis(&model).unwrap();
        let perms: Vec<Vec<u32>> = model
            .levels()
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let mut p: Vec<u32> = (0..l).collect();
                p.rotate_left(((shift >> (3 * k)) % u64::from(l)) as usize);
                p
            })
            .collect();
        for z in inv.moves() {
            prop_assert!(inv.contains(&permute_levels(z, &perms)));
        }
    }
}
