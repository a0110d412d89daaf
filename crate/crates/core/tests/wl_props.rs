//! Convergence and monotonicity properties of the refinement engine.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linklab_core::corpus;
use linklab_core::wl::{wl_refine, ColorTrace};

#[test]
fn paths_converge_in_ceil_half_n_rounds() {
    for n in 2..=50 {
        let g = corpus::path(n);
        let trace = wl_refine(&g, &vec![0; n], n + 2).unwrap();
        assert_eq!(trace.converged_at, Some(n.div_ceil(2)), "path of {n} nodes");
    }
}

#[test]
fn random_graphs_converge_within_node_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.random_range(2..30);
        let p = rng.random_range(0.05..0.6);
        let g = corpus::random_graph(n, p, &mut rng);
        let trace = wl_refine(&g, &vec![0; n], n + 5).unwrap();
        let converged = trace.converged_at.expect("must converge within n+5 rounds");
        assert!(converged <= n - 1, "converged at {converged} on {n} nodes");
        for w in trace.rounds.windows(2) {
            assert!(ColorTrace::refines(&w[0], &w[1]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn refinement_never_merges_classes(
        n in 2usize..12,
        bits in any::<u64>(),
        init_bits in any::<u64>(),
    ) {
        let slots = corpus::all_pairs(n);
        let edges: Vec<_> = slots
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> (k % 64) & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = linklab_core::Graph::from_edges(n, &edges);
        let init: Vec<u64> = (0..n).map(|i| init_bits >> i & 1).collect();
        let trace = wl_refine(&g, &init, 40).unwrap();
        for w in trace.rounds.windows(2) {
            prop_assert!(ColorTrace::refines(&w[0], &w[1]));
        }
        if let Some(c) = trace.converged_at {
            prop_assert!(c <= n);
        }
    }
}
