//! Property suites for the graph types and the brute-force isomorphism
//! oracle, including the exhaustive small-graph agreement between
//! `are_isomorphic` and canonical codes.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linklab_core::corpus;
use linklab_core::graph::{
    apply_permutation, bfs_distances, extract_enclosing_subgraph, Graph, Permutation, TargetSet,
    INF,
};
use linklab_core::iso::{are_isomorphic, canonical_code, CanonicalCode};

fn graph_from_bits(n: usize, bits: u64) -> Graph {
    let slots = corpus::all_pairs(n);
    let edges: Vec<_> = slots
        .iter()
        .enumerate()
        .filter(|(k, _)| bits >> (k % 64) & 1 == 1)
        .map(|(_, &e)| e)
        .collect();
    Graph::from_edges(n, &edges)
}

proptest! {
    #[test]
    fn permutation_roundtrip(n in 1usize..9, bits in any::<u64>(), seed in any::<u64>()) {
        let g = graph_from_bits(n, bits);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Permutation::random(n, &mut rng);
        let there = apply_permutation(&g, &p).unwrap();
        let back = apply_permutation(&there, &p.inverse()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn bfs_satisfies_edge_triangle_property(
        n in 2usize..12,
        bits in any::<u64>(),
        src_pick in any::<u64>(),
        mask_bits in any::<u64>(),
    ) {
        let g = graph_from_bits(n, bits);
        let masked: Vec<usize> = (0..n).filter(|i| mask_bits >> i & 1 == 1).collect();
        let src = (src_pick as usize) % n;
        prop_assume!(!masked.contains(&src));
        let dist = bfs_distances(&g, src, &masked).unwrap();
        for (u, v) in g.edges() {
            if masked.contains(&u) || masked.contains(&v) {
                continue;
            }
            if dist[u] != INF && dist[v] != INF {
                prop_assert!(dist[u] <= dist[v] + 1);
                prop_assert!(dist[v] <= dist[u] + 1);
            }
        }
    }

    #[test]
    fn extraction_commutes_with_relabeling(
        n in 2usize..8,
        bits in any::<u64>(),
        h in 0usize..3,
        pair_pick in any::<u64>(),
        seed in any::<u64>(),
    ) {
        let g = graph_from_bits(n, bits);
        let pairs = corpus::all_pairs(n);
        let (u, v) = pairs[(pair_pick as usize) % pairs.len()];
        let s = TargetSet::pair(u, v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Permutation::random(n, &mut rng);

        let sub = extract_enclosing_subgraph(&g, &s, h).unwrap();
        let gp = apply_permutation(&g, &p).unwrap();
        let sub_p = extract_enclosing_subgraph(&gp, &s.mapped(&p), h).unwrap();

        prop_assert_eq!(sub.num_nodes(), sub_p.num_nodes());
        let witness =
            are_isomorphic(&sub.graph, &sub.targets, &sub_p.graph, &sub_p.targets).unwrap();
        prop_assert!(witness.is_some());
    }

    #[test]
    fn extraction_matches_its_set_builder_definition(
        n in 2usize..10,
        bits in any::<u64>(),
        h in 0usize..4,
        pair_pick in any::<u64>(),
    ) {
        let g = graph_from_bits(n, bits);
        let pairs = corpus::all_pairs(n);
        let (a, b) = pairs[(pair_pick as usize) % pairs.len()];
        let s = TargetSet::pair(a, b).unwrap();
        let sub = extract_enclosing_subgraph(&g, &s, h).unwrap();

        // membership: exactly the nodes within h unmasked hops of a target
        let da = bfs_distances(&g, a, &[]).unwrap();
        let db = bfs_distances(&g, b, &[]).unwrap();
        let expected: Vec<usize> = (0..n)
            .filter(|&i| da[i].min(db[i]) as usize <= h)
            .collect();
        prop_assert_eq!(&sub.parent_ids, &expected);

        // induced edges: exactly the parent edges between included nodes
        for (i, &oi) in sub.parent_ids.iter().enumerate() {
            for (j, &oj) in sub.parent_ids.iter().enumerate() {
                if i < j {
                    prop_assert_eq!(sub.graph.has_edge(i, j), g.has_edge(oi, oj));
                }
            }
        }
    }

    #[test]
    fn oracle_is_reflexive_and_symmetric(
        n in 1usize..7,
        bits_a in any::<u64>(),
        bits_b in any::<u64>(),
        pair_pick in any::<u64>(),
    ) {
        let a = graph_from_bits(n, bits_a);
        let b = graph_from_bits(n, bits_b);
        let s = if n >= 2 {
            let pairs = corpus::all_pairs(n);
            let (u, v) = pairs[(pair_pick as usize) % pairs.len()];
            TargetSet::pair(u, v).unwrap()
        } else {
            TargetSet::empty()
        };
        prop_assert!(are_isomorphic(&a, &s, &a, &s).unwrap().is_some());
        let ab = are_isomorphic(&a, &s, &b, &s).unwrap().is_some();
        let ba = are_isomorphic(&b, &s, &a, &s).unwrap().is_some();
        prop_assert_eq!(ab, ba);
    }
}

/// Verifies "equal canonical codes iff oracle-isomorphic" for every pair
/// of graphs in `graphs`, using code classes plus transitivity: members of
/// one class must be isomorphic to their representative, and class
/// representatives must be pairwise non-isomorphic.
fn assert_code_oracle_agreement(graphs: &[Graph]) {
    let empty = TargetSet::empty();
    let mut classes: BTreeMap<CanonicalCode, Vec<usize>> = BTreeMap::new();
    for (i, g) in graphs.iter().enumerate() {
        let code = canonical_code(g, &vec![0; g.num_nodes()], &empty).unwrap();
        classes.entry(code).or_default().push(i);
    }
    for members in classes.values() {
        let rep = &graphs[members[0]];
        for &i in &members[1..] {
            assert!(
                are_isomorphic(rep, &empty, &graphs[i], &empty).unwrap().is_some(),
                "equal codes but oracle disagrees (graphs {} vs {})",
                members[0],
                i
            );
        }
    }
    let reps: Vec<usize> = classes.values().map(|m| m[0]).collect();
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            assert!(
                are_isomorphic(&graphs[reps[i]], &empty, &graphs[reps[j]], &empty)
                    .unwrap()
                    .is_none(),
                "distinct codes but oracle finds isomorphism ({} vs {})",
                reps[i],
                reps[j]
            );
        }
    }
}

#[test]
fn codes_agree_with_oracle_exhaustively_up_to_five_nodes() {
    for n in 1..=5 {
        assert_code_oracle_agreement(&corpus::all_graphs(n));
    }
}

#[test]
fn codes_agree_with_oracle_on_random_six_and_seven_node_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [6usize, 7] {
        let mut graphs = Vec::new();
        for _ in 0..250 {
            let g = corpus::random_graph(n, 0.4, &mut rng);
            // include a relabeled copy so every batch has known-isomorphic pairs
            let p = Permutation::random(n, &mut rng);
            let gp = apply_permutation(&g, &p).unwrap();
            graphs.push(g);
            graphs.push(gp);
        }
        assert_code_oracle_agreement(&graphs);
    }
}
