//! Property suites for the labeling schemes: hash/enumeration agreement,
//! injectivity, equivariance, and the DRNL / uncapped-DE⁺ partition
//! equivalence.

use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linklab_core::corpus;
use linklab_core::graph::{extract_enclosing_subgraph, Graph, Subgraph, TargetSet, INF};
use linklab_core::labeling::{
    apply_labeling, drnl_hash, drnl_label_by_enumeration, validate_scheme, LabelingScheme,
    NodeLabels,
};

#[test]
fn hash_matches_enumeration_for_all_small_radii() {
    // every pair with total distance <= 100
    for d in 2u32..=100 {
        for dx in 1..d {
            let dy = d - dx;
            assert_eq!(
                drnl_hash(dx, dy).unwrap(),
                drnl_label_by_enumeration(dx, dy).unwrap(),
                "mismatch at ({dx},{dy})"
            );
        }
    }
}

#[test]
fn hash_is_symmetric_and_injective_on_unordered_pairs() {
    let mut seen: HashMap<u64, (u32, u32)> = HashMap::new();
    for dx in 1u32..=50 {
        for dy in dx..=50 {
            let h = drnl_hash(dx, dy).unwrap();
            assert_eq!(h, drnl_hash(dy, dx).unwrap());
            if let Some(prev) = seen.insert(h, (dx, dy)) {
                panic!("hash collision: {prev:?} and ({dx},{dy}) both map to {h}");
            }
        }
    }
}

fn random_link_subgraph(rng: &mut ChaCha8Rng) -> Subgraph {
    loop {
        let n = rng.random_range(4..10);
        let g = corpus::random_graph(n, 0.35, rng);
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let s = TargetSet::pair(u, v).unwrap();
        let h = rng.random_range(1..3);
        return extract_enclosing_subgraph(&g, &s, h).unwrap();
    }
}

#[test]
fn uncapped_de_plus_partitions_nodes_like_drnl() {
    // With targets and unreachable nodes mapped through DRNL's
    // conventions and the pair read as unordered, the uncapped masked
    // distance pair carries exactly the information DRNL hashes.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let de_plus = LabelingScheme::de_plus(None).unwrap();
    for _ in 0..1000 {
        let sub = random_link_subgraph(&mut rng);
        let drnl = match apply_labeling(&LabelingScheme::drnl(), &sub).unwrap() {
            NodeLabels::Scalar(v) => v,
            _ => unreachable!(),
        };
        let pairs = match apply_labeling(&de_plus, &sub).unwrap() {
            NodeLabels::Pairs(v) => v,
            _ => unreachable!(),
        };
        #[derive(PartialEq, Eq, Hash, Clone)]
        enum Key {
            Target,
            Null,
            Pair(u32, u32),
        }
        let keys: Vec<Key> = (0..sub.num_nodes())
            .map(|i| {
                if sub.targets.contains(i) {
                    Key::Target
                } else if pairs[i].0 == INF || pairs[i].1 == INF {
                    Key::Null
                } else {
                    Key::Pair(pairs[i].0.min(pairs[i].1), pairs[i].0.max(pairs[i].1))
                }
            })
            .collect();
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                assert_eq!(
                    drnl[i] == drnl[j],
                    keys[i] == keys[j],
                    "partition mismatch at nodes {i},{j}: drnl ({},{}) pairs {:?} {:?}",
                    drnl[i],
                    drnl[j],
                    pairs[i],
                    pairs[j]
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn valid_schemes_are_equivariant_on_random_graphs(
        n in 2usize..8,
        bits in any::<u64>(),
        pair_pick in any::<u64>(),
        seed in any::<u64>(),
    ) {
        let slots = corpus::all_pairs(n);
        let edges: Vec<_> = slots
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> (k % 64) & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::from_edges(n, &edges);
        let (u, v) = slots[(pair_pick as usize) % slots.len()];
        let corpus_item = vec![(g, TargetSet::pair(u, v).unwrap())];
        for scheme in [
            LabelingScheme::zero_one(),
            LabelingScheme::drnl(),
            LabelingScheme::de(),
            LabelingScheme::de_plus(None).unwrap(),
            LabelingScheme::de_plus(Some(2)).unwrap(),
        ] {
            let report = validate_scheme(&scheme, &corpus_item, 25, seed).unwrap();
            prop_assert!(
                report.equivariance_violations.is_empty(),
                "{} not equivariant: {:?}",
                scheme.kind().name(),
                report.equivariance_violations
            );
        }
    }
}

#[test]
fn all_one_fails_on_a_symmetric_graph() {
    // the 4-cycle's rotation moves {0,1} to {1,2}
    let corpus_items = vec![(corpus::cycle(4), TargetSet::pair(0, 1).unwrap())];
    let report = validate_scheme(&LabelingScheme::all_one(), &corpus_items, 5, 3).unwrap();
    assert!(report.condition1_failures() > 0);
    assert!(!report.witness_violations.is_empty());
}
