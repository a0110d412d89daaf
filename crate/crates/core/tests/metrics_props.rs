//! Rank-metric properties against a sort-based oracle.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linklab_core::metrics::{hits_at_k, mrr};

/// Oracle: rank every positive inside the sorted negative list and count
/// how many land strictly inside the top K.
fn hits_oracle(pos: &[f64], neg: &[f64], k: usize) -> f64 {
    let hits = pos
        .iter()
        .filter(|&&p| {
            let better = neg.iter().filter(|&&n| n >= p).count();
            better < k
        })
        .count();
    hits as f64 / pos.len() as f64
}

/// Oracle: explicit rank by sorting the group's scores.
fn mrr_oracle(groups: &[(f64, Vec<f64>)]) -> f64 {
    let total: f64 = groups
        .iter()
        .map(|(t, negs)| {
            let mut all: Vec<(f64, bool)> = negs.iter().map(|&n| (n, false)).collect();
            all.push((*t, true));
            // positive sorts below equal-scored negatives
            all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let rank = all.iter().position(|&(_, is_true)| is_true).unwrap() + 1;
            1.0 / rank as f64
        })
        .sum();
    total / groups.len() as f64
}

#[test]
fn metrics_agree_with_sort_oracle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    for _ in 0..1000 {
        let np = rng.random_range(1..20);
        let nn = rng.random_range(5..40);
        let pos: Vec<f64> = (0..np).map(|_| (rng.random::<f64>() * 8.0).round() / 2.0).collect();
        let neg: Vec<f64> = (0..nn).map(|_| (rng.random::<f64>() * 8.0).round() / 2.0).collect();
        let k = rng.random_range(1..=nn);
        assert_eq!(hits_at_k(&pos, &neg, k).unwrap(), hits_oracle(&pos, &neg, k));

        let groups: Vec<(f64, Vec<f64>)> = (0..rng.random_range(1..6))
            .map(|_| {
                let t = (rng.random::<f64>() * 8.0).round() / 2.0;
                let negs: Vec<f64> = (0..rng.random_range(1..10))
                    .map(|_| (rng.random::<f64>() * 8.0).round() / 2.0)
                    .collect();
                (t, negs)
            })
            .collect();
        let got = mrr(&groups).unwrap();
        let want = mrr_oracle(&groups);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

proptest! {
    #[test]
    fn hits_is_monotone_in_k(
        pos in prop::collection::vec(-50.0f64..50.0, 1..12),
        neg in prop::collection::vec(-50.0f64..50.0, 3..30),
    ) {
        for k in 1..neg.len() {
            let a = hits_at_k(&pos, &neg, k).unwrap();
            let b = hits_at_k(&pos, &neg, k + 1).unwrap();
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn metrics_ignore_positive_scaling(
        pos in prop::collection::vec(-20.0f64..20.0, 1..10),
        neg in prop::collection::vec(-20.0f64..20.0, 3..20),
        scale in 0.1f64..40.0,
    ) {
        let k = neg.len() / 2 + 1;
        let spos: Vec<f64> = pos.iter().map(|&x| x * scale).collect();
        let sneg: Vec<f64> = neg.iter().map(|&x| x * scale).collect();
        prop_assert_eq!(
            hits_at_k(&pos, &neg, k).unwrap(),
            hits_at_k(&spos, &sneg, k).unwrap()
        );
        let g1 = vec![(pos[0], neg.clone())];
        let g2 = vec![(pos[0] * scale, sneg)];
        prop_assert_eq!(mrr(&g1).unwrap(), mrr(&g2).unwrap());
    }
}
