//! Ranking metrics (Hits@K, MRR) and seeded edge splitting with negative
//! sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Fraction of positives scoring strictly above the K-th highest negative.
pub fn hits_at_k(pos_scores: &[f64], neg_scores: &[f64], k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    if neg_scores.len() < k {
        return Err(Error::InvalidArgument(format!(
            "need at least K={k} negatives, got {}",
            neg_scores.len()
        )));
    }
    if pos_scores.is_empty() {
        return Err(Error::InvalidArgument("no positive scores".into()));
    }
    let mut neg = neg_scores.to_vec();
    neg.sort_by(|a, b| b.total_cmp(a));
    let threshold = neg[k - 1];
    let hits = pos_scores.iter().filter(|&&s| s > threshold).count();
    Ok(hits as f64 / pos_scores.len() as f64)
}

/// Mean reciprocal rank of each true score against its negatives; a tied
/// negative ranks the positive below it.
pub fn mrr(groups: &[(f64, Vec<f64>)]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("no MRR groups".into()));
    }
    let total: f64 = groups
        .iter()
        .map(|(true_score, negs)| {
            let rank = 1 + negs.iter().filter(|&&n| n >= *true_score).count();
            1.0 / rank as f64
        })
        .sum();
    Ok(total / groups.len() as f64)
}

/// A train/valid/test split of a graph's edges plus sampled non-edges for
/// the two evaluation splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSplit {
    pub train_pos: Vec<(NodeId, NodeId)>,
    pub valid_pos: Vec<(NodeId, NodeId)>,
    pub test_pos: Vec<(NodeId, NodeId)>,
    pub valid_neg: Vec<(NodeId, NodeId)>,
    pub test_neg: Vec<(NodeId, NodeId)>,
    pub seed: u64,
}

impl EdgeSplit {
    /// The graph a model may message-pass over: train positives only.
    pub fn train_graph(&self, num_nodes: usize) -> Graph {
        Graph::from_edges(num_nodes, &self.train_pos)
    }
}

/// Splits edges by ratio and samples `neg_per_pos` distinct non-edges per
/// evaluation positive. Deterministic given the seed.
pub fn split_edges(
    g: &Graph,
    ratios: (f64, f64, f64),
    neg_per_pos: usize,
    seed: u64,
) -> Result<EdgeSplit> {
    let (a, b, c) = ratios;
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return Err(Error::InvalidArgument("split ratios must be positive".into()));
    }
    if (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must sum to 1, got {}",
            a + b + c
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.edges();
    use rand::seq::SliceRandom;
    edges.shuffle(&mut rng);

    let m = edges.len();
    let n_valid = (m as f64 * b).round() as usize;
    let n_test = (m as f64 * c).round() as usize;
    if n_valid + n_test >= m {
        return Err(Error::InvalidArgument(format!(
            "{m} edges cannot fill a ({a},{b},{c}) split"
        )));
    }
    let n_train = m - n_valid - n_test;
    let train_pos = edges[..n_train].to_vec();
    let valid_pos = edges[n_train..n_train + n_valid].to_vec();
    let test_pos = edges[n_train + n_valid..].to_vec();

    let n = g.num_nodes();
    let wanted = neg_per_pos * (n_valid + n_test);
    let possible = n * (n - 1) / 2 - m;
    if wanted > possible {
        return Err(Error::Capacity {
            what: "negative samples (non-edges)",
            actual: wanted,
            limit: possible,
        });
    }

    let mut taken: std::collections::HashSet<(NodeId, NodeId)> = std::collections::HashSet::new();
    let mut negatives = Vec::with_capacity(wanted);
    while negatives.len() < wanted {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if taken.insert(key) {
            negatives.push(key);
        }
    }
    let valid_neg = negatives[..neg_per_pos * n_valid].to_vec();
    let test_neg = negatives[neg_per_pos * n_valid..].to_vec();

    Ok(EdgeSplit { train_pos, valid_pos, test_pos, valid_neg, test_neg, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use rand::SeedableRng;

    #[test]
    fn hits_positive_beats_all() {
        assert_eq!(hits_at_k(&[10.0], &[1.0, 2.0, 3.0], 1).unwrap(), 1.0);
    }

    #[test]
    fn hits_threshold_rule() {
        let neg = [1.0, 2.0, 4.0, 5.0];
        assert_eq!(hits_at_k(&[3.0], &neg, 2).unwrap(), 0.0);
        assert_eq!(hits_at_k(&[3.0], &neg, 3).unwrap(), 1.0);
    }

    #[test]
    fn hits_needs_enough_negatives() {
        assert!(hits_at_k(&[1.0], &[0.5], 2).is_err());
    }

    #[test]
    fn mrr_rank_one() {
        assert_eq!(mrr(&[(5.0, vec![1.0, 2.0])]).unwrap(), 1.0);
    }

    #[test]
    fn mrr_closed_form() {
        let groups = vec![
            (5.0, vec![1.0, 2.0]),          // rank 1
            (2.0, vec![3.0, 1.0]),          // rank 2
            (1.0, vec![4.0, 3.0, 2.0]),     // rank 4
        ];
        let v = mrr(&groups).unwrap();
        assert!((v - (1.0 + 0.5 + 0.25) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mrr_tie_ranks_below() {
        assert_eq!(mrr(&[(3.0, vec![3.0])]).unwrap(), 0.5);
    }

    #[test]
    fn split_ratio_arithmetic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let g = corpus::random_graph(40, 0.3, &mut rng);
        let m = g.num_edges();
        let split = split_edges(&g, (0.8, 0.1, 0.1), 2, 7).unwrap();
        assert_eq!(
            split.train_pos.len() + split.valid_pos.len() + split.test_pos.len(),
            m
        );
        let expect_valid = (m as f64 * 0.1).round() as usize;
        assert_eq!(split.valid_pos.len(), expect_valid);
        assert_eq!(split.valid_neg.len(), 2 * split.valid_pos.len());
        assert_eq!(split.test_neg.len(), 2 * split.test_pos.len());
    }

    #[test]
    fn split_is_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let g = corpus::random_graph(30, 0.3, &mut rng);
        assert_eq!(
            split_edges(&g, (0.8, 0.1, 0.1), 3, 99).unwrap(),
            split_edges(&g, (0.8, 0.1, 0.1), 3, 99).unwrap()
        );
    }

    #[test]
    fn negatives_are_fresh_non_edges() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = corpus::random_graph(25, 0.4, &mut rng);
        let split = split_edges(&g, (0.6, 0.2, 0.2), 2, 5).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in split.valid_neg.iter().chain(&split.test_neg) {
            assert_ne!(u, v);
            assert!(!g.has_edge(u, v));
            assert!(seen.insert((u, v)), "duplicate negative ({u},{v})");
        }
    }

    #[test]
    fn split_rejects_impossible_negative_count() {
        let g = corpus::complete(5); // only non-edges: none
        let err = split_edges(&g, (0.6, 0.2, 0.2), 1, 1);
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }
}
