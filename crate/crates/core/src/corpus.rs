//! Deterministic graph generators used by tests, property suites, and the
//! verification pipelines.

use rand::Rng;

use crate::graph::{Graph, NodeId};

/// Named nodes of the reference constructions below.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceNodes {
    pub v1: NodeId,
    pub v2: NodeId,
    pub v3: NodeId,
    pub v4: NodeId,
    pub u: NodeId,
    pub w: NodeId,
}

/// Two triangles (v1,v2,u) and (v3,v4,w) joined by the bridge (u,w).
///
/// The construction realizes all the relations the expressiveness tests
/// need: v2 and v3 are isomorphic nodes, {v1,v2} and {v4,v3} are
/// isomorphic pairs, {v1,v2} and {v1,v3} are not, and the pairs have
/// common-neighbor counts 1 and 0 respectively.
pub fn bridged_triangles() -> (Graph, ReferenceNodes) {
    let v = ReferenceNodes { v1: 0, v2: 1, v3: 2, v4: 3, u: 4, w: 5 };
    let g = Graph::from_edges(
        6,
        &[
            (v.v1, v.v2),
            (v.v1, v.u),
            (v.v2, v.u),
            (v.v3, v.v4),
            (v.v4, v.w),
            (v.v3, v.w),
            (v.u, v.w),
        ],
    );
    (g, v)
}

/// Sparser sibling of [`bridged_triangles`]: two cherries joined by a
/// bridge — v1,v2 hang off u and v3,v4 hang off w, with the (v1,v2) and
/// (v3,v4) edges absent. Here the one-labeled copies for {v1,v2} and
/// {v1,v3} stay indistinguishable for exactly one refinement round, which
/// makes it the cleanest demo of why two message-passing rounds matter.
pub fn bridged_cherries() -> (Graph, ReferenceNodes) {
    let v = ReferenceNodes { v1: 0, v2: 1, v3: 2, v4: 3, u: 4, w: 5 };
    let g = Graph::from_edges(
        6,
        &[(v.v1, v.u), (v.v2, v.u), (v.v3, v.w), (v.v4, v.w), (v.u, v.w)],
    );
    (g, v)
}

/// Path 0-1-...-(n-1).
pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges)
}

/// Cycle over n nodes (n >= 3).
pub fn cycle(n: usize) -> Graph {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    edges.push((n - 1, 0));
    Graph::from_edges(n, &edges)
}

/// Star with the center at node 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_edges(leaves + 1, &edges)
}

/// Complete graph on n nodes.
pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

/// Every graph on exactly `n` labeled nodes (2^(n choose 2) of them).
/// Meant for n <= 5.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let slots: Vec<(usize, usize)> = {
        let mut s = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                s.push((u, v));
            }
        }
        s
    };
    let count = 1u64 << slots.len();
    (0..count)
        .map(|bits| {
            let edges: Vec<_> = slots
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Graph::from_edges(n, &edges)
        })
        .collect()
}

/// All unordered node pairs of an n-node graph, as (u, v) with u < v.
pub fn all_pairs(n: usize) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            out.push((u, v));
        }
    }
    out
}

/// Erdos-Renyi G(n, p).
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Random d-regular simple graph via the pairing model (rejection on
/// self-loops and duplicate edges). Requires n*d even and d < n.
pub fn random_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Graph {
    assert!((n * d).is_multiple_of(2), "n*d must be even");
    assert!(d < n, "degree must be below n");
    use rand::seq::SliceRandom;
    for _ in 0..10_000 {
        let mut stubs: Vec<NodeId> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut ok = true;
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                ok = false;
                break;
            }
            edges.push((u, v));
        }
        if ok {
            return Graph::from_edges(n, &edges);
        }
    }
    panic!("pairing model failed to produce a simple {d}-regular graph on {n} nodes");
}

/// Two-community stochastic block model with contiguous equal-size blocks.
pub fn stochastic_block<R: Rng>(n: usize, p_in: f64, p_out: f64, rng: &mut R) -> Graph {
    let half = n / 2;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let same = (u < half) == (v < half);
            let p = if same { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exhaustive_count_matches() {
        assert_eq!(all_graphs(3).len(), 8);
        assert_eq!(all_graphs(4).len(), 64);
    }

    #[test]
    fn regular_generator_is_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_regular(16, 3, &mut rng);
        assert!((0..16).all(|i| g.degree(i) == 3));
    }

    #[test]
    fn reference_graph_shape() {
        let (g, v) = bridged_triangles();
        assert_eq!(g.num_edges(), 7);
        assert_eq!(g.degree(v.u), 3);
        assert_eq!(g.degree(v.v1), 2);
        let (g2, _) = bridged_cherries();
        assert_eq!(g2.num_edges(), 5);
    }
}
