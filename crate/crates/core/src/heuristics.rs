//! Classical neighborhood heuristics, used both as baselines and as
//! sanity oracles for the learned models.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

fn check_pair(g: &Graph, u: NodeId, v: NodeId) -> Result<()> {
    if u == v {
        return Err(Error::InvalidArgument(format!("heuristic needs u != v, got ({u},{u})")));
    }
    if u >= g.num_nodes() || v >= g.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "pair ({u},{v}) out of range for {} nodes",
            g.num_nodes()
        )));
    }
    Ok(())
}

/// Walks two sorted neighbor lists in lockstep, yielding common entries.
fn common<'a>(
    mut a: std::slice::Iter<'a, NodeId>,
    mut b: std::slice::Iter<'a, NodeId>,
) -> Vec<NodeId> {
    let mut out = Vec::new();
    let (mut x, mut y) = (a.next(), b.next());
    while let (Some(&i), Some(&j)) = (x, y) {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => x = a.next(),
            std::cmp::Ordering::Greater => y = b.next(),
            std::cmp::Ordering::Equal => {
                out.push(i);
                x = a.next();
                y = b.next();
            }
        }
    }
    out
}

/// Number of common neighbors of u and v.
pub fn common_neighbors(g: &Graph, u: NodeId, v: NodeId) -> Result<usize> {
    check_pair(g, u, v)?;
    Ok(common(g.neighbors(u).iter(), g.neighbors(v).iter()).len())
}

/// Adamic-Adar score: sum of 1/ln(deg(z)) over common neighbors z. Every
/// common neighbor has degree >= 2 by construction, so the logarithm is
/// positive.
pub fn adamic_adar(g: &Graph, u: NodeId, v: NodeId) -> Result<f64> {
    check_pair(g, u, v)?;
    Ok(common(g.neighbors(u).iter(), g.neighbors(v).iter())
        .iter()
        .map(|&z| 1.0 / (g.degree(z) as f64).ln())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn reference_graph_counts() {
        let (g, v) = corpus::bridged_triangles();
        assert_eq!(common_neighbors(&g, v.v1, v.v2).unwrap(), 1);
        assert_eq!(common_neighbors(&g, v.v1, v.v3).unwrap(), 0);
    }

    #[test]
    fn triangle_edge_has_one_common_neighbor() {
        let g = corpus::complete(3);
        assert_eq!(common_neighbors(&g, 0, 1).unwrap(), 1);
    }

    #[test]
    fn disjoint_edges_share_nothing() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(common_neighbors(&g, 0, 2).unwrap(), 0);
    }

    #[test]
    fn adamic_adar_closed_forms() {
        // path 0-2-1: one common neighbor of degree 2
        let g = Graph::from_edges(3, &[(0, 2), (1, 2)]);
        let aa = adamic_adar(&g, 0, 1).unwrap();
        assert!((aa - 1.0 / 2f64.ln()).abs() < 1e-12);

        // common neighbors 2 (degree 2) and 3 (degree 3)
        let g = Graph::from_edges(5, &[(0, 2), (1, 2), (0, 3), (1, 3), (3, 4)]);
        let aa = adamic_adar(&g, 0, 1).unwrap();
        assert!((aa - (1.0 / 2f64.ln() + 1.0 / 3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn no_common_neighbors_scores_zero() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(adamic_adar(&g, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn same_node_rejected() {
        let g = corpus::complete(3);
        assert!(common_neighbors(&g, 1, 1).is_err());
        assert!(adamic_adar(&g, 1, 1).is_err());
    }

    #[test]
    fn agrees_with_hash_set_intersection_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let g = corpus::random_graph(40, 0.2, &mut rng);
        for _ in 0..1000 {
            let u = rng.random_range(0..40);
            let v = rng.random_range(0..40);
            if u == v {
                continue;
            }
            let brute = {
                let a: std::collections::HashSet<usize> = g.neighbors(u).iter().copied().collect();
                let b: std::collections::HashSet<usize> = g.neighbors(v).iter().copied().collect();
                a.intersection(&b).count()
            };
            let cn = common_neighbors(&g, u, v).unwrap();
            assert_eq!(cn, brute);
            // symmetric, bounded, and zero exactly when AA is zero
            assert_eq!(cn, common_neighbors(&g, v, u).unwrap());
            assert!(cn <= g.degree(u).min(g.degree(v)));
            let aa = adamic_adar(&g, u, v).unwrap();
            assert_eq!(cn == 0, aa == 0.0);
        }
    }
}
