//! Immutable undirected graphs, permutations, masked BFS, and
//! enclosing-subgraph extraction.
//!
//! Node ids are contiguous `0..num_nodes`. Adjacency lists are strictly
//! ascending, never contain self-loops or duplicates, and the structure is
//! frozen after construction, so every operation here is pure and safe to
//! call from multiple threads on shared graphs.

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Shortest-path distance. Unreachable (or masked) nodes carry [`INF`].
pub type Dist = u32;

/// Reserved sentinel for "no finite distance"; serialized as `inf`.
pub const INF: Dist = u32::MAX;

/// Renders a distance, mapping the sentinel to the literal `inf`.
pub fn fmt_dist(d: Dist) -> String {
    if d == INF { "inf".to_owned() } else { d.to_string() }
}

/// Inverse of [`fmt_dist`].
pub fn parse_dist(s: &str) -> Result<Dist> {
    if s == "inf" {
        Ok(INF)
    } else {
        s.parse::<Dist>()
            .map_err(|e| Error::InvalidArgument(format!("bad distance {s:?}: {e}")))
    }
}

/// Immutable undirected simple graph with optional real-valued node features.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    features: Option<Vec<Vec<f64>>>,
}

/// What `parse_edge_list` saw while ingesting a file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

impl Graph {
    /// Builds a graph from an edge list over ids `< num_nodes`.
    /// Self-loops and duplicate edges are dropped.
    ///
    /// Panics on out-of-range ids; this constructor is for programmatic
    /// graphs where that is a bug, not input error.
    pub fn from_edges(num_nodes: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut adj = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            assert!(u < num_nodes && v < num_nodes, "edge ({u},{v}) out of range");
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Graph { adj, features: None }
    }

    /// Graph with `num_nodes` nodes and no edges.
    pub fn empty(num_nodes: usize) -> Self {
        Graph { adj: vec![Vec::new(); num_nodes], features: None }
    }

    /// Attaches a feature matrix (row i = features of node i).
    pub fn with_features(mut self, features: Vec<Vec<f64>>) -> Result<Self> {
        if features.len() != self.num_nodes() {
            return Err(Error::Dimension(format!(
                "feature rows {} != num_nodes {}",
                features.len(),
                self.num_nodes()
            )));
        }
        let dim = features.first().map_or(0, Vec::len);
        if features.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("ragged feature rows".into()));
        }
        if features.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adj[i]
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as (u, v) with u < v, ascending.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn features(&self) -> Option<&Vec<Vec<f64>>> {
        self.features.as_ref()
    }

    pub fn feature_dim(&self) -> usize {
        self.features
            .as_ref()
            .and_then(|f| f.first())
            .map_or(0, Vec::len)
    }

    /// Copy of the graph with one edge removed (used to hide a target edge
    /// before extraction). No-op if the edge is absent.
    pub fn without_edge(&self, u: NodeId, v: NodeId) -> Graph {
        let mut g = self.clone();
        if let Ok(pos) = g.adj[u].binary_search(&v) {
            g.adj[u].remove(pos);
        }
        if let Ok(pos) = g.adj[v].binary_search(&u) {
            g.adj[v].remove(pos);
        }
        g
    }

    /// Sorted degree sequence; a cheap isomorphism invariant.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut degs: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        degs.sort_unstable();
        degs
    }
}

/// Parses UTF-8 edge-list text: one `u v` pair per line, `#` comments and
/// blank lines ignored. Node ids are remapped to a contiguous range in
/// first-appearance order; self-loops and duplicate edges are dropped and
/// counted in the report.
pub fn parse_edge_list(text: &str) -> Result<(Graph, IngestReport)> {
    let mut remap: std::collections::HashMap<u64, NodeId> = std::collections::HashMap::new();
    let mut order: Vec<u64> = Vec::new();
    let mut raw_edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut report = IngestReport::default();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (a, b) = match (toks.next(), toks.next(), toks.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected two node ids, got {line:?}"),
                })
            }
        };
        let mut parse_id = |tok: &str| -> Result<NodeId> {
            let raw: u64 = tok.parse().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad node id {tok:?}: {e}"),
            })?;
            Ok(*remap.entry(raw).or_insert_with(|| {
                order.push(raw);
                order.len() - 1
            }))
        };
        let u = parse_id(a)?;
        let v = parse_id(b)?;
        if u == v {
            report.self_loops_dropped += 1;
            continue;
        }
        raw_edges.push((u, v));
    }

    let n = order.len();
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for (u, v) in raw_edges {
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        } else {
            report.duplicate_edges_dropped += 1;
        }
    }
    let g = Graph::from_edges(n, &edges);
    report.num_nodes = g.num_nodes();
    report.num_edges = g.num_edges();
    Ok((g, report))
}

/// Parses a header-free CSV where row i holds the features of node i.
pub fn parse_feature_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad feature value {tok:?}: {e}"),
                })
            })
            .collect();
        rows.push(row?);
    }
    Ok(rows)
}

/// A bijection on `0..n`, usable both as a relabeling and as a node
/// correspondence between two graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<NodeId>,
}

impl Permutation {
    pub fn new(mapping: Vec<NodeId>) -> Result<Self> {
        let mut sorted = mapping.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &x)| i != x) {
            return Err(Error::InvalidArgument("mapping is not a bijection".into()));
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { mapping: (0..n).collect() }
    }

    pub fn random<R: rand::Rng>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut mapping: Vec<NodeId> = (0..n).collect();
        mapping.shuffle(rng);
        Permutation { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: NodeId) -> NodeId {
        self.mapping[i]
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.mapping
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &pi) in self.mapping.iter().enumerate() {
            inv[pi] = i;
        }
        Permutation { mapping: inv }
    }
}

/// The node set a prediction is about; ordered, so distance-vector labels
/// have a stable coordinate per target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    nodes: Vec<NodeId>,
}

impl TargetSet {
    pub fn empty() -> Self {
        TargetSet { nodes: Vec::new() }
    }

    pub fn single(u: NodeId) -> Self {
        TargetSet { nodes: vec![u] }
    }

    pub fn pair(u: NodeId, v: NodeId) -> Result<Self> {
        if u == v {
            return Err(Error::InvalidArgument(format!("target pair ({u},{u}) not distinct")));
        }
        Ok(TargetSet { nodes: vec![u, v] })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, i: NodeId) -> bool {
        self.nodes.contains(&i)
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Elementwise image under a permutation (keeps target order).
    pub fn mapped(&self, p: &Permutation) -> TargetSet {
        TargetSet { nodes: self.nodes.iter().map(|&i| p.apply(i)).collect() }
    }

    /// Set equality, ignoring order.
    pub fn same_set(&self, other: &TargetSet) -> bool {
        let mut a = self.nodes.clone();
        let mut b = other.nodes.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if self.nodes.iter().any(|&i| i >= num_nodes) {
            return Err(Error::InvalidArgument(format!(
                "target set {:?} out of range for {num_nodes} nodes",
                self.nodes
            )));
        }
        Ok(())
    }
}

/// Relabels a graph: edge (i, j) becomes (p(i), p(j)) and feature row i
/// moves to row p(i).
pub fn apply_permutation(g: &Graph, p: &Permutation) -> Result<Graph> {
    if p.len() != g.num_nodes() {
        return Err(Error::Dimension(format!(
            "permutation length {} != num_nodes {}",
            p.len(),
            g.num_nodes()
        )));
    }
    let edges: Vec<(NodeId, NodeId)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (p.apply(u), p.apply(v)))
        .collect();
    let mut out = Graph::from_edges(g.num_nodes(), &edges);
    if let Some(feats) = g.features() {
        let dim = g.feature_dim();
        let mut moved = vec![vec![0.0; dim]; feats.len()];
        for (i, row) in feats.iter().enumerate() {
            moved[p.apply(i)] = row.clone();
        }
        out = out.with_features(moved)?;
    }
    Ok(out)
}

/// BFS distances from `src` with `masked` nodes (and all their edges)
/// removed first. Masked and unreachable nodes get [`INF`].
pub fn bfs_distances(g: &Graph, src: NodeId, masked: &[NodeId]) -> Result<Vec<Dist>> {
    if src >= g.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "source {src} out of range for {} nodes",
            g.num_nodes()
        )));
    }
    if masked.contains(&src) {
        return Err(Error::InvalidArgument(format!("source {src} is masked")));
    }
    let n = g.num_nodes();
    let mut is_masked = vec![false; n];
    for &m in masked {
        if m >= n {
            return Err(Error::InvalidArgument(format!("masked node {m} out of range")));
        }
        is_masked[m] = true;
    }
    let mut dist = vec![INF; n];
    dist[src] = 0;
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !is_masked[v] && dist[v] == INF {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Induced h-hop enclosing subgraph of a target set, with local ids and
/// per-target masked distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    /// local id -> original id, ascending.
    pub parent_ids: Vec<NodeId>,
    /// Induced graph over local ids (features carried over).
    pub graph: Graph,
    /// Targets in local ids, same order as the original target set.
    pub targets: TargetSet,
    /// Hop count used at extraction.
    pub hop: usize,
    /// `dist_to_target[t][i]` = masked shortest-path distance (within this
    /// subgraph) from local node i to the t-th target. For a two-target
    /// set, distances to one target are computed with the other target and
    /// its edges removed; single targets use no masking.
    pub dist_to_target: Vec<Vec<Dist>>,
}

impl Subgraph {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    /// Local id of an original node, if included.
    pub fn local_id(&self, original: NodeId) -> Option<NodeId> {
        self.parent_ids.binary_search(&original).ok()
    }

    /// Masked distances per target, computed inside an already-built graph
    /// for the given local targets.
    fn masked_distances(graph: &Graph, targets: &TargetSet) -> Result<Vec<Vec<Dist>>> {
        let ts = targets.as_slice();
        ts.iter()
            .map(|&t| {
                let masked: Vec<NodeId> =
                    ts.iter().copied().filter(|&o| o != t).collect();
                let masked = if ts.len() == 2 { masked } else { Vec::new() };
                bfs_distances(graph, t, &masked)
            })
            .collect()
    }

    /// Treats a whole graph as its own "subgraph" (identity mapping);
    /// used when a labeling is applied without hop truncation.
    pub fn whole(g: &Graph, targets: &TargetSet) -> Result<Subgraph> {
        targets.validate(g.num_nodes())?;
        let dist_to_target = Self::masked_distances(g, targets)?;
        Ok(Subgraph {
            parent_ids: (0..g.num_nodes()).collect(),
            graph: g.clone(),
            targets: targets.clone(),
            hop: g.num_nodes(),
            dist_to_target,
        })
    }
}

/// Extracts the subgraph induced by every node within `h` hops of some
/// target (plain, unmasked distances decide membership), then records
/// masked distances to each target inside the extracted subgraph.
pub fn extract_enclosing_subgraph(g: &Graph, targets: &TargetSet, h: usize) -> Result<Subgraph> {
    targets.validate(g.num_nodes())?;
    if targets.is_empty() {
        return Err(Error::InvalidArgument("empty target set".into()));
    }

    let mut keep = vec![false; g.num_nodes()];
    for &t in targets.as_slice() {
        let dist = bfs_distances(g, t, &[])?;
        for (i, &d) in dist.iter().enumerate() {
            if d != INF && (d as usize) <= h {
                keep[i] = true;
            }
        }
    }
    let parent_ids: Vec<NodeId> = (0..g.num_nodes()).filter(|&i| keep[i]).collect();
    let mut local_of = vec![usize::MAX; g.num_nodes()];
    for (local, &orig) in parent_ids.iter().enumerate() {
        local_of[orig] = local;
    }

    let mut edges = Vec::new();
    for &u in &parent_ids {
        for &v in g.neighbors(u) {
            if u < v && keep[v] {
                edges.push((local_of[u], local_of[v]));
            }
        }
    }
    let mut sub = Graph::from_edges(parent_ids.len(), &edges);
    if let Some(feats) = g.features() {
        let rows: Vec<Vec<f64>> = parent_ids.iter().map(|&i| feats[i].clone()).collect();
        sub = sub.with_features(rows)?;
    }

    let local_targets = TargetSet {
        nodes: targets.as_slice().iter().map(|&t| local_of[t]).collect(),
    };
    let dist_to_target = Subgraph::masked_distances(&sub, &local_targets)?;
    Ok(Subgraph {
        parent_ids,
        graph: sub,
        targets: local_targets,
        hop: h,
        dist_to_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_builds_path() {
        let (g, _) = parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn parse_drops_self_loops_and_duplicates() {
        let (g, rep) = parse_edge_list("0 1\n1 0\n0 0").unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(rep.self_loops_dropped, 1);
        assert_eq!(rep.duplicate_edges_dropped, 1);
    }

    #[test]
    fn parse_remaps_first_appearance() {
        // 5 -> 0, 9 -> 1, 7 -> 2
        let (g, _) = parse_edge_list("5 9\n9 7").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_empty_input_is_empty_graph() {
        let (g, rep) = parse_edge_list("").unwrap();
        assert_eq!(g.num_nodes(), 0);
        assert_eq!(rep.num_edges, 0);
    }

    #[test]
    fn parse_rejects_bad_tokens_with_line_number() {
        let err = parse_edge_list("0 1\n2 x").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let (g, _) = parse_edge_list("# header\n\n0 1\n# trailing\n").unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn permutation_identity_is_noop() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let p = Permutation::identity(3);
        assert_eq!(apply_permutation(&g, &p).unwrap(), g);
    }

    #[test]
    fn permutation_reverses_path() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let p = Permutation::new(vec![2, 1, 0]).unwrap();
        assert_eq!(apply_permutation(&g, &p).unwrap(), g);
    }

    #[test]
    fn permutation_moves_edges() {
        // triangle + pendant under reversal
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let p = Permutation::new(vec![3, 2, 1, 0]).unwrap();
        let out = apply_permutation(&g, &p).unwrap();
        assert_eq!(out.edges(), vec![(0, 1), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn permutation_length_mismatch_errors() {
        let g = Graph::from_edges(3, &[(0, 1)]);
        let p = Permutation::identity(2);
        assert!(matches!(apply_permutation(&g, &p), Err(Error::Dimension(_))));
    }

    #[test]
    fn bfs_on_path() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(bfs_distances(&g, 0, &[]).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn bfs_masking_cuts_vertex() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(bfs_distances(&g, 0, &[1]).unwrap(), vec![0, INF, INF]);
    }

    #[test]
    fn bfs_masked_cycle() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(bfs_distances(&g, 0, &[1]).unwrap(), vec![0, INF, 2, 1]);
    }

    #[test]
    fn bfs_rejects_masked_source() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        assert!(bfs_distances(&g, 0, &[0]).is_err());
    }

    #[test]
    fn subgraph_of_triangle_is_triangle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let s = TargetSet::pair(0, 1).unwrap();
        let sub = extract_enclosing_subgraph(&g, &s, 1).unwrap();
        assert_eq!(sub.parent_ids, vec![0, 1, 2]);
        assert_eq!(sub.graph.num_edges(), 3);
    }

    #[test]
    fn subgraph_of_star_drops_far_leaf() {
        // star: center 0, leaves 1,2,3; targets {1,2}, h=1
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let s = TargetSet::pair(1, 2).unwrap();
        let sub = extract_enclosing_subgraph(&g, &s, 1).unwrap();
        assert_eq!(sub.parent_ids, vec![0, 1, 2]);
        assert_eq!(sub.graph.edges(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn subgraph_h0_keeps_targets_only() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let s = TargetSet::pair(0, 1).unwrap();
        let sub = extract_enclosing_subgraph(&g, &s, 0).unwrap();
        assert_eq!(sub.parent_ids, vec![0, 1]);
        assert!(sub.graph.has_edge(0, 1));

        let g2 = Graph::from_edges(4, &[(1, 2), (2, 3)]);
        let sub2 = extract_enclosing_subgraph(&g2, &s, 0).unwrap();
        assert_eq!(sub2.parent_ids, vec![0, 1]);
        assert_eq!(sub2.graph.num_edges(), 0);
    }

    #[test]
    fn subgraph_masked_distances() {
        // path x(0) - a(1) - y(2), targets {x, y}: a sees both at masked
        // distance 1, each target sees the other as unreachable.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let s = TargetSet::pair(0, 2).unwrap();
        let sub = extract_enclosing_subgraph(&g, &s, 1).unwrap();
        assert_eq!(sub.dist_to_target[0], vec![0, 1, INF]);
        assert_eq!(sub.dist_to_target[1], vec![INF, 1, 0]);
    }

    #[test]
    fn dist_literal_roundtrip() {
        assert_eq!(fmt_dist(INF), "inf");
        assert_eq!(parse_dist("inf").unwrap(), INF);
        assert_eq!(parse_dist("3").unwrap(), 3);
    }
}
