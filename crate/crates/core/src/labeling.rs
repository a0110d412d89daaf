//! Node labeling tricks: zero-one, DRNL, DE, DE⁺, and an all-one control
//! that is deliberately invalid.
//!
//! A labeling trick must (1) give target nodes labels that pin down the
//! target set and (2) be permutation equivariant. [`validate_scheme`]
//! checks both conditions empirically over a corpus: condition (2) by
//! direct comparison under random permutations, condition (1) via a
//! per-graph disjointness check plus an oracle-driven witness search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{self, Dist, Graph, Permutation, Subgraph, TargetSet, INF};
use crate::iso;

/// Label given to target nodes by DRNL and by the zero-one scheme.
pub const TARGET_LABEL: u64 = 1;
/// Null label DRNL gives to nodes that cannot reach a target.
pub const NULL_LABEL: u64 = 0;
/// Default distance cap for DE.
pub const DEFAULT_DE_CAP: Dist = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    ZeroOne,
    Drnl,
    De,
    DePlus,
    /// Labels every node 1; kept as a control that must fail validation.
    AllOne,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::ZeroOne => "zero-one",
            SchemeKind::Drnl => "drnl",
            SchemeKind::De => "de",
            SchemeKind::DePlus => "de+",
            SchemeKind::AllOne => "all-one",
        }
    }
}

/// A labeling scheme plus its optional distance cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelingScheme {
    kind: SchemeKind,
    d_max: Option<Dist>,
}

impl LabelingScheme {
    pub fn new(kind: SchemeKind, d_max: Option<Dist>) -> Result<Self> {
        if let Some(c) = d_max {
            if c < 1 {
                return Err(Error::InvalidArgument("d_max must be >= 1".into()));
            }
            if !matches!(kind, SchemeKind::De | SchemeKind::DePlus) {
                return Err(Error::InvalidArgument(format!(
                    "{} takes no distance cap",
                    kind.name()
                )));
            }
        }
        if kind == SchemeKind::De && d_max.is_none() {
            return Err(Error::InvalidArgument("de requires a distance cap".into()));
        }
        Ok(LabelingScheme { kind, d_max })
    }

    pub fn zero_one() -> Self {
        LabelingScheme { kind: SchemeKind::ZeroOne, d_max: None }
    }

    pub fn drnl() -> Self {
        LabelingScheme { kind: SchemeKind::Drnl, d_max: None }
    }

    /// DE with the default cap of 3.
    pub fn de() -> Self {
        LabelingScheme { kind: SchemeKind::De, d_max: Some(DEFAULT_DE_CAP) }
    }

    pub fn de_with_cap(d_max: Dist) -> Result<Self> {
        LabelingScheme::new(SchemeKind::De, Some(d_max))
    }

    /// DE⁺: masked distances, uncapped unless a cap is given.
    pub fn de_plus(d_max: Option<Dist>) -> Result<Self> {
        LabelingScheme::new(SchemeKind::DePlus, d_max)
    }

    pub fn all_one() -> Self {
        LabelingScheme { kind: SchemeKind::AllOne, d_max: None }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn d_max(&self) -> Option<Dist> {
        self.d_max
    }

    /// The all-one control is known-invalid; everything else is expected
    /// to pass validation.
    pub fn is_valid_by_design(&self) -> bool {
        self.kind != SchemeKind::AllOne
    }

    /// Code a DE⁺ pair coordinate uses for an unreachable target.
    pub fn unreachable_code(&self) -> Dist {
        match self.d_max {
            Some(c) => c + 1,
            None => INF,
        }
    }
}

/// Per-node labels: one integer per node, or one distance-code pair per
/// node for the DE family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabels {
    Scalar(Vec<u64>),
    Pairs(Vec<(Dist, Dist)>),
}

impl NodeLabels {
    pub fn len(&self) -> usize {
        match self {
            NodeLabels::Scalar(v) => v.len(),
            NodeLabels::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Injective encoding of each label as a color for WL refinement and
    /// the canonical-code oracle.
    ///
    /// Distance pairs are encoded as unordered multisets (sorted), the
    /// discrete counterpart of sum-pooling the two coordinate embeddings:
    /// which target counts as "first" is an artifact of target order, and
    /// a set-isomorphism is free to swap the endpoints.
    pub fn as_colors(&self) -> Vec<u64> {
        match self {
            NodeLabels::Scalar(v) => v.clone(),
            NodeLabels::Pairs(v) => v
                .iter()
                .map(|&(a, b)| ((a.min(b) as u64) << 32) | a.max(b) as u64)
                .collect(),
        }
    }

    /// Text form of one node's label; pair coordinates are comma-joined
    /// and the reserved unreachable sentinel prints as `inf`.
    pub fn render(&self, i: usize) -> String {
        match self {
            NodeLabels::Scalar(v) => v[i].to_string(),
            NodeLabels::Pairs(v) => {
                format!("{},{}", graph::fmt_dist(v[i].0), graph::fmt_dist(v[i].1))
            }
        }
    }

    /// True when no label value occurs both on a target and a non-target.
    pub fn targets_disjoint(&self, targets: &TargetSet) -> bool {
        let colors = self.as_colors();
        let target_vals: std::collections::HashSet<u64> = targets
            .as_slice()
            .iter()
            .map(|&t| colors[t])
            .collect();
        colors
            .iter()
            .enumerate()
            .all(|(i, c)| targets.contains(i) || !target_vals.contains(c))
    }
}

/// Closed-form DRNL label for a non-target node with finite masked
/// distances (d_x, d_y) to the two targets, both >= 1:
/// `1 + min(d_x, d_y) + (d/2) * (d/2 + d%2 - 1)` with `d = d_x + d_y`.
pub fn drnl_hash(d_x: Dist, d_y: Dist) -> Result<u64> {
    if d_x == 0 || d_y == 0 || d_x == INF || d_y == INF {
        return Err(Error::InvalidArgument(format!(
            "drnl_hash needs finite distances >= 1, got ({}, {})",
            graph::fmt_dist(d_x),
            graph::fmt_dist(d_y)
        )));
    }
    let (dx, dy) = (d_x as u64, d_y as u64);
    let d = dx + dy;
    let (q, r) = (d / 2, d % 2);
    Ok(1 + dx.min(dy) + q * (q + r - 1))
}

/// Independent reference for [`drnl_hash`]: walk radius pairs in the order
/// "smaller total distance first, then smaller minimum radius", handing
/// out consecutive labels from 2. Quadratic, but obviously faithful to the
/// verbal description of the scheme.
pub fn drnl_label_by_enumeration(d_x: Dist, d_y: Dist) -> Result<u64> {
    if d_x == 0 || d_y == 0 || d_x == INF || d_y == INF {
        return Err(Error::InvalidArgument("enumeration needs finite distances >= 1".into()));
    }
    let total = d_x as u64 + d_y as u64;
    let min = d_x.min(d_y) as u64;
    let mut label = 2u64;
    let mut d = 2u64;
    loop {
        for m in 1..=(d / 2) {
            if d == total && m == min {
                return Ok(label);
            }
            label += 1;
        }
        d += 1;
    }
}

/// Applies a labeling scheme to an enclosing subgraph.
///
/// * zero-one: targets 1, rest 0.
/// * drnl: targets 1, unreachable 0, rest hashed from masked distances.
/// * de: `(min(d_x, cap), min(d_y, cap))` from unmasked distances.
/// * de+: masked distances, optional cap, unreachable mapped to a
///   reserved code distinct from every finite one.
/// * all-one: 1 everywhere (the known-invalid control).
pub fn apply_labeling(scheme: &LabelingScheme, sg: &Subgraph) -> Result<NodeLabels> {
    let n = sg.num_nodes();
    let targets = &sg.targets;
    match scheme.kind {
        SchemeKind::ZeroOne => Ok(NodeLabels::Scalar(
            (0..n)
                .map(|i| if targets.contains(i) { TARGET_LABEL } else { 0 })
                .collect(),
        )),
        SchemeKind::AllOne => Ok(NodeLabels::Scalar(vec![1; n])),
        SchemeKind::Drnl => {
            require_pair(targets, "drnl")?;
            let dx = &sg.dist_to_target[0];
            let dy = &sg.dist_to_target[1];
            let labels: Result<Vec<u64>> = (0..n)
                .map(|i| {
                    if targets.contains(i) {
                        Ok(TARGET_LABEL)
                    } else if dx[i] == INF || dy[i] == INF {
                        Ok(NULL_LABEL)
                    } else {
                        drnl_hash(dx[i], dy[i])
                    }
                })
                .collect();
            Ok(NodeLabels::Scalar(labels?))
        }
        SchemeKind::De => {
            require_pair(targets, "de")?;
            let cap = scheme.d_max.expect("de always carries a cap");
            let ts = targets.as_slice();
            let dx = graph::bfs_distances(&sg.graph, ts[0], &[])?;
            let dy = graph::bfs_distances(&sg.graph, ts[1], &[])?;
            Ok(NodeLabels::Pairs(
                (0..n).map(|i| (dx[i].min(cap), dy[i].min(cap))).collect(),
            ))
        }
        SchemeKind::DePlus => {
            require_pair(targets, "de+")?;
            let unreachable = scheme.unreachable_code();
            let code = |d: Dist| {
                if d == INF {
                    unreachable
                } else {
                    match scheme.d_max {
                        Some(c) => d.min(c),
                        None => d,
                    }
                }
            };
            let dx = &sg.dist_to_target[0];
            let dy = &sg.dist_to_target[1];
            Ok(NodeLabels::Pairs(
                (0..n).map(|i| (code(dx[i]), code(dy[i]))).collect(),
            ))
        }
    }
}

fn require_pair(targets: &TargetSet, scheme: &str) -> Result<()> {
    if targets.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "{scheme} labels links; target set has size {}",
            targets.len()
        )));
    }
    Ok(())
}

/// One counterexample found by the validity checker.
#[derive(Debug, Clone)]
pub struct ValidityViolation {
    /// Index of the offending corpus entry (and its partner, if any).
    pub corpus_index: usize,
    pub partner_index: Option<usize>,
    pub detail: String,
}

/// Outcome of checking the two labeling-trick conditions over a corpus.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub scheme: String,
    pub corpus_size: usize,
    pub trials: usize,
    /// Condition (1), per-graph surrogate: a label value shared between a
    /// target and a non-target.
    pub disjointness_violations: Vec<ValidityViolation>,
    /// Condition (1), witness search: a label-preserving isomorphism that
    /// does not map one target set onto the other.
    pub witness_violations: Vec<ValidityViolation>,
    /// Condition (2): labels not equivariant under a sampled permutation.
    pub equivariance_violations: Vec<ValidityViolation>,
}

impl ValidityReport {
    pub fn condition1_failures(&self) -> usize {
        self.disjointness_violations.len() + self.witness_violations.len()
    }

    pub fn passed(&self) -> bool {
        self.condition1_failures() == 0 && self.equivariance_violations.is_empty()
    }
}

/// Labels a whole graph (no hop truncation) under a scheme.
pub fn label_whole_graph(
    scheme: &LabelingScheme,
    g: &Graph,
    targets: &TargetSet,
) -> Result<NodeLabels> {
    apply_labeling(scheme, &Subgraph::whole(g, targets)?)
}

/// Empirically checks the two labeling-trick conditions on a corpus.
///
/// Condition (2) is checked directly: for `trials` random permutations pi
/// per entry, labels computed on the relabeled graph must equal the
/// permuted labels. Condition (1) is checked by the disjointness surrogate
/// plus a witness search over canonical-code buckets: within a bucket of
/// label-isomorphic graphs, every label-preserving automorphism must fix
/// the target set and every cross-member witness must map target set to
/// target set. Together with transitivity this covers all corpus pairs:
/// if some label-preserving isomorphism between two entries moved a
/// target set, either some member's automorphism moves its own target set
/// or some member's witness against its bucket representative does.
pub fn validate_scheme(
    scheme: &LabelingScheme,
    corpus: &[(Graph, TargetSet)],
    trials: usize,
    seed: u64,
) -> Result<ValidityReport> {
    let mut report = ValidityReport {
        scheme: scheme.kind.name().to_owned(),
        corpus_size: corpus.len(),
        trials,
        disjointness_violations: Vec::new(),
        witness_violations: Vec::new(),
        equivariance_violations: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut labeled: Vec<Vec<u64>> = Vec::with_capacity(corpus.len());
    for (idx, (g, s)) in corpus.iter().enumerate() {
        let labels = label_whole_graph(scheme, g, s)?;

        // condition (1) surrogate: targets must not share values with the rest
        if !labels.targets_disjoint(s) {
            report.disjointness_violations.push(ValidityViolation {
                corpus_index: idx,
                partner_index: None,
                detail: format!(
                    "target label value also appears on a non-target (targets {:?})",
                    s.as_slice()
                ),
            });
        }

        // condition (2): equivariance under random relabelings
        for trial in 0..trials {
            let p = Permutation::random(g.num_nodes(), &mut rng);
            let gp = graph::apply_permutation(g, &p)?;
            let sp = s.mapped(&p);
            let lp = label_whole_graph(scheme, &gp, &sp)?;
            let ok = match (&labels, &lp) {
                (NodeLabels::Scalar(a), NodeLabels::Scalar(b)) => {
                    (0..a.len()).all(|i| b[p.apply(i)] == a[i])
                }
                (NodeLabels::Pairs(a), NodeLabels::Pairs(b)) => {
                    (0..a.len()).all(|i| b[p.apply(i)] == a[i])
                }
                _ => false,
            };
            if !ok {
                report.equivariance_violations.push(ValidityViolation {
                    corpus_index: idx,
                    partner_index: None,
                    detail: format!("labels not equivariant under trial-{trial} permutation"),
                });
                break;
            }
        }

        labeled.push(labels.as_colors());
    }

    // condition (1) witness search over label-isomorphism classes
    let mut buckets: std::collections::BTreeMap<iso::CanonicalCode, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (idx, (g, _)) in corpus.iter().enumerate() {
        let code = iso::canonical_code(g, &labeled[idx], &TargetSet::empty())?;
        buckets.entry(code).or_default().push(idx);
    }
    for members in buckets.values() {
        for &idx in members {
            let (g, s) = &corpus[idx];
            // a label-preserving automorphism moving the target set breaks (1)
            let moving = iso::search_colored_isomorphisms(
                g,
                &labeled[idx],
                g,
                &labeled[idx],
                |p| !s.mapped(p).same_set(s),
            )?;
            if moving.is_some() {
                report.witness_violations.push(ValidityViolation {
                    corpus_index: idx,
                    partner_index: Some(idx),
                    detail: format!(
                        "label-preserving automorphism moves target set {:?}",
                        s.as_slice()
                    ),
                });
            }
        }
        let rep = members[0];
        for &idx in &members[1..] {
            let (g_rep, s_rep) = &corpus[rep];
            let (g, s) = &corpus[idx];
            let witness =
                iso::search_colored_isomorphisms(g_rep, &labeled[rep], g, &labeled[idx], |_| {
                    true
                })?
                .expect("bucket members share a canonical code");
            if !s.mapped(&witness).same_set(s_rep) {
                report.witness_violations.push(ValidityViolation {
                    corpus_index: rep,
                    partner_index: Some(idx),
                    detail: "label-preserving isomorphism maps target set elsewhere".into(),
                });
            }
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn path_xay() -> Subgraph {
        // x(0) - a(1) - y(2), targets {x, y}
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        crate::graph::extract_enclosing_subgraph(&g, &TargetSet::pair(0, 2).unwrap(), 1).unwrap()
    }

    #[test]
    fn hash_matches_published_values() {
        assert_eq!(drnl_hash(1, 1).unwrap(), 2);
        assert_eq!(drnl_hash(1, 2).unwrap(), 3);
        assert_eq!(drnl_hash(2, 2).unwrap(), 5);
        assert_eq!(drnl_hash(1, 4).unwrap(), 6);
        assert_eq!(drnl_hash(2, 3).unwrap(), 7);
    }

    #[test]
    fn hash_rejects_degenerate_inputs() {
        assert!(drnl_hash(0, 1).is_err());
        assert!(drnl_hash(1, INF).is_err());
    }

    #[test]
    fn drnl_on_path() {
        let sub = path_xay();
        let labels = apply_labeling(&LabelingScheme::drnl(), &sub).unwrap();
        assert_eq!(labels, NodeLabels::Scalar(vec![1, 2, 1]));
    }

    #[test]
    fn zero_one_on_path() {
        let sub = path_xay();
        let labels = apply_labeling(&LabelingScheme::zero_one(), &sub).unwrap();
        assert_eq!(labels, NodeLabels::Scalar(vec![1, 0, 1]));
    }

    #[test]
    fn de_uses_unmasked_distances() {
        // On the path, y is two unmasked hops from x (via a).
        let sub = path_xay();
        let labels = apply_labeling(&LabelingScheme::de(), &sub).unwrap();
        assert_eq!(labels, NodeLabels::Pairs(vec![(0, 2), (1, 1), (2, 0)]));

        // With the target edge present the targets sit one hop apart.
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let sub_tri =
            crate::graph::extract_enclosing_subgraph(&tri, &TargetSet::pair(0, 2).unwrap(), 1)
                .unwrap();
        let labels_tri = apply_labeling(&LabelingScheme::de(), &sub_tri).unwrap();
        assert_eq!(labels_tri, NodeLabels::Pairs(vec![(0, 1), (1, 1), (1, 0)]));
    }

    #[test]
    fn de_plus_uses_masked_distances_and_sentinel() {
        let sub = path_xay();
        // masked: each target cannot reach the other, so the cross
        // coordinate is the unreachable code (cap + 1 = 4 here).
        let scheme = LabelingScheme::de_plus(Some(3)).unwrap();
        let labels = apply_labeling(&scheme, &sub).unwrap();
        assert_eq!(labels, NodeLabels::Pairs(vec![(0, 4), (1, 1), (4, 0)]));

        let uncapped = LabelingScheme::de_plus(None).unwrap();
        let labels = apply_labeling(&uncapped, &sub).unwrap();
        assert_eq!(labels, NodeLabels::Pairs(vec![(0, INF), (1, 1), (INF, 0)]));
    }

    #[test]
    fn drnl_nulls_unreachable_nodes() {
        // two disjoint edges, targets straddling the components
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]);
        let sub = Subgraph::whole(&g, &TargetSet::pair(0, 2).unwrap()).unwrap();
        let labels = apply_labeling(&LabelingScheme::drnl(), &sub).unwrap();
        assert_eq!(labels, NodeLabels::Scalar(vec![1, 0, 1, 0]));
    }

    #[test]
    fn all_one_labels_everything_one() {
        let sub = path_xay();
        let labels = apply_labeling(&LabelingScheme::all_one(), &sub).unwrap();
        assert_eq!(labels, NodeLabels::Scalar(vec![1, 1, 1]));
        assert!(!labels.targets_disjoint(&sub.targets));
    }

    #[test]
    fn link_schemes_reject_single_targets() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        let sub = Subgraph::whole(&g, &TargetSet::single(0)).unwrap();
        assert!(apply_labeling(&LabelingScheme::drnl(), &sub).is_err());
        assert!(apply_labeling(&LabelingScheme::de(), &sub).is_err());
    }

    #[test]
    fn validity_small_corpus() {
        let corpus: Vec<(Graph, TargetSet)> = vec![
            (corpus::path(4), TargetSet::pair(0, 1).unwrap()),
            (corpus::cycle(5), TargetSet::pair(0, 2).unwrap()),
            (corpus::star(3), TargetSet::pair(1, 2).unwrap()),
        ];
        let ok = validate_scheme(&LabelingScheme::zero_one(), &corpus, 20, 11).unwrap();
        assert!(ok.passed(), "{ok:?}");
        let ok = validate_scheme(&LabelingScheme::drnl(), &corpus, 20, 11).unwrap();
        assert!(ok.passed(), "{ok:?}");

        // all-one: path 0-1-2-3 with S={0,1} reverses onto {3,2}
        let bad = validate_scheme(&LabelingScheme::all_one(), &corpus, 20, 11).unwrap();
        assert!(bad.condition1_failures() > 0);
    }

    #[test]
    fn render_uses_inf_literal() {
        let labels = NodeLabels::Pairs(vec![(1, INF)]);
        assert_eq!(labels.render(0), "1,inf");
    }
}
