//! 1-WL color refinement as an expressiveness analyzer and as a discrete
//! stand-in for a message-passing GNN.
//!
//! Colors are dense integers handed out in first-appearance order over
//! ascending node id. A [`WlRefiner`] keeps one interning table across
//! calls, so colors (and the link codes built from them) are comparable
//! across different graphs refined by the same refiner: two nodes get
//! equal ids at round t exactly when their whole refinement histories
//! match.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, NodeId, Subgraph, TargetSet};
use crate::iso;
use crate::labeling::{self, LabelingScheme};

/// Per-round colorings of one graph plus the first round whose partition
/// matched the previous round's (if refinement ran long enough to tell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorTrace {
    /// `rounds[0]` is the (re-indexed) initial coloring.
    pub rounds: Vec<Vec<u32>>,
    pub converged_at: Option<usize>,
}

impl ColorTrace {
    pub fn final_colors(&self) -> &[u32] {
        self.rounds.last().expect("trace holds at least the initial round")
    }

    /// Number of distinct colors in the final round.
    pub fn num_classes(&self) -> usize {
        let mut c: Vec<u32> = self.final_colors().to_vec();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// True when `next` refines `prev`: equal colors in `next` imply equal
    /// colors in `prev` (classes never merge).
    pub fn refines(prev: &[u32], next: &[u32]) -> bool {
        let mut seen: HashMap<u32, u32> = HashMap::new();
        for (&n, &p) in next.iter().zip(prev) {
            match seen.entry(n) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(p);
                }
                std::collections::hash_map::Entry::Occupied(e) => {
                    if *e.get() != p {
                        return false;
                    }
                }
            }
        }
        true
    }
}

type Signature = (u32, Vec<u32>);

/// Shared interning of initial colors and refinement signatures.
#[derive(Debug, Default)]
pub struct WlRefiner {
    init_ids: HashMap<u64, u32>,
    sig_ids: HashMap<Signature, u32>,
    next_id: u32,
}

impl WlRefiner {
    pub fn new() -> Self {
        WlRefiner::default()
    }

    fn intern_init(&mut self, raw: u64) -> u32 {
        if let Some(&id) = self.init_ids.get(&raw) {
            return id;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.init_ids.insert(raw, id);
        id
    }

    fn intern_sig(&mut self, sig: Signature) -> u32 {
        if let Some(&id) = self.sig_ids.get(&sig) {
            return id;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.sig_ids.insert(sig, id);
        id
    }

    fn one_round(&mut self, g: &Graph, colors: &[u32]) -> Vec<u32> {
        (0..g.num_nodes())
            .map(|i| {
                let mut nbr: Vec<u32> = g.neighbors(i).iter().map(|&j| colors[j]).collect();
                nbr.sort_unstable();
                self.intern_sig((colors[i], nbr))
            })
            .collect()
    }

    fn distinct(colors: &[u32]) -> usize {
        let mut c = colors.to_vec();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Refines until the partition stabilizes or `max_rounds` is hit.
    pub fn refine(&mut self, g: &Graph, init_colors: &[u64], max_rounds: usize) -> Result<ColorTrace> {
        self.run(g, init_colors, max_rounds, true)
    }

    /// Runs exactly `rounds` rounds (no early stop), so traces of several
    /// graphs stay aligned round-for-round.
    pub fn refine_exact(&mut self, g: &Graph, init_colors: &[u64], rounds: usize) -> Result<ColorTrace> {
        self.run(g, init_colors, rounds, false)
    }

    fn run(
        &mut self,
        g: &Graph,
        init_colors: &[u64],
        max_rounds: usize,
        stop_at_convergence: bool,
    ) -> Result<ColorTrace> {
        if init_colors.len() != g.num_nodes() {
            return Err(Error::Dimension(format!(
                "init colors {} != num_nodes {}",
                init_colors.len(),
                g.num_nodes()
            )));
        }
        let mut rounds =
            vec![init_colors.iter().map(|&c| self.intern_init(c)).collect::<Vec<u32>>()];
        let mut converged_at = None;
        for t in 1..=max_rounds {
            let prev = rounds.last().expect("non-empty");
            let next = self.one_round(g, prev);
            debug_assert!(ColorTrace::refines(prev, &next), "WL colors merged");
            let stable = Self::distinct(&next) == Self::distinct(prev);
            rounds.push(next);
            if stable {
                if converged_at.is_none() {
                    converged_at = Some(t);
                }
                if stop_at_convergence {
                    break;
                }
            }
        }
        Ok(ColorTrace { rounds, converged_at })
    }
}

/// One-shot refinement with a fresh table.
pub fn wl_refine(g: &Graph, init_colors: &[u64], max_rounds: usize) -> Result<ColorTrace> {
    WlRefiner::new().refine(g, init_colors, max_rounds)
}

/// Discrete link representation: the sorted multiset of the target nodes'
/// final colors, together with the whole graph's final color histogram.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkCode {
    pub target_colors: Vec<u32>,
    pub histogram: Vec<(u32, usize)>,
}

impl WlRefiner {
    /// Message-passing surrogate for a link: optionally extract the h-hop
    /// enclosing subgraph, use the labeling scheme's output as initial
    /// colors (uniform when absent), refine for exactly `rounds` rounds,
    /// then aggregate.
    ///
    /// Codes from one refiner are mutually comparable; equal inputs up to
    /// an isomorphism mapping one target set onto the other get equal
    /// codes.
    pub fn link_code(
        &mut self,
        g: &Graph,
        targets: &TargetSet,
        scheme: Option<&LabelingScheme>,
        rounds: usize,
        hop: Option<usize>,
    ) -> Result<LinkCode> {
        if rounds < 1 {
            return Err(Error::InvalidArgument("rounds must be >= 1".into()));
        }
        let sub = match hop {
            Some(h) => graph::extract_enclosing_subgraph(g, targets, h)?,
            None => Subgraph::whole(g, targets)?,
        };
        let init: Vec<u64> = match scheme {
            Some(s) => labeling::apply_labeling(s, &sub)?.as_colors(),
            None => vec![0; sub.num_nodes()],
        };
        let trace = self.refine_exact(&sub.graph, &init, rounds)?;
        let finals = trace.final_colors();

        let mut target_colors: Vec<u32> =
            sub.targets.as_slice().iter().map(|&t| finals[t]).collect();
        target_colors.sort_unstable();
        let mut hist: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in finals {
            *hist.entry(c).or_insert(0) += 1;
        }
        Ok(LinkCode { target_colors, histogram: hist.into_iter().collect() })
    }
}

/// One-shot link code with a fresh table. Only meaningful when compared
/// against nothing else; comparisons should share a [`WlRefiner`].
pub fn wl_link_code(
    g: &Graph,
    targets: &TargetSet,
    scheme: Option<&LabelingScheme>,
    rounds: usize,
    hop: Option<usize>,
) -> Result<LinkCode> {
    WlRefiner::new().link_code(g, targets, scheme, rounds, hop)
}

/// A pair of links (u,w) and (v,w) that plain h-round WL cannot tell apart
/// by node colors (u and v share a color) but that the zero-one labeling
/// separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndistinguishablePair {
    pub u: NodeId,
    pub v: NodeId,
    pub w: NodeId,
}

/// Finds link pairs ((u,w), (v,w)) where u and v get equal colors after
/// `h` uniform-init rounds, w is adjacent to u but not to v, and the
/// zero-one-labeled link codes of {u,w} and {v,w} differ. Every returned
/// pair satisfies all three clauses (the third is re-checked before a
/// pair is emitted).
pub fn find_indistinguishable_link_pairs(g: &Graph, h: usize) -> Result<Vec<IndistinguishablePair>> {
    if h < 1 {
        return Err(Error::InvalidArgument("h must be >= 1".into()));
    }
    let trace = wl_refine(g, &vec![0; g.num_nodes()], h)?;
    let colors = trace.final_colors();

    let mut by_color: BTreeMap<u32, Vec<NodeId>> = BTreeMap::new();
    for (i, &c) in colors.iter().enumerate() {
        by_color.entry(c).or_default().push(i);
    }

    let zo = LabelingScheme::zero_one();
    let mut refiner = WlRefiner::new();
    let mut out = Vec::new();
    let mut emit = |refiner: &mut WlRefiner, u: NodeId, v: NodeId| -> Result<()> {
        for &w in g.neighbors(u) {
            if w == v || g.has_edge(v, w) {
                continue;
            }
            let code_uw =
                refiner.link_code(g, &TargetSet::pair(u, w)?, Some(&zo), h, None)?;
            let code_vw =
                refiner.link_code(g, &TargetSet::pair(v, w)?, Some(&zo), h, None)?;
            if code_uw != code_vw {
                out.push(IndistinguishablePair { u, v, w });
            }
        }
        Ok(())
    };
    for class in by_color.values() {
        for i in 0..class.len() {
            for j in (i + 1)..class.len() {
                emit(&mut refiner, class[i], class[j])?;
                emit(&mut refiner, class[j], class[i])?;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReprViolationKind {
    /// Equal codes, but the oracle found no set-isomorphism.
    CodesEqualNotIsomorphic,
    /// Set-isomorphic, but the codes differ.
    IsomorphicCodesDiffer,
}

#[derive(Debug, Clone)]
pub struct ReprViolation {
    pub index_a: usize,
    pub index_b: usize,
    pub kind: ReprViolationKind,
}

/// Outcome of checking "codes equal iff set-isomorphic" over a corpus.
#[derive(Debug, Clone)]
pub struct StructuralReprReport {
    pub scheme: String,
    pub hop: Option<usize>,
    pub corpus_size: usize,
    pub num_classes: usize,
    pub violations: Vec<ReprViolation>,
}

impl StructuralReprReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the labeled-graph representation separates links exactly
/// like set-isomorphism does.
///
/// The representation imitates a maximally expressive GNN on the labeled
/// (sub)graph: each target node gets the canonical code of the labeled
/// graph with that node distinguished, and the link code is the sorted
/// multiset of its targets' node codes (an injective aggregation). The
/// check asserts, for every corpus pair, code equality iff the unlabeled
/// (targets, subgraph) pairs are set-isomorphic. Pairs are covered
/// through equivalence classes: within a code class each member is
/// checked isomorphic to the class representative, and representatives of
/// distinct classes are checked pairwise non-isomorphic; transitivity
/// extends both directions to all pairs.
pub fn verify_structural_link_repr(
    corpus: &[(Graph, TargetSet)],
    scheme: &LabelingScheme,
    hop: Option<usize>,
) -> Result<StructuralReprReport> {
    struct Entry {
        sub: Subgraph,
        code: Vec<iso::CanonicalCode>,
    }

    let mut entries = Vec::with_capacity(corpus.len());
    for (g, s) in corpus {
        let sub = match hop {
            Some(h) => graph::extract_enclosing_subgraph(g, s, h)?,
            None => Subgraph::whole(g, s)?,
        };
        let colors = labeling::apply_labeling(scheme, &sub)?.as_colors();
        let mut code: Vec<iso::CanonicalCode> = sub
            .targets
            .as_slice()
            .iter()
            .map(|&t| iso::canonical_code(&sub.graph, &colors, &TargetSet::single(t)))
            .collect::<Result<_>>()?;
        code.sort();
        entries.push(Entry { sub, code });
    }

    let mut classes: BTreeMap<&[iso::CanonicalCode], Vec<usize>> = BTreeMap::new();
    for (idx, e) in entries.iter().enumerate() {
        classes.entry(e.code.as_slice()).or_default().push(idx);
    }

    let mut violations = Vec::new();
    let reps: Vec<usize> = classes.values().map(|m| m[0]).collect();

    // codes equal => must be isomorphic
    for members in classes.values() {
        let rep = &entries[members[0]];
        for &idx in &members[1..] {
            let e = &entries[idx];
            let iso_found = iso::are_isomorphic(
                &rep.sub.graph,
                &rep.sub.targets,
                &e.sub.graph,
                &e.sub.targets,
            )?;
            if iso_found.is_none() {
                violations.push(ReprViolation {
                    index_a: members[0],
                    index_b: idx,
                    kind: ReprViolationKind::CodesEqualNotIsomorphic,
                });
            }
        }
    }

    // isomorphic => codes must be equal (checked on class representatives)
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let (a, b) = (&entries[reps[i]], &entries[reps[j]]);
            let iso_found =
                iso::are_isomorphic(&a.sub.graph, &a.sub.targets, &b.sub.graph, &b.sub.targets)?;
            if iso_found.is_some() {
                violations.push(ReprViolation {
                    index_a: reps[i],
                    index_b: reps[j],
                    kind: ReprViolationKind::IsomorphicCodesDiffer,
                });
            }
        }
    }

    Ok(StructuralReprReport {
        scheme: scheme.kind().name().to_owned(),
        hop,
        corpus_size: corpus.len(),
        num_classes: classes.len(),
        violations,
    })
}
