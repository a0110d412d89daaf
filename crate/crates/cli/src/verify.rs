//! Empirical verification of the expressiveness claims on small graphs:
//! hash/enumeration agreement, labeling validity, structural-representation
//! equivalence, the reference-graph relations, refinement convergence, and
//! counting of WL-indistinguishable link pairs.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linklab_core::corpus;
use linklab_core::graph::{Graph, TargetSet};
use linklab_core::heuristics::common_neighbors;
use linklab_core::iso::are_isomorphic;
use linklab_core::labeling::{
    drnl_hash, drnl_label_by_enumeration, validate_scheme, LabelingScheme,
};
use linklab_core::wl::{
    find_indistinguishable_link_pairs, verify_structural_link_repr, wl_refine, WlRefiner,
};

use crate::error::Result;
use crate::report::{CheckOutcome, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Exhaustive,
}

impl VerifyLevel {
    pub fn parse(s: &str) -> Option<VerifyLevel> {
        match s {
            "fast" => Some(VerifyLevel::Fast),
            "exhaustive" => Some(VerifyLevel::Exhaustive),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            VerifyLevel::Fast => "fast",
            VerifyLevel::Exhaustive => "exhaustive",
        }
    }
}

/// Every graph on 2..=max_n nodes paired with every 2-node target set.
pub fn exhaustive_link_corpus(max_n: usize) -> Vec<(Graph, TargetSet)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for g in corpus::all_graphs(n) {
            for (u, v) in corpus::all_pairs(n) {
                out.push((g.clone(), TargetSet::pair(u, v).unwrap()));
            }
        }
    }
    out
}

/// Structured graphs (whose automorphisms exercise the witness search)
/// plus random graphs, all within the oracle limit.
pub fn sampled_link_corpus(seed: u64, random_count: usize) -> Vec<(Graph, TargetSet)> {
    let mut out: Vec<(Graph, TargetSet)> = Vec::new();
    for n in 4..=6 {
        let c = corpus::cycle(n);
        let p = corpus::path(n);
        out.push((c.clone(), TargetSet::pair(0, 1).unwrap()));
        out.push((c, TargetSet::pair(0, 2).unwrap()));
        out.push((p.clone(), TargetSet::pair(0, 1).unwrap()));
        out.push((p, TargetSet::pair(0, n - 1).unwrap()));
    }
    out.push((corpus::star(4), TargetSet::pair(1, 2).unwrap()));
    out.push((corpus::complete(4), TargetSet::pair(0, 3).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = out.len().max(random_count);
    while out.len() < target {
        let n = rng.random_range(3..=7);
        let g = corpus::random_graph(n, 0.4, &mut rng);
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        out.push((g, TargetSet::pair(u, v).unwrap()));
    }
    out
}

fn check(name: &str, passed: bool, counterexamples: usize, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.to_owned(), passed, detail, counterexamples }
}

pub fn check_hash_enumeration() -> CheckOutcome {
    let mut mismatches = 0;
    for d in 2u32..=100 {
        for dx in 1..d {
            let dy = d - dx;
            if drnl_hash(dx, dy).unwrap() != drnl_label_by_enumeration(dx, dy).unwrap() {
                mismatches += 1;
            }
        }
    }
    let spots_ok = drnl_hash(1, 1).unwrap() == 2
        && drnl_hash(2, 2).unwrap() == 5
        && drnl_hash(2, 3).unwrap() == 7;
    check(
        "drnl-hash-enumeration",
        mismatches == 0 && spots_ok,
        mismatches,
        format!("closed form vs enumeration over all radius pairs with total <= 100; spot values ok: {spots_ok}"),
    )
}

pub fn check_labeling_validity(
    corpus_items: &[(Graph, TargetSet)],
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let valid_schemes = [
        LabelingScheme::zero_one(),
        LabelingScheme::drnl(),
        LabelingScheme::de(),
        LabelingScheme::de_plus(None).expect("uncapped de+ is valid"),
    ];
    for scheme in valid_schemes {
        let report = validate_scheme(&scheme, corpus_items, trials, seed)
            .map_err(crate::error::at_stage("validate"))?;
        let fails = report.condition1_failures() + report.equivariance_violations.len();
        out.push(check(
            &format!("labeling-validity-{}", scheme.kind().name()),
            report.passed(),
            fails,
            format!(
                "{} graphs, {} permutations each; {} condition-1 and {} condition-2 violations",
                report.corpus_size,
                trials,
                report.condition1_failures(),
                report.equivariance_violations.len()
            ),
        ));
    }
    let control = validate_scheme(&LabelingScheme::all_one(), corpus_items, trials, seed)
        .map_err(crate::error::at_stage("validate"))?;
    out.push(check(
        "labeling-validity-all-one-control",
        control.condition1_failures() > 0,
        control.condition1_failures(),
        "the all-one control must fail the target-distinguishing condition".into(),
    ));
    Ok(out)
}

pub fn check_link_repr(corpus_items: &[(Graph, TargetSet)]) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for scheme in [
        LabelingScheme::drnl(),
        LabelingScheme::zero_one(),
        LabelingScheme::de(),
        LabelingScheme::de_plus(None).expect("uncapped de+ is valid"),
    ] {
        let report = verify_structural_link_repr(corpus_items, &scheme, None)
            .map_err(crate::error::at_stage("link-repr"))?;
        out.push(check(
            &format!("link-repr-equivalence-{}", scheme.kind().name()),
            report.passed(),
            report.violations.len(),
            format!(
                "{} corpus entries in {} representation classes; codes equal iff set-isomorphic",
                report.corpus_size, report.num_classes
            ),
        ));
    }
    let control = verify_structural_link_repr(corpus_items, &LabelingScheme::all_one(), None)
        .map_err(crate::error::at_stage("link-repr"))?;
    out.push(check(
        "link-repr-all-one-control",
        !control.violations.is_empty(),
        control.violations.len(),
        "the all-one control must conflate some non-isomorphic pairs".into(),
    ));
    Ok(out)
}

pub fn check_reference_graph() -> Result<CheckOutcome> {
    let (g, v) = corpus::bridged_triangles();
    let stage = crate::error::at_stage("reference-graph");
    let s12 = TargetSet::pair(v.v1, v.v2).unwrap();
    let s13 = TargetSet::pair(v.v1, v.v3).unwrap();
    let s43 = TargetSet::pair(v.v4, v.v3).unwrap();

    let mut failures = Vec::new();
    if are_isomorphic(&g, &TargetSet::single(v.v2), &g, &TargetSet::single(v.v3))
        .map_err(&stage)?
        .is_none()
    {
        failures.push("v2 and v3 must be isomorphic nodes");
    }
    if are_isomorphic(&g, &s12, &g, &s43).map_err(&stage)?.is_none() {
        failures.push("{v1,v2} and {v4,v3} must be isomorphic pairs");
    }
    if are_isomorphic(&g, &s12, &g, &s13).map_err(&stage)?.is_some() {
        failures.push("{v1,v2} and {v1,v3} must not be isomorphic");
    }
    if common_neighbors(&g, v.v1, v.v2).map_err(&stage)? != 1
        || common_neighbors(&g, v.v1, v.v3).map_err(&stage)? != 0
    {
        failures.push("common-neighbor counts must be 1 and 0");
    }

    // unlabeled refinement conflates the two links; one-labeling splits
    // them from round two on while preserving the isomorphic pair
    let mut plain = WlRefiner::new();
    let zo = LabelingScheme::zero_one();
    let u12 = plain.link_code(&g, &s12, None, 3, None).map_err(&stage)?;
    let u13 = plain.link_code(&g, &s13, None, 3, None).map_err(&stage)?;
    let u43 = plain.link_code(&g, &s43, None, 3, None).map_err(&stage)?;
    if u12 != u13 {
        failures.push("unlabeled codes of {v1,v2} and {v1,v3} must match");
    }
    if u12 != u43 {
        failures.push("unlabeled codes of {v1,v2} and {v4,v3} must match");
    }
    let mut labeled = WlRefiner::new();
    let l12 = labeled.link_code(&g, &s12, Some(&zo), 2, None).map_err(&stage)?;
    let l13 = labeled.link_code(&g, &s13, Some(&zo), 2, None).map_err(&stage)?;
    let l43 = labeled.link_code(&g, &s43, Some(&zo), 2, None).map_err(&stage)?;
    if l12 == l13 {
        failures.push("one-labeled codes of {v1,v2} and {v1,v3} must differ");
    }
    if l12 != l43 {
        failures.push("one-labeled codes of {v1,v2} and {v4,v3} must match");
    }

    Ok(check(
        "reference-graph-relations",
        failures.is_empty(),
        failures.len(),
        if failures.is_empty() {
            "oracle, heuristic, and refinement relations all hold".into()
        } else {
            failures.join("; ")
        },
    ))
}

pub fn check_wl_convergence(random_graphs: usize, seed: u64) -> CheckOutcome {
    let mut failures = 0;
    for n in 2..=50 {
        let trace = wl_refine(&corpus::path(n), &vec![0; n], n + 2).unwrap();
        if trace.converged_at != Some(n.div_ceil(2)) {
            failures += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_graphs {
        let n = rng.random_range(2..30);
        let g = corpus::random_graph(n, rng.random_range(0.05..0.6), &mut rng);
        let trace = wl_refine(&g, &vec![0; n], n + 5).unwrap();
        match trace.converged_at {
            Some(c) if c <= n - 1 => {}
            _ => failures += 1,
        }
    }
    check(
        "wl-convergence",
        failures == 0,
        failures,
        format!(
            "paths 2..=50 converge in ceil(n/2) rounds; {random_graphs} random graphs within n-1"
        ),
    )
}

pub fn check_indistinguishable_pairs(seeds_per_size: usize, base_seed: u64) -> CheckOutcome {
    let sizes = [16usize, 24, 32];
    let h = 2;
    let zo = LabelingScheme::zero_one();
    let mut seeds_total = 0;
    let mut seeds_with_pairs = 0;
    let mut clause_failures = 0;
    for (si, &n) in sizes.iter().enumerate() {
        for s in 0..seeds_per_size {
            let mut rng =
                ChaCha8Rng::seed_from_u64(base_seed + (si as u64) * 1000 + s as u64);
            let g = corpus::random_regular(n, 3, &mut rng);
            let pairs = find_indistinguishable_link_pairs(&g, h).unwrap();
            seeds_total += 1;
            if !pairs.is_empty() {
                seeds_with_pairs += 1;
            }
            // re-verify the three clauses independently
            let trace = wl_refine(&g, &vec![0; n], h).unwrap();
            let colors = trace.final_colors();
            for p in &pairs {
                let mut r = WlRefiner::new();
                let a = r
                    .link_code(&g, &TargetSet::pair(p.u, p.w).unwrap(), Some(&zo), h, None)
                    .unwrap();
                let b = r
                    .link_code(&g, &TargetSet::pair(p.v, p.w).unwrap(), Some(&zo), h, None)
                    .unwrap();
                let ok = colors[p.u] == colors[p.v]
                    && g.has_edge(p.u, p.w)
                    && !g.has_edge(p.v, p.w)
                    && a != b;
                if !ok {
                    clause_failures += 1;
                }
            }
        }
    }
    let fraction = seeds_with_pairs as f64 / seeds_total as f64;
    check(
        "indistinguishable-link-pairs",
        fraction >= 0.9 && clause_failures == 0,
        clause_failures,
        format!(
            "3-regular graphs of {sizes:?} nodes, {seeds_per_size} seeds each: {:.0}% of seeds yielded pairs; {clause_failures} clause failures",
            fraction * 100.0
        ),
    )
}

/// Runs the whole verification battery at the requested level.
pub fn verify_suite(level: VerifyLevel, seed: u64) -> Result<VerifyReport> {
    let started = Instant::now();
    let (corpus_items, trials, random_graphs, seeds_per_size) = match level {
        VerifyLevel::Exhaustive => (exhaustive_link_corpus(5), 100, 1000, 20),
        VerifyLevel::Fast => (sampled_link_corpus(seed, 120), 30, 200, 5),
    };

    let mut checks = vec![check_hash_enumeration()];
    checks.extend(check_labeling_validity(&corpus_items, trials, seed)?);
    checks.extend(check_link_repr(&corpus_items)?);
    checks.push(check_reference_graph()?);
    checks.push(check_wl_convergence(random_graphs, seed));
    checks.push(check_indistinguishable_pairs(seeds_per_size, seed));

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        level: level.name().to_owned(),
        seed,
        checks,
        all_passed,
        wall_clock_ms: started.elapsed().as_millis(),
    })
}
