//! Labeling tricks for GNN-based link prediction.
//!
//! The crate bundles everything needed to study *why* labeling the target
//! node pair before message passing makes link predictors strictly more
//! expressive, and to check the underlying claims empirically on small
//! graphs:
//!
//! * [`graph`] — immutable undirected graphs, permutations, masked BFS,
//!   enclosing-subgraph extraction.
//! * [`iso`] — brute-force (set-)isomorphism oracle and canonical codes
//!   for small colored graphs.
//! * [`labeling`] — zero-one, DRNL, DE, DE⁺ labeling schemes plus an
//!   all-one control, and a validity checker for the two labeling-trick
//!   conditions.
//! * [`wl`] — 1-WL color refinement used both as an expressiveness
//!   analyzer and as a discrete stand-in for a message-passing GNN.
//! * [`nn`] — a small from-scratch message-passing neural engine with
//!   reverse-mode gradients and seeded training.
//! * [`heuristics`] — common-neighbor and Adamic-Adar baselines.
//! * [`metrics`] — Hits@K / MRR and seeded edge splitting.
//! * [`corpus`] — deterministic graph generators for test corpora.
//!
//! Everything is pure and deterministic given a seed; all values are
//! immutable after construction and safe to share across threads.
//!
//! ```
//! use linklab_core::graph::{extract_enclosing_subgraph, parse_edge_list, TargetSet};
//! use linklab_core::labeling::{apply_labeling, LabelingScheme, NodeLabels};
//! use linklab_core::wl::WlRefiner;
//!
//! // a 4-cycle; label the subgraph around the candidate link {0, 2}
//! let (g, _) = parse_edge_list("0 1\n1 2\n2 3\n3 0").unwrap();
//! let sub = extract_enclosing_subgraph(&g, &TargetSet::pair(0, 2).unwrap(), 1).unwrap();
//! let labels = apply_labeling(&LabelingScheme::drnl(), &sub).unwrap();
//! assert_eq!(labels, NodeLabels::Scalar(vec![1, 2, 1, 2]));
//!
//! // adjacent vs opposite pairs get different refinement codes once the
//! // targets are labeled
//! let mut refiner = WlRefiner::new();
//! let scheme = LabelingScheme::zero_one();
//! let opposite = refiner
//!     .link_code(&g, &TargetSet::pair(0, 2).unwrap(), Some(&scheme), 2, None)
//!     .unwrap();
//! let adjacent = refiner
//!     .link_code(&g, &TargetSet::pair(0, 1).unwrap(), Some(&scheme), 2, None)
//!     .unwrap();
//! assert_ne!(opposite, adjacent);
//! ```

pub mod corpus;
pub mod error;
pub mod graph;
pub mod heuristics;
pub mod iso;
pub mod labeling;
pub mod metrics;
pub mod nn;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{Dist, Graph, IngestReport, NodeId, Permutation, Subgraph, TargetSet, INF};
