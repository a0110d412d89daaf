//! JSON reports emitted by every subcommand.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{write_file, Result};

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct IngestStats {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
    pub feature_dim: usize,
}

impl IngestStats {
    pub fn new(report: &linklab_core::IngestReport, feature_dim: usize) -> Self {
        IngestStats {
            num_nodes: report.num_nodes,
            num_edges: report.num_edges,
            self_loops_dropped: report.self_loops_dropped,
            duplicate_edges_dropped: report.duplicate_edges_dropped,
            feature_dim,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitStats {
    pub train_pos: usize,
    pub valid_pos: usize,
    pub test_pos: usize,
    pub valid_neg: usize,
    pub test_neg: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub ingest: IngestStats,
    pub split: SplitStats,
    /// split name -> metric name -> value.
    pub metrics: BTreeMap<String, BTreeMap<String, f64>>,
    pub final_train_loss: f64,
    pub best_epoch: usize,
    pub workers: usize,
    pub wall_clock_ms: u128,
}

impl ExperimentReport {
    /// Serialization with the wall-clock field zeroed; two runs with the
    /// same config, seed, and inputs must agree on this byte string.
    pub fn determinism_key(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock_ms = 0;
        serde_json::to_string(&copy).expect("report serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub metric: String,
    pub split: SplitStats,
    pub metrics: BTreeMap<String, BTreeMap<String, f64>>,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub counterexamples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSizeOutcome {
    pub num_nodes: usize,
    pub degree: usize,
    pub seeds: usize,
    pub seeds_with_pairs: usize,
    pub mean_pairs: f64,
    pub min_pairs: usize,
    pub max_pairs: usize,
    pub pairs_per_seed: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WlBenchReport {
    pub degree: usize,
    pub hops: usize,
    pub sizes: Vec<BenchSizeOutcome>,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestCmdReport {
    pub path: String,
    pub ingest: IngestStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitCmdReport {
    pub path: String,
    pub ratios: (f64, f64, f64),
    pub neg_per_pos: usize,
    pub split: SplitStats,
    pub files: Vec<String>,
}

/// Pretty-prints a report to stdout or a file.
pub fn emit<T: Serialize>(report: &T, out: Option<&str>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}
