//! End-to-end experiment pipeline: ingest, split, candidate generation,
//! labeled-subgraph or whole-graph training, and ranking-metric
//! evaluation. Everything is deterministic given the config seed.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linklab_core::graph::{self, Graph, NodeId, TargetSet};
use linklab_core::heuristics;
use linklab_core::labeling::{self, LabelingScheme, NodeLabels};
use linklab_core::metrics::{hits_at_k, mrr, split_edges, EdgeSplit};
use linklab_core::nn::{
    self, gae_forward, gae_train, score_node_pair, score_subgraph, train, Example, Model,
    ModelConfig, TrainConfig,
};

use crate::config::{ExperimentConfig, Mode, MetricSpec, ParsedConfig};
use crate::error::{at_stage, read_file, CliError, Result};
use crate::report::{EvalReport, ExperimentReport, IngestStats, SplitStats};

/// Default split used by `train` and `eval` (the standalone `split`
/// subcommand takes explicit ratios).
pub const DEFAULT_RATIOS: (f64, f64, f64) = (0.8, 0.1, 0.1);

const TRAIN_NEG_SALT: u64 = 0x7f4a_9d2e_0b11_5ca7;
const MRR_SALT: u64 = 0x3d91_c4f0_88e2_6b13;

/// Reads an edge list (and optional feature CSV) from disk.
pub fn load_graph(edges_path: &str, features_path: Option<&str>) -> Result<(Graph, IngestStats)> {
    let text = read_file(edges_path)?;
    let (mut g, report) = graph::parse_edge_list(&text).map_err(at_stage("ingest"))?;
    if let Some(path) = features_path {
        let rows = graph::parse_feature_csv(&read_file(path)?).map_err(at_stage("ingest"))?;
        g = g.with_features(rows).map_err(at_stage("ingest"))?;
    }
    let stats = IngestStats::new(&report, g.feature_dim());
    Ok((g, stats))
}

fn split_stats(split: &EdgeSplit) -> SplitStats {
    SplitStats {
        train_pos: split.train_pos.len(),
        valid_pos: split.valid_pos.len(),
        test_pos: split.test_pos.len(),
        valid_neg: split.valid_neg.len(),
        test_neg: split.test_neg.len(),
        seed: split.seed,
    }
}

/// Training graph (train positives only) with the parent's features.
pub fn train_graph_with_features(g: &Graph, split: &EdgeSplit) -> Result<Graph> {
    let mut tg = split.train_graph(g.num_nodes());
    if let Some(f) = g.features() {
        tg = tg.with_features(f.clone()).map_err(at_stage("split"))?;
    }
    Ok(tg)
}

/// Samples `count` distinct non-edges of `g`, deterministically.
fn sample_non_edges(g: &Graph, count: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    let n = g.num_nodes();
    let possible = n * (n - 1) / 2 - g.num_edges();
    if count > possible {
        return Err(CliError::Stage {
            stage: "negative-sampling",
            source: linklab_core::Error::Capacity {
                what: "non-edges",
                actual: count,
                limit: possible,
            },
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if taken.insert(key) {
            out.push(key);
        }
    }
    Ok(out)
}

/// Extracts and labels enclosing subgraphs for candidate links on a
/// worker pool. The candidate's edge, if present in `base`, is hidden
/// before extraction so a train positive never sees itself. Results come
/// back in candidate-index order regardless of the worker count.
pub fn build_examples(
    base: &Graph,
    candidates: &[(NodeId, NodeId, f64)],
    scheme: &LabelingScheme,
    hops: usize,
    workers: usize,
) -> Result<Vec<Example>> {
    let workers = workers.max(1);
    let chunk_size = candidates.len().div_ceil(workers).max(1);
    let chunks: Vec<&[(NodeId, NodeId, f64)]> = candidates.chunks(chunk_size).collect();

    let build_chunk = |chunk: &[(NodeId, NodeId, f64)]| -> linklab_core::Result<Vec<Example>> {
        chunk
            .iter()
            .map(|&(u, v, target)| {
                let visible = base.without_edge(u, v);
                let sub = graph::extract_enclosing_subgraph(
                    &visible,
                    &TargetSet::pair(u, v)?,
                    hops,
                )?;
                let labels = labeling::apply_labeling(scheme, &sub)?;
                Ok(Example { sub, labels, target })
            })
            .collect()
    };

    let results: Vec<linklab_core::Result<Vec<Example>>> = if chunks.len() <= 1 {
        chunks.into_iter().map(build_chunk).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| scope.spawn(move || build_chunk(chunk)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };

    let mut out = Vec::with_capacity(candidates.len());
    for chunk in results {
        out.extend(chunk.map_err(at_stage("subgraph-extraction"))?);
    }
    Ok(out)
}

fn max_label(labels: &NodeLabels) -> u64 {
    match labels {
        NodeLabels::Scalar(v) => v.iter().copied().max().unwrap_or(0),
        NodeLabels::Pairs(v) => {
            v.iter().map(|&(a, b)| (a as u64).max(b as u64)).max().unwrap_or(0)
        }
    }
}

fn embedding_table_size(example_sets: &[&[Example]]) -> Result<usize> {
    let max = example_sets
        .iter()
        .flat_map(|set| set.iter())
        .map(|ex| max_label(&ex.labels))
        .max()
        .unwrap_or(0);
    if max > 1_000_000 {
        return Err(CliError::Config(format!(
            "labels reach {max}; cap distances (d_max) so the embedding table stays finite"
        )));
    }
    Ok(max as usize + 1)
}

/// How a candidate link gets a score.
enum Scorer {
    Seal {
        model: Model,
        scheme: LabelingScheme,
        hops: usize,
        workers: usize,
    },
    Gae {
        model: Model,
        h_final: nn::DenseMatrix,
    },
    CommonNeighbors,
    AdamicAdar,
}

impl Scorer {
    /// Scores candidates against the visible (train) graph.
    fn scores(&self, visible: &Graph, cands: &[(NodeId, NodeId)]) -> Result<Vec<f64>> {
        match self {
            Scorer::Seal { model, scheme, hops, workers } => {
                let with_targets: Vec<(NodeId, NodeId, f64)> =
                    cands.iter().map(|&(u, v)| (u, v, 0.0)).collect();
                let examples = build_examples(visible, &with_targets, scheme, *hops, *workers)?;
                examples
                    .iter()
                    .map(|ex| {
                        score_subgraph(model, &ex.sub, &ex.labels).map_err(at_stage("scoring"))
                    })
                    .collect()
            }
            Scorer::Gae { model, h_final } => cands
                .iter()
                .map(|&(u, v)| score_node_pair(model, h_final, u, v).map_err(at_stage("scoring")))
                .collect(),
            Scorer::CommonNeighbors => cands
                .iter()
                .map(|&(u, v)| {
                    heuristics::common_neighbors(visible, u, v)
                        .map(|c| c as f64)
                        .map_err(at_stage("scoring"))
                })
                .collect(),
            Scorer::AdamicAdar => cands
                .iter()
                .map(|&(u, v)| heuristics::adamic_adar(visible, u, v).map_err(at_stage("scoring")))
                .collect(),
        }
    }
}

/// Hits@K on the split's negative lists, or MRR with per-source sampled
/// negatives, for both evaluation splits.
fn evaluate_metric(
    metric: MetricSpec,
    g: &Graph,
    visible: &Graph,
    split: &EdgeSplit,
    seed: u64,
    scorer: &Scorer,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let mut out = BTreeMap::new();
    let splits: [(&str, &[(NodeId, NodeId)], &[(NodeId, NodeId)]); 2] = [
        ("valid", &split.valid_pos, &split.valid_neg),
        ("test", &split.test_pos, &split.test_neg),
    ];
    for (name, pos, neg) in splits {
        let value = match metric {
            MetricSpec::Hits(k) => {
                let pos_scores = scorer.scores(visible, pos)?;
                let neg_scores = scorer.scores(visible, neg)?;
                hits_at_k(&pos_scores, &neg_scores, k).map_err(at_stage("metrics"))?
            }
            MetricSpec::Mrr(n_neg) => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add(MRR_SALT).wrapping_add(name.len() as u64),
                );
                let mut groups = Vec::with_capacity(pos.len());
                for &(u, v) in pos {
                    // candidates share the true source node u
                    let mut negs = Vec::with_capacity(n_neg);
                    let mut seen = std::collections::HashSet::new();
                    let mut attempts = 0usize;
                    while negs.len() < n_neg {
                        attempts += 1;
                        if attempts > 1000 * n_neg {
                            return Err(CliError::Stage {
                                stage: "metrics",
                                source: linklab_core::Error::Capacity {
                                    what: "mrr negative candidates",
                                    actual: n_neg,
                                    limit: negs.len(),
                                },
                            });
                        }
                        let w = rng.random_range(0..g.num_nodes());
                        if w == u || w == v || g.has_edge(u, w) || !seen.insert(w) {
                            continue;
                        }
                        negs.push((u, w));
                    }
                    let true_score = scorer.scores(visible, &[(u, v)])?[0];
                    let neg_scores = scorer.scores(visible, &negs)?;
                    groups.push((true_score, neg_scores));
                }
                mrr(&groups).map_err(at_stage("metrics"))?
            }
        };
        let mut m = BTreeMap::new();
        m.insert(metric.label(), value);
        out.insert(name.to_owned(), m);
    }
    Ok(out)
}

pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub model: Model,
}

/// Runs one experiment end to end: split, build candidates, train in the
/// configured mode, evaluate.
pub fn run_experiment(raw: &ExperimentConfig, g: &Graph, ingest: IngestStats) -> Result<ExperimentRun> {
    let started = Instant::now();
    let cfg: ParsedConfig = raw.parse()?;
    let split = split_edges(g, DEFAULT_RATIOS, raw.neg_per_pos, raw.seed)
        .map_err(at_stage("split"))?;
    let visible = train_graph_with_features(g, &split)?;

    // training candidates: a fraction of the train positives plus an
    // equal number of sampled non-edges
    let n_used = ((split.train_pos.len() as f64 * raw.train_edge_fraction).round() as usize)
        .clamp(1, split.train_pos.len());
    let mut train_cands: Vec<(NodeId, NodeId, f64)> = split.train_pos[..n_used]
        .iter()
        .map(|&(u, v)| (u, v, 1.0))
        .collect();
    for (u, v) in sample_non_edges(g, n_used, raw.seed.wrapping_add(TRAIN_NEG_SALT))? {
        train_cands.push((u, v, 0.0));
    }
    let valid_cands: Vec<(NodeId, NodeId, f64)> = split
        .valid_pos
        .iter()
        .map(|&(u, v)| (u, v, 1.0))
        .chain(split.valid_neg.iter().map(|&(u, v)| (u, v, 0.0)))
        .collect();

    // Adaptive moments rather than plain momentum: the product readout
    // leaves representation-path gradients orders of magnitude below the
    // head's, and a single global step size cannot serve both.
    let train_cfg = TrainConfig {
        epochs: raw.epochs,
        learning_rate: raw.learning_rate,
        batch_size: raw.batch_size,
        optimizer: nn::Optimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 },
        seed: raw.seed,
    };

    let (model, outcome_losses, best_epoch, metrics) = match cfg.mode {
        Mode::Seal => {
            let scheme = cfg.scheme.expect("seal mode has a scheme");
            let train_examples =
                build_examples(&visible, &train_cands, &scheme, raw.hops, raw.workers)?;
            let valid_examples =
                build_examples(&visible, &valid_cands, &scheme, raw.hops, raw.workers)?;
            let test_cands: Vec<(NodeId, NodeId, f64)> = split
                .test_pos
                .iter()
                .chain(split.test_neg.iter())
                .map(|&(u, v)| (u, v, 0.0))
                .collect();
            let test_examples =
                build_examples(&visible, &test_cands, &scheme, raw.hops, raw.workers)?;
            let num_labels = embedding_table_size(&[
                &train_examples,
                &valid_examples,
                &test_examples,
            ])?;

            let input_dim = raw.embed_dim + g.feature_dim();
            let model_cfg = ModelConfig {
                num_labels,
                embed_dim: raw.embed_dim,
                feature_dim: g.feature_dim(),
                layers: cfg.layer_specs(input_dim),
                readout: cfg.readout,
                head_hidden: raw.hidden_dim,
            };
            let outcome = train(&model_cfg, &train_cfg, &train_examples, &valid_examples)
                .map_err(at_stage("training"))?;
            let scorer = Scorer::Seal {
                model: outcome.model.clone(),
                scheme,
                hops: raw.hops,
                workers: raw.workers,
            };
            let metrics = evaluate_metric(cfg.metric, g, &visible, &split, raw.seed, &scorer)?;
            (outcome.model, outcome.train_losses, outcome.best_epoch, metrics)
        }
        Mode::Gae => {
            let labels = NodeLabels::Scalar(vec![0; g.num_nodes()]);
            let input_dim = raw.embed_dim + g.feature_dim();
            let model_cfg = ModelConfig {
                num_labels: 1,
                embed_dim: raw.embed_dim,
                feature_dim: g.feature_dim(),
                layers: cfg.layer_specs(input_dim),
                readout: cfg.readout,
                head_hidden: raw.hidden_dim,
            };
            let outcome = gae_train(
                &model_cfg,
                &train_cfg,
                &visible,
                &labels,
                &train_cands,
                &valid_cands,
            )
            .map_err(at_stage("training"))?;
            let h_final = gae_forward(&outcome.model, &visible, &labels)
                .map_err(at_stage("scoring"))?
                .h_final;
            let scorer = Scorer::Gae { model: outcome.model.clone(), h_final };
            let metrics = evaluate_metric(cfg.metric, g, &visible, &split, raw.seed, &scorer)?;
            (outcome.model, outcome.train_losses, outcome.best_epoch, metrics)
        }
    };

    let report = ExperimentReport {
        config: raw.clone(),
        ingest,
        split: split_stats(&split),
        metrics,
        final_train_loss: outcome_losses.last().copied().unwrap_or(f64::NAN),
        best_epoch,
        workers: raw.workers,
        wall_clock_ms: started.elapsed().as_millis(),
    };
    Ok(ExperimentRun { report, model })
}

/// Raw `u v` pairs from edge-list text, comments and blanks skipped; no
/// remapping. Used when several files must share one id space.
fn read_raw_pairs(path: &str) -> Result<Vec<(u64, u64)>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match (toks.next().map(str::parse::<u64>), toks.next().map(str::parse::<u64>)) {
            (Some(Ok(u)), Some(Ok(v))) => out.push((u, v)),
            _ => {
                return Err(CliError::Config(format!(
                    "{path}:{}: expected two integer node ids",
                    idx + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Scores on a benchmark-provided split: the visible graph is the union
/// of the train and valid edge files (the collaboration benchmark allows
/// validation edges when predicting test links), and test positives are
/// ranked against the provided shared negative list.
///
/// Expects `train.edges`, `valid.edges`, `test.edges`, and
/// `test_neg.edges` under `dir`. Returns (CN, AA) Hits@k.
pub fn provided_split_heuristic_hits(dir: &str, k: usize) -> Result<(f64, f64)> {
    let train = read_raw_pairs(&format!("{dir}/train.edges"))?;
    let valid = read_raw_pairs(&format!("{dir}/valid.edges"))?;
    let test = read_raw_pairs(&format!("{dir}/test.edges"))?;
    let test_neg = read_raw_pairs(&format!("{dir}/test_neg.edges"))?;

    let mut remap: std::collections::HashMap<u64, NodeId> = std::collections::HashMap::new();
    let intern = |raw: u64, remap: &mut std::collections::HashMap<u64, NodeId>| -> NodeId {
        let next = remap.len();
        *remap.entry(raw).or_insert(next)
    };
    let map_pairs = |pairs: &[(u64, u64)],
                         remap: &mut std::collections::HashMap<u64, NodeId>|
     -> Vec<(NodeId, NodeId)> {
        pairs
            .iter()
            .map(|&(a, b)| (intern(a, remap), intern(b, remap)))
            .collect()
    };
    let train = map_pairs(&train, &mut remap);
    let valid = map_pairs(&valid, &mut remap);
    let test = map_pairs(&test, &mut remap);
    let test_neg = map_pairs(&test_neg, &mut remap);

    let n = remap.len();
    let mut visible_edges = train;
    visible_edges.extend(valid);
    let visible = Graph::from_edges(n, &visible_edges);

    let score_all = |scorer: &Scorer| -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((scorer.scores(&visible, &test)?, scorer.scores(&visible, &test_neg)?))
    };
    let (cn_pos, cn_neg) = score_all(&Scorer::CommonNeighbors)?;
    let (aa_pos, aa_neg) = score_all(&Scorer::AdamicAdar)?;
    let cn = hits_at_k(&cn_pos, &cn_neg, k).map_err(at_stage("metrics"))?;
    let aa = hits_at_k(&aa_pos, &aa_neg, k).map_err(at_stage("metrics"))?;
    Ok((cn, aa))
}

/// Node ids as they appeared in the edge-list file, indexed by the
/// contiguous internal ids `parse_edge_list` assigned (same
/// first-appearance rule, including ids seen only on dropped lines).
pub fn original_id_order(text: &str) -> Vec<u64> {
    let mut seen = std::collections::HashSet::new();
    let mut order = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace().take(2) {
            if let Ok(raw) = tok.parse::<u64>()
                && seen.insert(raw)
            {
                order.push(raw);
            }
        }
    }
    order
}

/// Labels one link's enclosing subgraph and renders the TSV the `label`
/// subcommand prints: original_node_id, a tab, then the label.
pub fn label_link_tsv(
    g: &Graph,
    file_ids: &[u64],
    link: (u64, u64),
    scheme: &LabelingScheme,
    hops: usize,
) -> Result<String> {
    let internal = |raw: u64| -> Result<NodeId> {
        file_ids
            .iter()
            .position(|&x| x == raw)
            .ok_or_else(|| CliError::Config(format!("node {raw} not present in the edge list")))
    };
    let targets = TargetSet::pair(internal(link.0)?, internal(link.1)?)
        .map_err(at_stage("label"))?;
    let sub =
        graph::extract_enclosing_subgraph(g, &targets, hops).map_err(at_stage("label"))?;
    let labels = labeling::apply_labeling(scheme, &sub).map_err(at_stage("label"))?;
    let mut out = String::from("original_node_id\tlabel\n");
    for (local, &orig) in sub.parent_ids.iter().enumerate() {
        out.push_str(&format!("{}\t{}\n", file_ids[orig], labels.render(local)));
    }
    Ok(out)
}

/// Writes the split's five files (three positive edge lists plus one
/// negatives file per evaluation split) using the file's original ids.
pub fn write_split_files(
    dir: &str,
    split: &EdgeSplit,
    file_ids: &[u64],
) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let render = |edges: &[(NodeId, NodeId)]| -> String {
        let mut s = String::new();
        for &(u, v) in edges {
            s.push_str(&format!("{} {}\n", file_ids[u], file_ids[v]));
        }
        s
    };
    let files = [
        ("train.edges", render(&split.train_pos)),
        ("valid.edges", render(&split.valid_pos)),
        ("test.edges", render(&split.test_pos)),
        ("valid_neg.edges", render(&split.valid_neg)),
        ("test_neg.edges", render(&split.test_neg)),
    ];
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = format!("{dir}/{name}");
        crate::error::write_file(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Splits a graph's edges and reports the sizes (the `split` subcommand).
pub fn run_split(
    g: &Graph,
    ratios: (f64, f64, f64),
    neg_per_pos: usize,
    seed: u64,
) -> Result<EdgeSplit> {
    split_edges(g, ratios, neg_per_pos, seed).map_err(at_stage("split"))
}

pub fn split_stats_public(split: &EdgeSplit) -> SplitStats {
    split_stats(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Model,
    Cn,
    Aa,
}

impl EvalMethod {
    pub fn parse(s: &str) -> Result<EvalMethod> {
        match s {
            "model" => Ok(EvalMethod::Model),
            "cn" => Ok(EvalMethod::Cn),
            "aa" => Ok(EvalMethod::Aa),
            other => Err(CliError::Config(format!("unknown eval method {other:?}"))),
        }
    }
}

/// Evaluates a heuristic or a saved model checkpoint on a seeded split.
#[allow(clippy::too_many_arguments)]
pub fn run_eval(
    method: EvalMethod,
    metric: MetricSpec,
    g: &Graph,
    ratios: (f64, f64, f64),
    neg_per_pos: usize,
    seed: u64,
    config: Option<&ExperimentConfig>,
    model: Option<Model>,
) -> Result<EvalReport> {
    let started = Instant::now();
    let split = split_edges(g, ratios, neg_per_pos, seed).map_err(at_stage("split"))?;
    let visible = train_graph_with_features(g, &split)?;

    let scorer = match method {
        EvalMethod::Cn => Scorer::CommonNeighbors,
        EvalMethod::Aa => Scorer::AdamicAdar,
        EvalMethod::Model => {
            let raw = config.ok_or_else(|| {
                CliError::Config("eval --method model needs --config".into())
            })?;
            let cfg = raw.parse()?;
            let model = model
                .ok_or_else(|| CliError::Config("eval --method model needs --model".into()))?;
            match cfg.mode {
                Mode::Seal => Scorer::Seal {
                    model,
                    scheme: cfg.scheme.expect("seal mode has a scheme"),
                    hops: raw.hops,
                    workers: raw.workers,
                },
                Mode::Gae => {
                    let labels = NodeLabels::Scalar(vec![0; g.num_nodes()]);
                    let h_final = gae_forward(&model, &visible, &labels)
                        .map_err(at_stage("scoring"))?
                        .h_final;
                    Scorer::Gae { model, h_final }
                }
            }
        }
    };

    let metrics = evaluate_metric(metric, g, &visible, &split, seed, &scorer)?;
    Ok(EvalReport {
        method: format!("{method:?}").to_lowercase(),
        metric: metric.label(),
        split: split_stats(&split),
        metrics,
        wall_clock_ms: started.elapsed().as_millis(),
    })
}
