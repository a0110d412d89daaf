use clap::{Parser, Subcommand};

use linklab_cli::config::{ExperimentConfig, MetricSpec};
use linklab_cli::error::{read_file, CliError};
use linklab_cli::pipeline::{
    self, label_link_tsv, load_graph, original_id_order, run_eval, run_experiment, run_split,
    write_split_files, EvalMethod, DEFAULT_RATIOS,
};
use linklab_cli::report::{emit, IngestCmdReport, SplitCmdReport};
use linklab_cli::verify::{verify_suite, VerifyLevel};
use linklab_cli::wlbench::run_wl_bench;

#[derive(Parser)]
#[command(name = "linklab", version, about = "Labeling tricks for GNN link prediction")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an edge list (and optional feature CSV) and report stats.
    Ingest {
        edges: String,
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Split edges into train/valid/test plus sampled negatives.
    Split {
        edges: String,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 1)]
        neg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "splits")]
        out_dir: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Label one link's enclosing subgraph; TSV to stdout.
    Label {
        edges: String,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        dmax: Option<u32>,
        #[arg(long)]
        hops: usize,
        /// Target link as "u,v" in the file's node ids.
        #[arg(long)]
        link: String,
    },
    /// Run a full experiment from a JSON config.
    Train {
        edges: String,
        #[arg(long)]
        config: String,
        #[arg(long)]
        features: Option<String>,
        /// Write the trained model checkpoint here.
        #[arg(long)]
        model_out: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Evaluate a heuristic or a saved model on a seeded split.
    Eval {
        edges: String,
        /// model | cn | aa
        #[arg(long)]
        method: String,
        /// hits:K | mrr:N
        #[arg(long)]
        metric: String,
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 1)]
        neg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the theory-verification battery.
    Verify {
        /// fast | exhaustive
        #[arg(long, default_value = "fast")]
        level: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Count WL-indistinguishable link pairs on random regular graphs.
    WlBench {
        #[arg(long)]
        degree: usize,
        /// Comma-separated node counts, e.g. 16,24,32.
        #[arg(long)]
        sizes: String,
        #[arg(long)]
        hops: usize,
        /// Number of seeds per size.
        #[arg(long)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_ratios(s: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("ratios {s:?} must be a,b,c")));
    }
    let p = |t: &str| -> Result<f64, CliError> {
        t.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad ratio {t:?}")))
    };
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

fn parse_link(s: &str) -> Result<(u64, u64), CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::Config(format!("link {s:?} must be u,v")))?;
    let p = |t: &str| -> Result<u64, CliError> {
        t.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad node id {t:?}")))
    };
    Ok((p(a)?, p(b)?))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad size {t:?}")))
        })
        .collect()
}

/// 0 = success, 1 = verification failure, 2 = usage/config/input error.
fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Ingest { edges, features, out } => {
            let (_, stats) = load_graph(&edges, features.as_deref())?;
            emit(&IngestCmdReport { path: edges, ingest: stats }, out.as_deref())?;
            Ok(0)
        }
        Cmd::Split { edges, ratios, neg, seed, out_dir, out } => {
            let text = read_file(&edges)?;
            let (g, _) = linklab_core::graph::parse_edge_list(&text)
                .map_err(linklab_cli::error::at_stage("ingest"))?;
            let ratios = parse_ratios(&ratios)?;
            let split = run_split(&g, ratios, neg, seed)?;
            let ids = original_id_order(&text);
            let files = write_split_files(&out_dir, &split, &ids)?;
            emit(
                &SplitCmdReport {
                    path: edges,
                    ratios,
                    neg_per_pos: neg,
                    split: pipeline::split_stats_public(&split),
                    files,
                },
                out.as_deref(),
            )?;
            Ok(0)
        }
        Cmd::Label { edges, scheme, dmax, hops, link } => {
            let text = read_file(&edges)?;
            let (g, _) = linklab_core::graph::parse_edge_list(&text)
                .map_err(linklab_cli::error::at_stage("ingest"))?;
            let scheme = linklab_cli::config::parse_scheme(&scheme, dmax)?;
            let ids = original_id_order(&text);
            let link = parse_link(&link)?;
            print!("{}", label_link_tsv(&g, &ids, link, &scheme, hops)?);
            Ok(0)
        }
        Cmd::Train { edges, config, features, model_out, out } => {
            let cfg = ExperimentConfig::from_json(&read_file(&config)?)?;
            let (g, stats) = load_graph(&edges, features.as_deref())?;
            let run = run_experiment(&cfg, &g, stats)?;
            if let Some(path) = model_out {
                let mut bytes = Vec::new();
                linklab_core::nn::save_model(&run.model, &mut bytes)
                    .map_err(linklab_cli::error::at_stage("checkpoint"))?;
                std::fs::write(&path, bytes)
                    .map_err(|source| CliError::Io { path, source })?;
            }
            emit(&run.report, out.as_deref())?;
            Ok(0)
        }
        Cmd::Eval { edges, method, metric, features, model, config, ratios, neg, seed, out } => {
            let method = EvalMethod::parse(&method)?;
            let metric = MetricSpec::parse(&metric)?;
            let (g, _) = load_graph(&edges, features.as_deref())?;
            let ratios = if method == EvalMethod::Model {
                DEFAULT_RATIOS
            } else {
                parse_ratios(&ratios)?
            };
            let cfg = match config {
                Some(path) => Some(ExperimentConfig::from_json(&read_file(&path)?)?),
                None => None,
            };
            let loaded = match model {
                Some(path) => {
                    let bytes = std::fs::read(&path)
                        .map_err(|source| CliError::Io { path, source })?;
                    Some(
                        linklab_core::nn::load_model(&mut bytes.as_slice())
                            .map_err(linklab_cli::error::at_stage("checkpoint"))?,
                    )
                }
                None => None,
            };
            let (neg, seed) = match (&cfg, method) {
                (Some(c), EvalMethod::Model) => (c.neg_per_pos, c.seed),
                _ => (neg, seed),
            };
            let report = run_eval(method, metric, &g, ratios, neg, seed, cfg.as_ref(), loaded)?;
            emit(&report, out.as_deref())?;
            Ok(0)
        }
        Cmd::Verify { level, seed, out } => {
            let level = VerifyLevel::parse(&level)
                .ok_or_else(|| CliError::Config(format!("unknown level {level:?}")))?;
            let report = verify_suite(level, seed)?;
            let ok = report.all_passed;
            emit(&report, out.as_deref())?;
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::WlBench { degree, sizes, hops, seeds, seed, out } => {
            let sizes = parse_sizes(&sizes)?;
            let report = run_wl_bench(degree, &sizes, hops, seeds, seed)?;
            emit(&report, out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            std::process::exit(2);
        }
    }
}
