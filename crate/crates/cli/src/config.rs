//! Experiment configuration: a JSON file with exactly these keys; unknown
//! keys are rejected so a typo cannot silently change a run.

use serde::{Deserialize, Serialize};

use linklab_core::labeling::{LabelingScheme, SchemeKind};
use linklab_core::nn::{Activation, LayerKind, LayerSpec, Readout};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "gae" (whole-graph, no labeling) or "seal" (enclosing subgraphs
    /// plus a labeling trick).
    pub mode: String,
    /// "zo" | "drnl" | "de" | "de+"; must be absent in gae mode.
    #[serde(default)]
    pub scheme: Option<String>,
    /// Distance cap for the DE family.
    #[serde(default)]
    pub d_max: Option<u32>,
    pub hops: usize,
    pub layers: usize,
    /// "gcn" | "gin"
    pub layer_kind: String,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    /// "center-hadamard" | "center-concat" | "sum" | "sortpool:K"
    pub readout: String,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub neg_per_pos: usize,
    /// Fraction of the train split used as training positives.
    pub train_edge_fraction: f64,
    /// "hits:K" | "mrr:N"
    pub metric: String,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Gae,
    Seal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSpec {
    /// Hits@K against the split's shared negative list.
    Hits(usize),
    /// MRR with this many sampled negatives per true source node.
    Mrr(usize),
}

impl MetricSpec {
    pub fn parse(s: &str) -> Result<MetricSpec> {
        let (name, arg) = s
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("metric {s:?} must be hits:K or mrr:N")))?;
        let n: usize = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad metric count in {s:?}")))?;
        if n == 0 {
            return Err(CliError::Config("metric count must be >= 1".into()));
        }
        match name {
            "hits" => Ok(MetricSpec::Hits(n)),
            "mrr" => Ok(MetricSpec::Mrr(n)),
            other => Err(CliError::Config(format!("unknown metric {other:?}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            MetricSpec::Hits(k) => format!("hits@{k}"),
            MetricSpec::Mrr(n) => format!("mrr@{n}"),
        }
    }
}

pub fn parse_scheme(name: &str, d_max: Option<u32>) -> Result<LabelingScheme> {
    let kind = match name {
        "zo" | "zero-one" => SchemeKind::ZeroOne,
        "drnl" => SchemeKind::Drnl,
        "de" => SchemeKind::De,
        "de+" | "de-plus" => SchemeKind::DePlus,
        "all-one" => SchemeKind::AllOne,
        other => return Err(CliError::Config(format!("unknown labeling scheme {other:?}"))),
    };
    let scheme = match (kind, d_max) {
        (SchemeKind::De, None) => LabelingScheme::de(),
        (kind, cap) => LabelingScheme::new(kind, cap)
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    Ok(scheme)
}

pub fn parse_readout(s: &str) -> Result<Readout> {
    match s {
        "center-hadamard" => Ok(Readout::CenterHadamard),
        "center-concat" => Ok(Readout::CenterConcat),
        "sum" => Ok(Readout::Sum),
        _ => {
            if let Some(arg) = s.strip_prefix("sortpool:") {
                let k: usize = arg
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad sortpool size in {s:?}")))?;
                if k == 0 {
                    return Err(CliError::Config("sortpool k must be >= 1".into()));
                }
                Ok(Readout::SortPool { k })
            } else {
                Err(CliError::Config(format!("unknown readout {s:?}")))
            }
        }
    }
}

/// The config after validation, with every string field decoded.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub raw: ExperimentConfig,
    pub mode: Mode,
    pub scheme: Option<LabelingScheme>,
    pub layer_kind: LayerKind,
    pub readout: Readout,
    pub metric: MetricSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn parse(&self) -> Result<ParsedConfig> {
        let mode = match self.mode.as_str() {
            "gae" => Mode::Gae,
            "seal" => Mode::Seal,
            other => return Err(CliError::Config(format!("unknown mode {other:?}"))),
        };
        let scheme = match (mode, &self.scheme) {
            (Mode::Gae, Some(s)) => {
                return Err(CliError::Config(format!(
                    "gae mode message-passes over the whole graph and takes no labeling scheme (got {s:?})"
                )))
            }
            (Mode::Gae, None) => None,
            (Mode::Seal, None) => {
                return Err(CliError::Config("seal mode requires a labeling scheme".into()))
            }
            (Mode::Seal, Some(s)) => Some(parse_scheme(s, self.d_max)?),
        };
        if mode == Mode::Gae && self.d_max.is_some() {
            return Err(CliError::Config("d_max without a labeling scheme".into()));
        }
        let layer_kind = match self.layer_kind.as_str() {
            "gcn" => LayerKind::Gcn,
            "gin" => LayerKind::Gin,
            other => return Err(CliError::Config(format!("unknown layer kind {other:?}"))),
        };
        let readout = parse_readout(&self.readout)?;
        if mode == Mode::Gae && !matches!(readout, Readout::CenterHadamard | Readout::CenterConcat)
        {
            return Err(CliError::Config(
                "gae mode scores node pairs and needs a center readout".into(),
            ));
        }
        if self.layers < 1 {
            return Err(CliError::Config("layers must be >= 1".into()));
        }
        if self.hidden_dim < 1 || self.embed_dim < 1 {
            return Err(CliError::Config("dims must be >= 1".into()));
        }
        if self.epochs < 1 || self.batch_size < 1 {
            return Err(CliError::Config("epochs and batch_size must be >= 1".into()));
        }
        if self.neg_per_pos < 1 {
            return Err(CliError::Config("neg_per_pos must be >= 1".into()));
        }
        if !(self.train_edge_fraction > 0.0 && self.train_edge_fraction <= 1.0) {
            return Err(CliError::Config("train_edge_fraction must be in (0, 1]".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CliError::Config("learning_rate must be positive".into()));
        }
        if self.workers < 1 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        let metric = MetricSpec::parse(&self.metric)?;
        Ok(ParsedConfig {
            raw: self.clone(),
            mode,
            scheme,
            layer_kind,
            readout,
            metric,
        })
    }
}

impl ParsedConfig {
    /// Message-passing layer chain: input width to hidden_dim, then
    /// hidden_dim throughout.
    pub fn layer_specs(&self, input_dim: usize) -> Vec<LayerSpec> {
        (0..self.raw.layers)
            .map(|i| {
                let in_dim = if i == 0 { input_dim } else { self.raw.hidden_dim };
                match self.layer_kind {
                    LayerKind::Gcn => LayerSpec::gcn(in_dim, self.raw.hidden_dim),
                    LayerKind::Gin => LayerSpec::gin(in_dim, self.raw.hidden_dim, 0.0),
                }
                .with_activation(Activation::Relu)
            })
            .collect()
    }
}
