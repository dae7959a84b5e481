//! Config-driven experiment runs that emit tidy result tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{fit_flat_model, labeled_features, predict_flat, FlatModelSpec, ModelFamily};
use crate::discovery::{
    partial_f1, run_discovery, Classifiers, PlantedConfig, FeatureSource, LinkDataClient, OracleLabel, PipelineConfig,
};
use crate::error::{Error, Result};
use crate::eval::{classification_metrics, MetricsReport};
use crate::ingest::{generate_synthetic_webgraph, read_label_file, BinaryLabels, SyntheticConfig, Task};
use crate::nn::{make_split, train_gcn, TrainConfig};
use crate::webgraph::io::{read_edges, read_nodes};
use crate::webgraph::{build_graph, truncate_topn, AttributedWebgraph, EdgeKind, Network, WeightScheme};

/// A model in a sweep: the GCN or one flat family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelChoice {
    Gcn,
    Flat(ModelFamily),
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelChoice::Gcn => f.write_str("gcn"),
            ModelChoice::Flat(m) => f.write_str(m.as_str()),
        }
    }
}

impl FromStr for ModelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("gcn") {
            Ok(ModelChoice::Gcn)
        } else {
            s.parse().map(ModelChoice::Flat)
        }
    }
}

impl TryFrom<String> for ModelChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelChoice> for String {
    fn from(m: ModelChoice) -> String {
        m.to_string()
    }
}

/// Edge weighting for the GCN operator; `Unweighted` uses unit weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WeightChoice(pub Option<WeightScheme>);

impl fmt::Display for WeightChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => f.write_str("unweighted"),
            Some(s) => f.write_str(s.as_str()),
        }
    }
}

impl FromStr for WeightChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("unweighted") {
            Ok(WeightChoice(None))
        } else {
            s.parse().map(|w| WeightChoice(Some(w)))
        }
    }
}

impl TryFrom<String> for WeightChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightChoice> for String {
    fn from(w: WeightChoice) -> String {
        w.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    #[default]
    Synthetic,
    Files,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    /// Raw label records, merged and binarized on load.
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub networks: Vec<Network>,
    pub schemes: Vec<WeightChoice>,
    /// Empty means no truncation.
    pub top_n: Vec<usize>,
    /// Pull truncated by `top_n`.
    pub top_n_kind: EdgeKind,
    pub tasks: Vec<Task>,
    pub models: Vec<ModelChoice>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            networks: vec![Network::Combined],
            schemes: vec![WeightChoice(None)],
            top_n: Vec::new(),
            top_n_kind: EdgeKind::Backlink,
            tasks: vec![Task::Reliability],
            models: vec![ModelChoice::Gcn],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Replicate `r` runs with seed `seed + r`.
    pub seed: u64,
    pub replicates: usize,
    pub data: DataConfig,
    /// Used when `data.source` is synthetic; its seed is offset per replicate.
    pub synthetic: SyntheticConfig,
    pub sweep: SweepConfig,
    pub train: TrainConfig,
    pub flat: FlatModelSpec,
    pub discovery: PipelineConfig,
    /// Planted discovery ecosystem written by `ingest planted`.
    pub planted: PlantedConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            seed: 0,
            replicates: 1,
            data: DataConfig::default(),
            synthetic: SyntheticConfig::default(),
            sweep: SweepConfig::default(),
            train: TrainConfig::default(),
            flat: FlatModelSpec::default(),
            discovery: PipelineConfig::default(),
            planted: PlantedConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths resolve against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.data.nodes, &mut cfg.data.edges, &mut cfg.data.labels]
            .into_iter()
            .chain([
                &mut cfg.discovery.news_model,
                &mut cfg.discovery.abs_bias_model,
                &mut cfg.discovery.reliability_model,
            ])
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let s = &self.sweep;
        if s.networks.is_empty() || s.schemes.is_empty() || s.tasks.is_empty() || s.models.is_empty() {
            return Err(Error::Config("sweep lists must be non-empty".into()));
        }
        if s.top_n.contains(&0) {
            return Err(Error::Config("top_n values must be positive".into()));
        }
        self.train.validate()?;
        if self.data.source == DataSource::Synthetic {
            self.synthetic.validate()?;
        } else if self.data.nodes.is_none() || self.data.edges.is_none() || self.data.labels.is_none() {
            return Err(Error::Config("file data needs nodes, edges and labels paths".into()));
        }
        self.planted.validate()?;
        self.discovery.validate()
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}

/// A loaded graph with its labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: AttributedWebgraph,
    pub labels: BTreeMap<String, BinaryLabels>,
}

pub fn load_dataset(data: &DataConfig, synthetic: &SyntheticConfig) -> Result<Dataset> {
    match data.source {
        DataSource::Synthetic => {
            let s = generate_synthetic_webgraph(synthetic)?;
            Ok(Dataset {
                graph: s.graph,
                labels: s.labels,
            })
        }
        DataSource::Files => {
            let need = |p: &Option<PathBuf>, what: &str| {
                p.clone().ok_or_else(|| Error::Config(format!("missing data.{what}")))
            };
            let (manifest, nodes) = read_nodes(need(&data.nodes, "nodes")?)?.into_records()?;
            let edges = read_edges(need(&data.edges, "edges")?)?;
            let labels = read_label_file(need(&data.labels, "labels")?)?;
            Ok(Dataset {
                graph: build_graph(nodes, edges, manifest)?,
                labels,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunMetadata {
    pub name: String,
    pub seed: u64,
    pub replicates: usize,
    pub config_sha256: String,
    pub crate_version: String,
}

/// One grid cell of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Condition {
    pub network: Network,
    pub scheme: WeightChoice,
    pub top_n: Option<usize>,
    pub task: Task,
    pub seed: u64,
    pub model: ModelChoice,
}

impl Condition {
    fn fields(&self) -> [String; 6] {
        [
            self.network.as_str().into(),
            self.scheme.to_string(),
            self.top_n.map_or_else(|| "all".into(), |n| n.to_string()),
            self.task.as_str().into(),
            self.seed.to_string(),
            self.model.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub condition: Condition,
    pub metric: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureRow {
    pub condition: Condition,
    pub error: String,
}

pub const RESULT_COLUMNS: [&str; 8] = ["network", "scheme", "top_n", "task", "seed", "model", "metric", "value"];
pub const FAILURE_COLUMNS: [&str; 7] = ["network", "scheme", "top_n", "task", "seed", "model", "error"];
pub const SUMMARY_COLUMNS: [&str; 9] = [
    "network", "scheme", "top_n", "task", "model", "metric", "mean", "std", "replicates",
];

pub const METRICS: [&str; 4] = ["accuracy", "binary_f1", "precision", "recall"];

fn metric_values(m: &MetricsReport) -> [f64; 4] {
    [m.accuracy, m.binary_f1, m.precision, m.recall]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub metadata: RunMetadata,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<FailureRow>,
}

/// Mean and population standard deviation of a metric across replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub network: Network,
    pub scheme: WeightChoice,
    pub top_n: Option<usize>,
    pub task: Task,
    pub model: ModelChoice,
    pub metric: &'static str,
    pub mean: f64,
    pub std: f64,
    pub replicates: usize,
}

impl ExperimentOutput {
    /// Rows averaged over seeds, in first-appearance order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        type Key = (Network, WeightChoice, Option<usize>, Task, ModelChoice, &'static str);
        let mut order: Vec<Key> = Vec::new();
        let mut values: HashMap<Key, Vec<f64>> = HashMap::new();
        for r in &self.rows {
            let c = &r.condition;
            let key = (c.network, c.scheme, c.top_n, c.task, c.model, r.metric);
            values
                .entry(key)
                .or_insert_with(|| {
                    order.push(key);
                    Vec::new()
                })
                .push(r.value);
        }
        order
            .into_iter()
            .map(|key| {
                let v = &values[&key];
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
                SummaryRow {
                    network: key.0,
                    scheme: key.1,
                    top_n: key.2,
                    task: key.3,
                    model: key.4,
                    metric: key.5,
                    mean,
                    std,
                    replicates: v.len(),
                }
            })
            .collect()
    }

    pub fn write_results<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(RESULT_COLUMNS)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.condition.fields().to_vec();
            rec.push(r.metric.into());
            rec.push(r.value.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_failures<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(FAILURE_COLUMNS)?;
        for f in &self.failures {
            let mut rec: Vec<String> = f.condition.fields().to_vec();
            rec.push(f.error.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SUMMARY_COLUMNS)?;
        for s in self.summary() {
            w.write_record([
                s.network.as_str().to_string(),
                s.scheme.to_string(),
                s.top_n.map_or_else(|| "all".into(), |n| n.to_string()),
                s.task.as_str().into(),
                s.model.to_string(),
                s.metric.into(),
                s.mean.to_string(),
                s.std.to_string(),
                s.replicates.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `results.csv`, `summary.csv`, `failures.csv` and `metadata.json`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_results(std::fs::File::create(dir.join("results.csv"))?)?;
        self.write_summary(std::fs::File::create(dir.join("summary.csv"))?)?;
        self.write_failures(std::fs::File::create(dir.join("failures.csv"))?)?;
        std::fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&self.metadata)? + "\n")?;
        Ok(())
    }
}

fn flat_cell(
    graph: &AttributedWebgraph,
    labels: &BTreeMap<String, BinaryLabels>,
    task: Task,
    spec: &FlatModelSpec,
    seed: u64,
) -> Result<MetricsReport> {
    let (fm, y, ids) = labeled_features(graph, labels, task)?;
    let split = make_split(&ids, graph.node_count(), seed)?;
    let row_of: HashMap<usize, usize> = ids.iter().enumerate().map(|(r, &id)| (id, r)).collect();
    let rows = |v: &[usize]| -> Vec<usize> { v.iter().map(|id| row_of[id]).collect() };
    let mut train = rows(&split.train);
    train.extend(rows(&split.val));
    let test = rows(&split.test);
    let train_y: Vec<bool> = train.iter().map(|&r| y[r]).collect();
    let model = fit_flat_model(&spec.clone().with_seed(seed), &fm.select(&train), &train_y)?;
    let pred = predict_flat(&model, &fm.select(&test))?;
    let actual: Vec<bool> = test.iter().map(|&r| y[r]).collect();
    classification_metrics(&pred.labels, &actual, &true)
}

/// Runs every sweep cell. Cell failures are recorded and the run continues;
/// flat models ignore graph structure and are fitted once per task and seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let metadata = RunMetadata {
        name: config.name.clone(),
        seed: config.seed,
        replicates: config.replicates,
        config_sha256: config.hash()?,
        crate_version: env!("CARGO_PKG_VERSION").into(),
    };
    let sweep = &config.sweep;
    let top_ns: Vec<Option<usize>> = if sweep.top_n.is_empty() {
        vec![None]
    } else {
        sweep.top_n.iter().map(|&n| Some(n)).collect()
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let files = match config.data.source {
        DataSource::Files => Some(load_dataset(&config.data, &config.synthetic)?),
        DataSource::Synthetic => None,
    };

    for r in 0..config.replicates as u64 {
        let seed = config.seed.wrapping_add(r);
        let generated;
        let data = match &files {
            Some(d) => d,
            None => {
                let syn = SyntheticConfig {
                    seed: config.synthetic.seed.wrapping_add(r),
                    ..config.synthetic.clone()
                };
                generated = load_dataset(&config.data, &syn)?;
                &generated
            }
        };
        let mut flat_cache: HashMap<(Task, ModelFamily), std::result::Result<MetricsReport, String>> =
            HashMap::new();
        for &network in &sweep.networks {
            let view = data.graph.network(network)?;
            for &top_n in &top_ns {
                let graph = match top_n {
                    Some(n) => truncate_topn(&view, n, sweep.top_n_kind),
                    None => Ok(view.clone()),
                };
                for &scheme in &sweep.schemes {
                    for &task in &sweep.tasks {
                        for &model in &sweep.models {
                            let condition = Condition {
                                network,
                                scheme,
                                top_n,
                                task,
                                seed,
                                model,
                            };
                            let outcome = match (&graph, model) {
                                (Err(e), _) => Err(e.to_string()),
                                (Ok(g), ModelChoice::Gcn) => {
                                    let train = TrainConfig {
                                        seed,
                                        ..config.train.clone()
                                    };
                                    train_gcn(g, &data.labels, task, scheme.0, &train)
                                        .map(|run| run.test)
                                        .map_err(|e| e.to_string())
                                }
                                (Ok(g), ModelChoice::Flat(family)) => flat_cache
                                    .entry((task, family))
                                    .or_insert_with(|| {
                                        let spec = FlatModelSpec {
                                            family,
                                            ..config.flat.clone()
                                        };
                                        flat_cell(g, &data.labels, task, &spec, seed).map_err(|e| e.to_string())
                                    })
                                    .clone(),
                            };
                            match outcome {
                                Ok(m) => rows.extend(METRICS.iter().zip(metric_values(&m)).map(|(&metric, value)| {
                                    ResultRow {
                                        condition: condition.clone(),
                                        metric,
                                        value,
                                    }
                                })),
                                Err(error) => failures.push(FailureRow { condition, error }),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(ExperimentOutput {
        metadata,
        rows,
        failures,
    })
}

/// One point of the discovery design space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscoveryPoint {
    pub alpha_min: u64,
    pub beta_min: u64,
    pub outlinks_per_scheme: usize,
    pub link_schemes: usize,
    pub discovered: usize,
    pub precision: f64,
    pub recall: f64,
    pub partial_f1: f64,
    pub undefined: bool,
}

pub const DISCOVERY_SWEEP_COLUMNS: [&str; 9] = [
    "alpha_min",
    "beta_min",
    "outlinks_per_scheme",
    "link_schemes",
    "discovered",
    "precision",
    "recall",
    "partial_f1",
    "undefined",
];

/// Partial F1 of the pipeline over the product of the given parameter lists.
#[allow(clippy::too_many_arguments)]
pub fn discovery_sweep(
    seeds: &BTreeMap<String, BinaryLabels>,
    client: &dyn LinkDataClient,
    features: &dyn FeatureSource,
    classifiers: &Classifiers,
    base: &PipelineConfig,
    oracle: &BTreeMap<String, OracleLabel>,
    alpha_min: &[u64],
    beta_min: &[u64],
    outlinks_per_scheme: &[usize],
) -> Result<Vec<DiscoveryPoint>> {
    let mut out = Vec::new();
    for &a in alpha_min {
        for &b in beta_min {
            for &k in outlinks_per_scheme {
                let mut cfg = base.clone();
                cfg.criteria.alpha_min = a;
                cfg.criteria.beta_min = b;
                cfg.outlinks_per_scheme = k;
                let run = run_discovery(seeds, client, features, classifiers, &cfg)?;
                let discovered = run.candidates.discovered();
                let pf = partial_f1(&discovered, oracle)?;
                out.push(DiscoveryPoint {
                    alpha_min: a,
                    beta_min: b,
                    outlinks_per_scheme: k,
                    link_schemes: run.schemes.len(),
                    discovered: discovered.len(),
                    precision: pf.precision,
                    recall: pf.recall,
                    partial_f1: pf.partial_f1,
                    undefined: pf.undefined,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_discovery_sweep<W: Write>(points: &[DiscoveryPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DISCOVERY_SWEEP_COLUMNS)?;
    for p in points {
        w.write_record([
            p.alpha_min.to_string(),
            p.beta_min.to_string(),
            p.outlinks_per_scheme.to_string(),
            p.link_schemes.to_string(),
            p.discovered.to_string(),
            p.precision.to_string(),
            p.recall.to_string(),
            p.partial_f1.to_string(),
            p.undefined.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            synthetic: SyntheticConfig {
                node_count: 120,
                ..SyntheticConfig::default()
            },
            train: TrainConfig {
                max_epochs: 30,
                hidden: 8,
                ..TrainConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = small();
        cfg.sweep.models = vec![ModelChoice::Gcn, ModelChoice::Flat(ModelFamily::Gbdt)];
        cfg.sweep.schemes = vec![WeightChoice(None), WeightChoice(Some(WeightScheme::LogLinks))];
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn parses_sparse_config() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 3\nreplicates = 2\n[sweep]\nmodels = [\"gcn\", \"random_forest\"]\nschemes = [\"unweighted\", \"page\"]\ntop_n = [1, 2]\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.sweep.models[1], ModelChoice::Flat(ModelFamily::RandomForest));
        assert_eq!(cfg.sweep.schemes[1], WeightChoice(Some(WeightScheme::Page)));
        assert_eq!(cfg.train, TrainConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("sed = 3\n"), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_toml("[sweep]\nmodels = [\"nope\"]\n").is_err());
    }

    #[test]
    fn grid_shape_and_replay() {
        let mut cfg = small();
        cfg.replicates = 2;
        cfg.sweep.networks = vec![Network::Backlink, Network::Combined];
        cfg.sweep.schemes = vec![WeightChoice(None), WeightChoice(Some(WeightScheme::Links))];
        cfg.sweep.models = vec![ModelChoice::Gcn, ModelChoice::Flat(ModelFamily::DecisionTree)];
        let out = run_experiment(&cfg).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.rows.len(), 2 * 2 * 2 * 2 * METRICS.len());
        assert_eq!(out.summary().len(), 2 * 2 * 2 * METRICS.len());
        for r in &out.rows {
            assert!((0.0..=1.0).contains(&r.value));
        }
        let again = run_experiment(&cfg).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        out.write_results(&mut a).unwrap();
        again.write_results(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(out.metadata, again.metadata);
    }

    #[test]
    fn cell_failures_are_recorded() {
        let mut cfg = small();
        cfg.synthetic.unlabeled_fraction = 0.95;
        cfg.sweep.models = vec![ModelChoice::Gcn, ModelChoice::Flat(ModelFamily::Gbdt)];
        let out = run_experiment(&cfg).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(out.failures.len(), 2);
        assert!(out.failures[0].error.contains("insufficient data"));
        let mut buf = Vec::new();
        out.write_failures(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("network,scheme,top_n,task,seed,model,error\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn hash_tracks_config() {
        let a = small();
        let mut b = small();
        b.seed = 1;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap(), small().hash().unwrap());
    }
}
