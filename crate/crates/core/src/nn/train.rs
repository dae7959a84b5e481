use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gcn::{backward, eval_loss, gcn_forward, GcnModel, GraphInput};
use super::optim::{Adam, AdamConfig, EarlyStopping};
use super::{normalize_adjacency, DenseMatrix, Standardizer};
use crate::error::{Error, Result};
use crate::eval::{classification_metrics, MetricsReport};
use crate::ingest::{BinaryLabels, Task};
use crate::webgraph::{AttributedWebgraph, WeightScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub patience: usize,
    pub min_delta: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub hidden: usize,
    pub dropout: f64,
    /// Recorded for reproducibility; training is single-threaded.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            patience: 30,
            min_delta: 1e-4,
            max_epochs: 1000,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            hidden: 64,
            dropout: 0.5,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patience < 1 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if !(self.min_delta >= 0.0) {
            return Err(Error::Config("min_delta must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config("dropout must lie in [0, 1)".into()));
        }
        if self.hidden == 0 || self.max_epochs == 0 {
            return Err(Error::Config("hidden and max_epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// Node-id lists of a transductive split. `unlabeled` nodes contribute
/// features but no loss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub unlabeled: Vec<usize>,
}

impl SplitMasks {
    pub fn mask(ids: &[usize], node_count: usize) -> Vec<bool> {
        let mut m = vec![false; node_count];
        for &i in ids {
            m[i] = true;
        }
        m
    }
}

/// Uniform random 80:10:10 partition of the labeled ids; the other nodes of
/// `0..node_count` are unlabeled.
pub fn make_split(labeled: &[usize], node_count: usize, seed: u64) -> Result<SplitMasks> {
    if labeled.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "split needs at least 10 labeled nodes, got {}",
            labeled.len()
        )));
    }
    let mut ids = labeled.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != labeled.len() || ids.last().is_some_and(|&i| i >= node_count) {
        return Err(Error::invalid("labeled ids must be unique node ids"));
    }
    let is_labeled = SplitMasks::mask(&ids, node_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let n = ids.len();
    let n_val = (n as f64 * 0.1).round() as usize;
    let n_test = (n as f64 * 0.1).round() as usize;
    let n_train = n - n_val - n_test;
    let sorted = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    Ok(SplitMasks {
        train: sorted(&ids[..n_train]),
        val: sorted(&ids[n_train..n_train + n_val]),
        test: sorted(&ids[n_train + n_val..]),
        unlabeled: (0..node_count).filter(|&i| !is_labeled[i]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: GcnModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Full-batch Adam with early stopping on validation loss. `targets` holds
/// the class of every labeled node. Returns the best-validation parameters.
pub fn fit_gcn(
    input: &GraphInput<'_>,
    targets: &[Option<usize>],
    classes: usize,
    split: &SplitMasks,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let pick = |ids: &[usize]| -> Result<Vec<usize>> {
        ids.iter()
            .map(|&i| targets[i].ok_or_else(|| Error::invalid(format!("node {i} in split has no label"))))
            .collect()
    };
    let train_y = pick(&split.train)?;
    let val_y = pick(&split.val)?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::InsufficientData("train and validation sets must be non-empty".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = GcnModel::init(input.sx.cols(), config.hidden, classes, config.dropout, &mut rng);
    let mut adam = Adam::new(config.adam(), &model.param_sizes());
    let mut stopper = EarlyStopping::new(config.patience, config.min_delta);
    let mut best = model.clone();
    let (mut best_epoch, mut best_val_loss) = (0, f64::INFINITY);
    let mut history = Vec::new();

    for epoch in 1..=config.max_epochs {
        let cache = gcn_forward(&model, input, Some(&mut rng))?;
        let (train_loss, grads) = backward(&model, input, &cache, &split.train, &train_y);
        if !train_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: train_loss });
        }
        let g = grads.slices();
        adam.step(&mut model.params_mut(), &g);
        let val_loss = eval_loss(&model, input, &split.val, &val_y).map_err(|_| Error::Divergence {
            epoch,
            loss: f64::NAN,
        })?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: val_loss });
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        // min_delta only governs patience; the snapshot tracks the true minimum.
        if val_loss < best_val_loss {
            best = model.clone();
            best_epoch = epoch;
            best_val_loss = val_loss;
        }
        stopper.observe(epoch, val_loss);
        if stopper.should_stop() {
            break;
        }
    }
    Ok(TrainOutcome {
        model: best,
        history,
        best_epoch,
        best_val_loss,
    })
}

/// Probability of the positive class (index 1) per node.
pub fn gcn_positive_scores(model: &GcnModel, input: &GraphInput<'_>) -> Result<Vec<f64>> {
    let out = gcn_forward::<ChaCha8Rng>(model, input, None)?.log_probs;
    Ok((0..out.rows()).map(|r| out.get(r, 1).exp()).collect())
}

/// Z-scored node attributes.
pub fn node_features(graph: &AttributedWebgraph) -> Result<(DenseMatrix, Standardizer)> {
    let x = DenseMatrix::from_vec(graph.node_count(), graph.manifest().len(), graph.attribute_rows())?;
    let scaler = Standardizer::fit(&x);
    Ok((scaler.transform(&x), scaler))
}

/// Binary targets per node for a task; `None` for unlabeled nodes.
pub fn task_targets(
    graph: &AttributedWebgraph,
    labels: &BTreeMap<String, BinaryLabels>,
    task: Task,
) -> Vec<Option<usize>> {
    graph
        .nodes()
        .iter()
        .map(|n| labels.get(&n.domain).and_then(|l| task.target(l)).map(usize::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnRun {
    pub outcome: TrainOutcome,
    pub split: SplitMasks,
    pub scaler: Standardizer,
    pub test: MetricsReport,
    /// Positive-class probability of every node.
    pub scores: Vec<f64>,
}

/// Builds the operator and features from `graph`, splits the labeled nodes,
/// trains, and scores the test split at threshold 0.5.
pub fn train_gcn(
    graph: &AttributedWebgraph,
    labels: &BTreeMap<String, BinaryLabels>,
    task: Task,
    scheme: Option<WeightScheme>,
    config: &TrainConfig,
) -> Result<GcnRun> {
    let targets = task_targets(graph, labels, task);
    let labeled: Vec<usize> = (0..targets.len()).filter(|&i| targets[i].is_some()).collect();
    for class in [0, 1] {
        let count = targets.iter().filter(|t| **t == Some(class)).count();
        if count < 3 {
            return Err(Error::InsufficientData(format!(
                "task {task} needs at least 3 labeled nodes per class, class {class} has {count}"
            )));
        }
    }
    let s = normalize_adjacency(graph, scheme)?;
    let (x, scaler) = node_features(graph)?;
    let input = GraphInput::new(&s, &x)?;
    let split = make_split(&labeled, graph.node_count(), config.seed)?;
    let outcome = fit_gcn(&input, &targets, 2, &split, config)?;
    let scores = gcn_positive_scores(&outcome.model, &input)?;
    let predicted: Vec<bool> = split.test.iter().map(|&i| scores[i] > 0.5).collect();
    let actual: Vec<bool> = split.test.iter().map(|&i| targets[i] == Some(1)).collect();
    let test = classification_metrics(&predicted, &actual, &true)?;
    Ok(GcnRun {
        outcome,
        split,
        scaler,
        test,
        scores,
    })
}

pub const CHECKPOINT_FORMAT: &str = "linkscope-gcn";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to reuse a trained GCN on the same node set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnCheckpoint {
    pub format: String,
    pub version: u32,
    pub task: Task,
    pub scheme: Option<WeightScheme>,
    pub feature_names: Vec<String>,
    pub config: TrainConfig,
    pub scaler: Standardizer,
    pub model: GcnModel,
}

impl GcnCheckpoint {
    pub fn new(
        task: Task,
        scheme: Option<WeightScheme>,
        feature_names: Vec<String>,
        config: TrainConfig,
        scaler: Standardizer,
        model: GcnModel,
    ) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            task,
            scheme,
            feature_names,
            config,
            scaler,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported checkpoint {} v{}",
                c.format, c.version
            )));
        }
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingCheckpoint(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }
}
