//! Flat classifiers over per-domain feature vectors.

pub mod cv;
pub mod forest;
pub mod gbdt;
pub mod mlp;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{BinaryLabels, Task};
use crate::nn::DenseMatrix;
use crate::webgraph::AttributedWebgraph;

pub use cv::{kfold_cv, CvReport};
pub use forest::{Forest, ForestParams, MaxFeatures};
pub use gbdt::{Gbdt, GbdtParams};
pub use mlp::{Mlp, MlpParams};
pub use svm::{svm_objective, LinearSvm, SvmParams};
pub use tree::{Tree, TreeNode, TreeParams};

/// Rows of named features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub x: DenseMatrix,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, x: DenseMatrix) -> Result<Self> {
        if names.len() != x.cols() {
            return Err(Error::invalid(format!(
                "{} feature names for {} columns",
                names.len(),
                x.cols()
            )));
        }
        x.ensure_finite("feature matrix")?;
        Ok(Self { names, x })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let x = if rows.is_empty() {
            DenseMatrix::zeros(0, names.len())
        } else {
            DenseMatrix::from_rows(rows)?
        };
        Self::new(names, x)
    }

    /// Node attributes of a graph, one row per node in id order.
    pub fn from_graph(graph: &AttributedWebgraph) -> Result<Self> {
        let x = DenseMatrix::from_vec(graph.node_count(), graph.manifest().len(), graph.attribute_rows())?;
        Self::new(graph.manifest().names().to_vec(), x)
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn select(&self, ids: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: self.names.clone(),
            x: self.x.select_rows(ids),
        }
    }
}

/// Feature rows and binary targets of the labeled nodes of a graph.
pub fn labeled_features(
    graph: &AttributedWebgraph,
    labels: &BTreeMap<String, BinaryLabels>,
    task: Task,
) -> Result<(FeatureMatrix, Vec<bool>, Vec<usize>)> {
    let all = FeatureMatrix::from_graph(graph)?;
    let mut ids = Vec::new();
    let mut y = Vec::new();
    for node in graph.nodes() {
        if let Some(t) = labels.get(&node.domain).and_then(|l| task.target(l)) {
            ids.push(node.id.index());
            y.push(t);
        }
    }
    Ok((all.select(&ids), y, ids))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    DecisionTree,
    RandomForest,
    Gbdt,
    Mlp,
    LinearSvm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::DecisionTree,
        ModelFamily::RandomForest,
        ModelFamily::Gbdt,
        ModelFamily::Mlp,
        ModelFamily::LinearSvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::DecisionTree => "decision_tree",
            ModelFamily::RandomForest => "random_forest",
            ModelFamily::Gbdt => "gbdt",
            ModelFamily::Mlp => "mlp",
            ModelFamily::LinearSvm => "linear_svm",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == k)
            .ok_or_else(|| Error::invalid(format!("unknown model family {s:?}")))
    }
}

/// Family and hyperparameters. Only the section of the chosen family is
/// used; the others keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatModelSpec {
    pub family: ModelFamily,
    pub seed: u64,
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub gbdt: GbdtParams,
    pub mlp: MlpParams,
    pub svm: SvmParams,
}

impl Default for FlatModelSpec {
    fn default() -> Self {
        Self::new(ModelFamily::Gbdt)
    }
}

impl FlatModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        Self {
            family,
            seed: 0,
            tree: TreeParams::default(),
            forest: ForestParams::default(),
            gbdt: GbdtParams::default(),
            mlp: MlpParams::default(),
            svm: SvmParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelState {
    DecisionTree(Tree),
    RandomForest(Forest),
    Gbdt(Gbdt),
    Mlp(Mlp),
    LinearSvm(LinearSvm),
}

pub const FLAT_CHECKPOINT_FORMAT: &str = "linkscope-flat";
pub const FLAT_CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub format: String,
    pub version: u32,
    pub family: ModelFamily,
    pub feature_names: Vec<String>,
    /// Name of the class predicted as `true`.
    pub positive_class: String,
    pub seed: u64,
    pub state: ModelState,
}

impl FittedModel {
    /// Labels are `score > threshold`.
    pub fn threshold(&self) -> f64 {
        match self.family {
            ModelFamily::DecisionTree | ModelFamily::RandomForest | ModelFamily::Mlp => 0.5,
            ModelFamily::Gbdt | ModelFamily::LinearSvm => 0.0,
        }
    }

    pub fn with_positive_class(mut self, name: impl Into<String>) -> Self {
        self.positive_class = name.into();
        self
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingCheckpoint(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let m: Self = serde_json::from_str(&text)?;
        if m.format != FLAT_CHECKPOINT_FORMAT || m.version != FLAT_CHECKPOINT_VERSION {
            return Err(Error::invalid(format!("unsupported checkpoint {} v{}", m.format, m.version)));
        }
        Ok(m)
    }
}

pub fn fit_flat_model(spec: &FlatModelSpec, features: &FeatureMatrix, y: &[bool]) -> Result<FittedModel> {
    if features.rows() != y.len() {
        return Err(Error::invalid(format!(
            "{} feature rows for {} labels",
            features.rows(),
            y.len()
        )));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    if pos < 2 || y.len() - pos < 2 {
        return Err(Error::InsufficientData("need at least 2 samples per class".into()));
    }
    let x = &features.x;
    let all: Vec<usize> = (0..y.len()).collect();
    let state = match spec.family {
        ModelFamily::DecisionTree => ModelState::DecisionTree(tree::grow::<rand_chacha::ChaCha8Rng>(
            x,
            &all,
            &tree::Criterion::Gini(y),
            &spec.tree,
            tree::FeatureSampling::All,
        )),
        ModelFamily::RandomForest => ModelState::RandomForest(forest::fit_forest(x, y, &spec.forest, spec.seed)),
        ModelFamily::Gbdt => ModelState::Gbdt(gbdt::fit_gbdt(x, y, &spec.gbdt)),
        ModelFamily::Mlp => ModelState::Mlp(mlp::fit_mlp(x, y, &spec.mlp, spec.seed)),
        ModelFamily::LinearSvm => ModelState::LinearSvm(svm::fit_svm(x, y, &spec.svm)),
    };
    Ok(FittedModel {
        format: FLAT_CHECKPOINT_FORMAT.into(),
        version: FLAT_CHECKPOINT_VERSION,
        family: spec.family,
        feature_names: features.names.clone(),
        positive_class: "positive".into(),
        seed: spec.seed,
        state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<bool>,
    /// Monotone positive-class scores: vote fraction, log-odds, margin, or
    /// probability depending on the family.
    pub scores: Vec<f64>,
}

pub fn predict_flat(model: &FittedModel, features: &FeatureMatrix) -> Result<Predictions> {
    if model.feature_names != features.names {
        return Err(Error::FeatureMismatch {
            expected: model.feature_names.clone(),
            found: features.names.clone(),
        });
    }
    let x = &features.x;
    let scores: Vec<f64> = match &model.state {
        ModelState::DecisionTree(t) => (0..x.rows()).map(|i| t.predict_row(x.row(i))).collect(),
        ModelState::RandomForest(f) => (0..x.rows()).map(|i| f.score_row(x.row(i))).collect(),
        ModelState::Gbdt(g) => (0..x.rows()).map(|i| g.score_row(x.row(i))).collect(),
        ModelState::Mlp(m) => m.probabilities(x),
        ModelState::LinearSvm(s) => (0..x.rows()).map(|i| s.margin_row(x.row(i))).collect(),
    };
    let t = model.threshold();
    Ok(Predictions {
        labels: scores.iter().map(|&s| s > t).collect(),
        scores,
    })
}

/// Positive-class probabilities. Log-odds and margin scores pass through the
/// logistic function, so `0.5` is the decision threshold for every family.
pub fn predict_proba(model: &FittedModel, features: &FeatureMatrix) -> Result<Vec<f64>> {
    let pred = predict_flat(model, features)?;
    Ok(match model.family {
        ModelFamily::Gbdt | ModelFamily::LinearSvm => {
            pred.scores.iter().map(|&s| 1.0 / (1.0 + (-s).exp())).collect()
        }
        _ => pred.scores,
    })
}

/// Normalized total impurity decrease per feature, for tree families.
pub fn feature_importances(model: &FittedModel) -> Result<Vec<f64>> {
    let raw: Vec<f64> = match &model.state {
        ModelState::DecisionTree(t) => t.gains.clone(),
        ModelState::RandomForest(f) => {
            let mut acc = vec![0.0; model.feature_names.len()];
            for t in &f.trees {
                let total: f64 = t.gains.iter().sum();
                if total > 0.0 {
                    for (a, g) in acc.iter_mut().zip(&t.gains) {
                        *a += g / total;
                    }
                }
            }
            acc
        }
        ModelState::Gbdt(g) => {
            let mut acc = vec![0.0; model.feature_names.len()];
            for t in &g.trees {
                for (a, v) in acc.iter_mut().zip(&t.gains) {
                    *a += v;
                }
            }
            acc
        }
        ModelState::Mlp(_) | ModelState::LinearSvm(_) => {
            return Err(Error::UnsupportedFamily(model.family.as_str()))
        }
    };
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::InsufficientData("model made no informative splits".into()));
    }
    Ok(raw.iter().map(|v| v / total).collect())
}
