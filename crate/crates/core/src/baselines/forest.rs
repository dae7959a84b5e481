use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, FeatureSampling, Tree, TreeParams};
use crate::nn::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_estimators: 50,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            tree: TreeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Mean positive-class fraction over trees.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

pub(crate) fn fit_forest(x: &DenseMatrix, y: &[bool], params: &ForestParams, seed: u64) -> Forest {
    let n = y.len();
    let k = params.max_features.resolve(x.cols());
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..params.n_estimators)
        .map(|_| {
            let mut rng = ChaCha8Rng::seed_from_u64(master.random());
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let sampling = if k >= x.cols() {
                FeatureSampling::All
            } else {
                FeatureSampling::Random { k, rng: &mut rng }
            };
            grow(x, &samples, &Criterion::Gini(y), &params.tree, sampling)
        })
        .collect();
    Forest { trees }
}
