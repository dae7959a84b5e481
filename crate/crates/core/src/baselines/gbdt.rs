use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, FeatureSampling, Tree, TreeParams};
use crate::nn::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
        }
    }
}

/// Gradient-boosted regression trees on the logistic loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbdt {
    /// Prior log-odds of the positive class.
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Mean training log-loss after each round, starting with the prior.
    pub train_loss: Vec<f64>,
}

const HESSIAN_FLOOR: f64 = 1e-12;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn log_loss(y: &[bool], f: &[f64]) -> f64 {
    // log(1 + e^{-m}) with margin m = ±f, computed stably
    let total: f64 = y
        .iter()
        .zip(f)
        .map(|(&yi, &fi)| {
            let m = if yi { fi } else { -fi };
            if m > 0.0 {
                (-m).exp().ln_1p()
            } else {
                -m + m.exp().ln_1p()
            }
        })
        .sum();
    total / y.len() as f64
}

impl Gbdt {
    /// Raw log-odds score.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}

pub(crate) fn fit_gbdt(x: &DenseMatrix, y: &[bool], params: &GbdtParams) -> Gbdt {
    let n = y.len();
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let prior = (pos / n as f64).clamp(1e-12, 1.0 - 1e-12);
    let init = (prior / (1.0 - prior)).ln();
    let mut f = vec![init; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut train_loss = vec![log_loss(y, &f)];
    let tree_params = TreeParams {
        max_depth: Some(params.max_depth),
        min_samples_split: params.min_samples_split,
        min_samples_leaf: 1,
    };
    let all: Vec<usize> = (0..n).collect();

    for _ in 0..params.n_estimators {
        let p: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
        let grad: Vec<f64> = y.iter().zip(&p).map(|(&yi, &pi)| yi as u8 as f64 - pi).collect();
        let hess: Vec<f64> = p.iter().map(|&pi| pi * (1.0 - pi)).collect();
        let newton = |idx: &[usize]| {
            let g: f64 = idx.iter().map(|&i| grad[i]).sum();
            let h: f64 = idx.iter().map(|&i| hess[i]).sum();
            g / h.max(HESSIAN_FLOOR)
        };
        let criterion = Criterion::SquaredError {
            targets: &grad,
            leaf: &newton,
        };
        let tree = grow::<ChaCha8Rng>(x, &all, &criterion, &tree_params, FeatureSampling::All);
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += params.learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
        train_loss.push(log_loss(y, &f));
    }
    Gbdt {
        init,
        learning_rate: params.learning_rate,
        trees,
        train_loss,
    }
}
