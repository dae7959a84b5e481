use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::layers::{log_softmax, nll_with_grad, relu, relu_backward, Dense};
use crate::nn::{Adam, AdamConfig, DenseMatrix, Standardizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// L2 penalty on weights, added to the mean loss.
    pub l2: f64,
    /// Stop after `patience` epochs without a training-loss decrease of `tol`.
    pub tol: f64,
    pub patience: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![200, 200],
            learning_rate: 1e-3,
            max_epochs: 200,
            batch_size: 200,
            l2: 1e-4,
            tol: 1e-4,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub scaler: Standardizer,
    pub layers: Vec<Dense>,
}

impl Mlp {
    fn forward_all(&self, x: &DenseMatrix) -> (Vec<DenseMatrix>, Vec<DenseMatrix>, DenseMatrix) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (k, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&h);
            inputs.push(h);
            h = if k + 1 < self.layers.len() { relu(&z) } else { z.clone() };
            pre.push(z);
        }
        (inputs, pre, log_softmax(&h))
    }

    /// Positive-class probabilities for raw (unscaled) rows.
    pub fn probabilities(&self, x_raw: &DenseMatrix) -> Vec<f64> {
        let (_, _, lp) = self.forward_all(&self.scaler.transform(x_raw));
        (0..lp.rows()).map(|r| lp.get(r, 1).exp()).collect()
    }
}

pub(crate) fn fit_mlp(x_raw: &DenseMatrix, y: &[bool], params: &MlpParams, seed: u64) -> Mlp {
    let scaler = Standardizer::fit(x_raw);
    let x = scaler.transform(x_raw);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = vec![x.cols()];
    dims.extend(&params.hidden);
    dims.push(2);
    let layers: Vec<Dense> = dims.windows(2).map(|w| Dense::init(w[0], w[1], &mut rng)).collect();
    let mut model = Mlp { scaler, layers };
    let sizes: Vec<usize> = model
        .layers
        .iter()
        .flat_map(|l| l.params().map(<[f64]>::len))
        .collect();
    let mut adam = Adam::new(
        AdamConfig {
            learning_rate: params.learning_rate,
            ..AdamConfig::default()
        },
        &sizes,
    );
    let targets: Vec<usize> = y.iter().map(|&v| v as usize).collect();
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let batch = params.batch_size.clamp(1, x.rows().max(1));
    let (mut best, mut stale) = (f64::INFINITY, 0);

    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let xb = x.select_rows(chunk);
            let rows: Vec<usize> = (0..chunk.len()).collect();
            let yb: Vec<usize> = chunk.iter().map(|&i| targets[i]).collect();
            let (inputs, pre, lp) = model.forward_all(&xb);
            let (loss, mut grad) = nll_with_grad(&lp, &rows, &yb);
            epoch_loss += loss * chunk.len() as f64;

            let mut grads = Vec::with_capacity(model.layers.len());
            for k in (0..model.layers.len()).rev() {
                let layer = &model.layers[k];
                if k + 1 < model.layers.len() {
                    relu_backward(&pre[k], &mut grad);
                }
                let mut g = layer.param_grad(&inputs[k], &grad);
                for (gw, w) in g.weight.data_mut().iter_mut().zip(layer.weight.data()) {
                    *gw += params.l2 * w;
                }
                grad = layer.input_grad(&grad);
                grads.push(g);
            }
            grads.reverse();
            let gs: Vec<&[f64]> = grads.iter().flat_map(|g| g.slices()).collect();
            let mut ps: Vec<&mut [f64]> = model.layers.iter_mut().flat_map(|l| l.params_mut()).collect();
            adam.step(&mut ps, &gs);
        }
        epoch_loss /= x.rows() as f64;
        if epoch_loss < best - params.tol {
            best = epoch_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= params.patience {
                break;
            }
        }
    }
    model
}
