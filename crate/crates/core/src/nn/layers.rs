use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DenseMatrix;

/// Affine layer `y = x·W + b` with `W` of shape `in × out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

/// Gradients of a [`Dense`] layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

impl Dense {
    /// Weights uniform in `±1/√fan_in`, zero biases.
    pub fn init<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let data = (0..fan_in * fan_out)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            weight: DenseMatrix::from_vec(fan_in, fan_out, data).expect("sized"),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: DenseMatrix::zeros(fan_in, fan_out),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut y = x.matmul(&self.weight);
        y.add_row_vector(&self.bias);
        y
    }

    /// Parameter gradients given the layer input and the output gradient.
    pub fn param_grad(&self, x: &DenseMatrix, grad_out: &DenseMatrix) -> DenseGrad {
        DenseGrad {
            weight: x.t_matmul(grad_out),
            bias: grad_out.column_sums(),
        }
    }

    /// Gradient with respect to the layer input.
    pub fn input_grad(&self, grad_out: &DenseMatrix) -> DenseMatrix {
        grad_out.matmul_t(&self.weight)
    }

    pub fn params_mut(&mut self) -> [&mut [f64]; 2] {
        [self.weight.data_mut(), &mut self.bias]
    }

    pub fn params(&self) -> [&[f64]; 2] {
        [self.weight.data(), &self.bias]
    }
}

impl DenseGrad {
    pub fn slices(&self) -> [&[f64]; 2] {
        [self.weight.data(), &self.bias]
    }
}

pub fn relu(x: &DenseMatrix) -> DenseMatrix {
    let mut y = x.clone();
    y.map_in_place(|v| v.max(0.0));
    y
}

/// Zeroes `grad` wherever the pre-activation was not positive.
pub fn relu_backward(pre: &DenseMatrix, grad: &mut DenseMatrix) {
    for (g, &z) in grad.data_mut().iter_mut().zip(pre.data()) {
        if z <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Inverted-dropout mask: entries are 0 with probability `rate`, else
/// `1/(1-rate)`.
pub fn dropout_mask<R: Rng>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> DenseMatrix {
    let keep = 1.0 - rate;
    let data = (0..rows * cols)
        .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect();
    DenseMatrix::from_vec(rows, cols, data).expect("sized")
}

pub fn log_softmax(logits: &DenseMatrix) -> DenseMatrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        for v in row {
            *v -= lse;
        }
    }
    out
}

/// Mean negative log-likelihood over `rows` and its gradient with respect
/// to the logits that produced `log_probs`.
pub fn nll_with_grad(log_probs: &DenseMatrix, rows: &[usize], targets: &[usize]) -> (f64, DenseMatrix) {
    let mut grad = DenseMatrix::zeros(log_probs.rows(), log_probs.cols());
    let scale = 1.0 / rows.len() as f64;
    let mut loss = 0.0;
    for (&r, &t) in rows.iter().zip(targets) {
        loss -= log_probs.get(r, t);
        let g = grad.row_mut(r);
        for (c, gv) in g.iter_mut().enumerate() {
            *gv = log_probs.get(r, c).exp() * scale;
        }
        g[t] -= scale;
    }
    (loss * scale, grad)
}
