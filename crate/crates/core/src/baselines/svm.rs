use serde::{Deserialize, Serialize};

use crate::nn::{DenseMatrix, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    /// Weight `C` of the summed hinge loss against `½‖w‖²`.
    pub c: f64,
    pub max_iter: usize,
    /// Step size at iteration 1; decays as `1/√t`.
    pub step: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 2000,
            step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub scaler: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective of the best averaged iterate after each iteration.
    pub objective: Vec<f64>,
}

/// `½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b))` with `y ∈ {−1, +1}`.
pub fn svm_objective(x: &DenseMatrix, y: &[bool], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = (0..x.rows())
        .map(|i| {
            let s = if y[i] { 1.0 } else { -1.0 };
            (1.0 - s * (dot(x.row(i), w) + b)).max(0.0)
        })
        .sum();
    reg + c * hinge
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearSvm {
    pub fn margin_row(&self, row: &[f64]) -> f64 {
        dot(&self.scaler.transform_row(row), &self.weights) + self.bias
    }
}

/// Full-batch subgradient descent on the objective divided by `C·n`, with
/// iterate averaging. Deterministic; returns the best averaged iterate.
pub(crate) fn fit_svm(x_raw: &DenseMatrix, y: &[bool], params: &SvmParams) -> LinearSvm {
    let scaler = Standardizer::fit(x_raw);
    let x = scaler.transform(x_raw);
    let (n, d) = (x.rows(), x.cols());
    let lambda = 1.0 / (params.c * n as f64);
    let sign: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut avg_w = vec![0.0; d];
    let mut avg_b = 0.0;
    let mut best = (svm_objective(&x, y, &w, b, params.c), w.clone(), b);
    let mut objective = Vec::with_capacity(params.max_iter);
    let mut gw = vec![0.0; d];

    for t in 1..=params.max_iter {
        for (g, wv) in gw.iter_mut().zip(&w) {
            *g = lambda * wv;
        }
        let mut gb = 0.0;
        for i in 0..n {
            let row = x.row(i);
            if sign[i] * (dot(row, &w) + b) < 1.0 {
                for (g, xv) in gw.iter_mut().zip(row) {
                    *g -= sign[i] * xv / n as f64;
                }
                gb -= sign[i] / n as f64;
            }
        }
        let eta = params.step / (t as f64).sqrt();
        for (wv, g) in w.iter_mut().zip(&gw) {
            *wv -= eta * g;
        }
        b -= eta * gb;

        let k = t as f64;
        for (a, wv) in avg_w.iter_mut().zip(&w) {
            *a += (wv - *a) / k;
        }
        avg_b += (b - avg_b) / k;
        let obj = svm_objective(&x, y, &avg_w, avg_b, params.c);
        if obj < best.0 {
            best = (obj, avg_w.clone(), avg_b);
        }
        objective.push(best.0);
    }
    LinearSvm {
        scaler,
        weights: best.1,
        bias: best.2,
        objective,
    }
}
