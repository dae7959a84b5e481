use serde::{Deserialize, Serialize};

use super::DenseMatrix;

/// Per-column z-scoring. Constant columns are centered and left unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DenseMatrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mean: Vec<f64> = x.column_sums().iter().map(|s| s / n).collect();
        let mut var = vec![0.0; x.cols()];
        for r in 0..x.rows() {
            for (c, v) in x.row(r).iter().enumerate() {
                var[c] += (v - mean[c]).powi(2);
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / self.scale[c];
            }
        }
        out
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(c, v)| (v - self.mean[c]) / self.scale[c])
            .collect()
    }
}
