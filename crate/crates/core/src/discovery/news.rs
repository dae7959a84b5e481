use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::{fit_flat_model, predict_flat, FeatureMatrix, FittedModel, FlatModelSpec, ModelFamily};
use crate::error::{Error, Result};
use crate::eval::{classification_metrics, MetricsReport};
use crate::nn::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewsClassifier {
    #[serde(skip)]
    pub model: FittedModel,
    pub negatives_used: usize,
    /// Metrics on the held-out 20%.
    pub holdout: MetricsReport,
}

/// Fits the news-versus-other GBDT.
///
/// Draws `round(ratio * |positives|)` negatives without replacement, holds
/// out a random 20% of the combined samples and trains on the rest.
pub fn train_news_classifier(
    positives: &FeatureMatrix,
    negative_pool: &FeatureMatrix,
    ratio: f64,
    seed: u64,
) -> Result<NewsClassifier> {
    if positives.names != negative_pool.names {
        return Err(Error::FeatureMismatch {
            expected: positives.names.clone(),
            found: negative_pool.names.clone(),
        });
    }
    if positives.rows() == 0 || negative_pool.rows() == 0 {
        return Err(Error::InsufficientData("news classifier pools must be non-empty".into()));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::invalid("negative ratio must be positive"));
    }
    let k = (ratio * positives.rows() as f64).round() as usize;
    if k > negative_pool.rows() {
        return Err(Error::InsufficientData(format!(
            "ratio {ratio} needs {k} negatives, pool has {}",
            negative_pool.rows()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, negative_pool.rows(), k).into_vec();
    picked.sort_unstable();
    let negatives = negative_pool.select(&picked);

    let cols = positives.names.len();
    let mut data = positives.x.data().to_vec();
    data.extend_from_slice(negatives.x.data());
    let n = positives.rows() + k;
    let all = FeatureMatrix::new(positives.names.clone(), DenseMatrix::from_vec(n, cols, data)?)?;
    let y: Vec<bool> = (0..n).map(|i| i < positives.rows()).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_test = ((n as f64) * 0.2).round().max(1.0) as usize;
    let (test, train) = order.split_at(n_test);
    let train_y: Vec<bool> = train.iter().map(|&i| y[i]).collect();
    let spec = FlatModelSpec::new(ModelFamily::Gbdt).with_seed(seed);
    let model = fit_flat_model(&spec, &all.select(train), &train_y)?.with_positive_class("news");
    let pred = predict_flat(&model, &all.select(test))?;
    let actual: Vec<bool> = test.iter().map(|&i| y[i]).collect();
    let holdout = classification_metrics(&pred.labels, &actual, &true)?.with_context("news", "gbdt", seed);
    Ok(NewsClassifier {
        model,
        negatives_used: k,
        holdout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn pools(n_pos: usize, n_neg: usize, seed: u64) -> (FeatureMatrix, FeatureMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut gen = |shift: f64, n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..3).map(|j| noise.sample(&mut rng) + if j == 0 { shift } else { 0.0 }).collect())
                .collect()
        };
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let p = FeatureMatrix::from_rows(names.clone(), &gen(6.0, n_pos)).unwrap();
        let q = FeatureMatrix::from_rows(names, &gen(0.0, n_neg)).unwrap();
        (p, q)
    }

    #[test]
    fn separable_pools_score_high() {
        for seed in 0..10 {
            let (p, q) = pools(100, 300, seed);
            let c = train_news_classifier(&p, &q, 1.0, seed).unwrap();
            assert_eq!(c.negatives_used, 100);
            assert!(c.holdout.accuracy >= 0.95, "seed {seed}: {}", c.holdout.accuracy);
        }
    }

    #[test]
    fn equal_pools_use_everything() {
        let (p, q) = pools(40, 40, 1);
        assert_eq!(train_news_classifier(&p, &q, 1.0, 1).unwrap().negatives_used, 40);
    }

    #[test]
    fn small_pool_rejected() {
        let (p, q) = pools(40, 30, 1);
        assert!(matches!(
            train_news_classifier(&p, &q, 1.0, 1),
            Err(Error::InsufficientData(_))
        ));
    }
}
