use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{fit_flat_model, predict_flat, FeatureMatrix, FlatModelSpec};
use crate::error::{Error, Result};
use crate::eval::{classification_metrics, MetricsReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    /// Test indices of each repetition.
    pub test_indices: Vec<Vec<usize>>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `k` independent random splits with `test_fraction` held out (0.2 for the
/// usual 80:20 protocol). Fold `r` reseeds the model with `spec.seed + r`.
pub fn kfold_cv(
    spec: &FlatModelSpec,
    features: &FeatureMatrix,
    y: &[bool],
    k: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<CvReport> {
    if k < 2 {
        return Err(Error::invalid("cross-validation needs k >= 2"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test fraction must lie in (0, 1)"));
    }
    let n = y.len();
    let n_test = ((n as f64) * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::InsufficientData(format!("{n} samples cannot be split {test_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = Vec::with_capacity(k);
    let mut test_indices = Vec::with_capacity(k);
    for r in 0..k {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let (test, train) = order.split_at(n_test);
        let mut test = test.to_vec();
        test.sort_unstable();
        let mut train = train.to_vec();
        train.sort_unstable();
        let train_y: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        if train_y.iter().all(|&v| v) || train_y.iter().all(|&v| !v) {
            return Err(Error::InsufficientData(format!("fold {r} training set lacks a class")));
        }
        let fold_spec = spec.clone().with_seed(spec.seed.wrapping_add(r as u64));
        let model = fit_flat_model(&fold_spec, &features.select(&train), &train_y)?;
        let pred = predict_flat(&model, &features.select(&test))?;
        let actual: Vec<bool> = test.iter().map(|&i| y[i]).collect();
        folds.push(classification_metrics(&pred.labels, &actual, &true)?.with_context(
            "",
            spec.family.as_str(),
            fold_spec.seed,
        ));
        test_indices.push(test);
    }
    let acc: Vec<f64> = folds.iter().map(|m| m.accuracy).collect();
    let f1: Vec<f64> = folds.iter().map(|m| m.binary_f1).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&acc);
    let (mean_f1, std_f1) = mean_std(&f1);
    Ok(CvReport {
        folds,
        test_indices,
        mean_accuracy,
        std_accuracy,
        mean_f1,
        std_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::ModelFamily;

    fn perfect() -> (FeatureMatrix, Vec<bool>) {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 + if i >= 25 { 100.0 } else { 0.0 }, (i % 7) as f64]).collect();
        let y: Vec<bool> = (0..50).map(|i| i >= 25).collect();
        (FeatureMatrix::from_rows(vec!["a".into(), "b".into()], &rows).unwrap(), y)
    }

    #[test]
    fn perfect_feature_scores_one() {
        let (fm, y) = perfect();
        let r = kfold_cv(&FlatModelSpec::new(ModelFamily::DecisionTree), &fm, &y, 5, 0.2, 3).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        assert_eq!(r.std_accuracy, 0.0);
        assert_eq!(r.folds.len(), 5);
        assert!(r.test_indices.iter().all(|t| t.len() == 10));
    }

    #[test]
    fn same_seed_same_folds() {
        let (fm, y) = perfect();
        let spec = FlatModelSpec::new(ModelFamily::DecisionTree);
        let a = kfold_cv(&spec, &fm, &y, 5, 0.2, 8).unwrap();
        let b = kfold_cv(&spec, &fm, &y, 5, 0.2, 8).unwrap();
        assert_eq!(a.test_indices, b.test_indices);
        let c = kfold_cv(&spec, &fm, &y, 5, 0.2, 9).unwrap();
        assert_ne!(a.test_indices, c.test_indices);
    }

    #[test]
    fn k_one_rejected() {
        let (fm, y) = perfect();
        assert!(kfold_cv(&FlatModelSpec::default(), &fm, &y, 1, 0.2, 0).is_err());
    }
}
