use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary classification metrics for one designated positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub binary_f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// Set when TP + FP + FN = 0, in which case F1 is reported as 0.
    pub f1_undefined: bool,
    pub task: Option<String>,
    pub model: Option<String>,
    pub seed: Option<u64>,
}

impl MetricsReport {
    pub fn with_context(mut self, task: impl Into<String>, model: impl Into<String>, seed: u64) -> Self {
        self.task = Some(task.into());
        self.model = Some(model.into());
        self.seed = Some(seed);
        self
    }
}

pub fn classification_metrics<T: PartialEq>(
    predicted: &[T],
    actual: &[T],
    positive: &T,
) -> Result<MetricsReport> {
    if predicted.len() != actual.len() {
        return Err(Error::invalid(format!(
            "predicted has {} labels, actual has {}",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("metrics need at least one prediction"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (p, a) in predicted.iter().zip(actual) {
        match (p == positive, a == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let correct = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let f1_den = 2 * tp + fp + fn_;
    Ok(MetricsReport {
        samples: predicted.len(),
        accuracy: ratio(correct, predicted.len()),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        binary_f1: ratio(2 * tp, f1_den),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        f1_undefined: f1_den == 0,
        task: None,
        model: None,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let y = [true, false, true];
        let m = classification_metrics(&y, &y, &true).unwrap();
        assert_eq!((m.accuracy, m.binary_f1), (1.0, 1.0));
    }

    #[test]
    fn one_of_each() {
        let p = [true, true, false, false];
        let a = [true, false, true, false];
        let m = classification_metrics(&p, &a, &true).unwrap();
        assert_eq!((m.accuracy, m.binary_f1), (0.5, 0.5));
    }

    #[test]
    fn no_positives_anywhere_flags_f1() {
        let m = classification_metrics(&["r", "r"], &["r", "r"], &"u").unwrap();
        assert!(m.f1_undefined);
        assert_eq!(m.binary_f1, 0.0);
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(classification_metrics(&[1], &[1, 2], &1).is_err());
    }
}
