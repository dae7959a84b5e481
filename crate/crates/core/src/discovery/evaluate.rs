use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::client::FeatureSource;
use crate::baselines::{predict_proba, FittedModel};
use crate::error::{Error, Result};

/// What an incomplete label list says about a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleLabel {
    Unreliable,
    Reliable,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialF1 {
    pub precision: f64,
    pub recall: f64,
    pub partial_f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    /// Discoveries the oracle has no verdict on.
    pub excluded: usize,
    pub oracle_unreliable: usize,
    /// Some ratio had a zero denominator and was reported as 0.
    pub undefined: bool,
}

/// F1 against an incomplete oracle. Discoveries the oracle does not know are
/// left out of precision; recall is over every oracle-unreliable domain.
pub fn partial_f1(discovered: &BTreeSet<String>, oracle: &BTreeMap<String, OracleLabel>) -> Result<PartialF1> {
    if oracle.is_empty() {
        return Err(Error::invalid("partial F1 needs a non-empty oracle"));
    }
    let (mut tp, mut fp, mut excluded) = (0, 0, 0);
    for d in discovered {
        match oracle.get(d).copied().unwrap_or(OracleLabel::Unknown) {
            OracleLabel::Unreliable => tp += 1,
            OracleLabel::Reliable => fp += 1,
            OracleLabel::Unknown => excluded += 1,
        }
    }
    let positives = oracle.values().filter(|&&l| l == OracleLabel::Unreliable).count();
    let mut undefined = false;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            undefined = true;
            0.0
        } else {
            num / den
        }
    };
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, positives as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    Ok(PartialF1 {
        precision,
        recall,
        partial_f1: f1,
        true_positives: tp,
        false_positives: fp,
        excluded,
        oracle_unreliable: positives,
        undefined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MisinfoRate {
    /// `None` when no domain could be classified.
    pub rate: Option<f64>,
    pub classified: usize,
    pub unreliable: usize,
    /// Domains dropped for lack of features.
    pub missing_features: usize,
}

/// Fraction of `domains` whose unreliable probability exceeds `threshold`.
pub fn misinfo_rate(
    domains: &[String],
    features: &dyn FeatureSource,
    reliability: &FittedModel,
    threshold: f64,
) -> Result<MisinfoRate> {
    let (fm, found, missing) = features.matrix(domains)?;
    let unreliable = if found.is_empty() {
        0
    } else {
        predict_proba(reliability, &fm)?.iter().filter(|&&p| p > threshold).count()
    };
    Ok(MisinfoRate {
        rate: (!found.is_empty()).then(|| unreliable as f64 / found.len() as f64),
        classified: found.len(),
        unreliable,
        missing_features: missing.len(),
    })
}
