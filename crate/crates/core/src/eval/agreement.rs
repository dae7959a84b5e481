use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Items × annotators matrix of nominal labels; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet<T> {
    items: Vec<Vec<Option<T>>>,
}

impl<T: Ord + Clone> AnnotationSet<T> {
    pub fn new(items: Vec<Vec<Option<T>>>) -> Result<Self> {
        let annotators = items.first().map_or(0, Vec::len);
        if annotators < 2 {
            return Err(Error::invalid("annotation set needs at least 2 annotators"));
        }
        if items.iter().any(|r| r.len() != annotators) {
            return Err(Error::invalid("every item needs one slot per annotator"));
        }
        Ok(Self { items })
    }

    /// Builds from annotator-major rows (one row per annotator).
    pub fn from_annotators(rows: Vec<Vec<Option<T>>>) -> Result<Self> {
        let units = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != units) {
            return Err(Error::invalid("annotator rows differ in length"));
        }
        let items = (0..units)
            .map(|u| rows.iter().map(|r| r[u].clone()).collect())
            .collect();
        Self::new(items)
    }

    pub fn items(&self) -> &[Vec<Option<T>>] {
        &self.items
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alpha {
    /// `None` when there are no pairable values or only one label is used.
    pub alpha: Option<f64>,
    /// Number of values in items with at least two values.
    pub pairable: usize,
}

/// Krippendorff's alpha with the nominal metric, from the coincidence matrix.
pub fn krippendorff_alpha<T: Ord + Clone>(annotations: &AnnotationSet<T>) -> Alpha {
    let mut coincidence: BTreeMap<(T, T), f64> = BTreeMap::new();
    let mut pairable = 0;
    for item in &annotations.items {
        let values: Vec<&T> = item.iter().flatten().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        pairable += m;
        let w = 1.0 / (m - 1) as f64;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry(((*a).clone(), (*b).clone())).or_insert(0.0) += w;
                }
            }
        }
    }
    if pairable == 0 {
        return Alpha {
            alpha: None,
            pairable,
        };
    }
    let mut marginals: BTreeMap<&T, f64> = BTreeMap::new();
    let mut disagree = 0.0;
    for ((c, k), v) in &coincidence {
        *marginals.entry(c).or_insert(0.0) += v;
        if c != k {
            disagree += v;
        }
    }
    let n: f64 = marginals.values().sum();
    let sum_sq: f64 = marginals.values().map(|v| v * v).sum();
    let expected = n * n - sum_sq;
    let alpha = if expected > 0.0 {
        Some(1.0 - (n - 1.0) * disagree / expected)
    } else {
        None
    };
    Alpha { alpha, pairable }
}
