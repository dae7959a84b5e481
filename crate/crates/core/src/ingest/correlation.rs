use std::collections::BTreeMap;

use serde::Serialize;

use super::labels::{BinaryLabels, Reliability};
use crate::error::{Error, Result};
use crate::webgraph::AttributedWebgraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    /// `None` when either series has zero variance.
    pub r: Option<f64>,
    pub samples: usize,
}

/// Pearson correlation between an attribute and binary reliability, with
/// reliable coded as 1, over nodes of known reliability.
pub fn attribute_label_correlation(
    graph: &AttributedWebgraph,
    labels: &BTreeMap<String, BinaryLabels>,
    attribute: &str,
) -> Result<Correlation> {
    let col = graph
        .manifest()
        .index_of(attribute)
        .ok_or_else(|| Error::invalid(format!("unknown attribute {attribute:?}")))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for node in graph.nodes() {
        let y = match labels.get(&node.domain).map(|l| l.reliability) {
            Some(Reliability::Reliable) => 1.0,
            Some(Reliability::Unreliable) => 0.0,
            _ => continue,
        };
        xs.push(node.attributes[col]);
        ys.push(y);
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs at least 2 labeled nodes".into(),
        ));
    }
    Ok(Correlation {
        r: pearson(&xs, &ys),
        samples: xs.len(),
    })
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
