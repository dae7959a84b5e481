//! Planted-partition webgraphs with class-conditional attributes.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use serde::{Deserialize, Serialize};

use super::labels::{BinaryLabels, ReliabilityGrade};
use crate::error::{Error, Result};
use crate::webgraph::{
    build_graph, AttributeManifest, AttributedWebgraph, EdgeKind, EdgeRecord, NodeRecord,
    CANONICAL_ATTRIBUTES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub node_count: usize,
    pub class_count: usize,
    /// Probability that an edge joins two nodes of the same class.
    pub homophily: f64,
    /// Mean shift per class index on the informative attributes.
    pub attribute_signal: f64,
    pub mean_degree: f64,
    pub seed: u64,
    /// Fraction of nodes left unlabeled.
    pub unlabeled_fraction: f64,
    pub informative_attributes: usize,
    pub attribute_count: usize,
    /// Fraction of edges recorded as outlink observations.
    pub outlink_fraction: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            node_count: 1000,
            class_count: 2,
            homophily: 0.9,
            attribute_signal: 1.0,
            mean_degree: 10.0,
            seed: 0,
            unlabeled_fraction: 0.2,
            informative_attributes: 2,
            attribute_count: 10,
            outlink_fraction: 0.5,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("synthetic config: {m}")));
        if self.class_count < 2 {
            return bad("class_count must be at least 2");
        }
        if self.node_count < 2 * self.class_count {
            return bad("node_count must allow two nodes per class");
        }
        if !(self.mean_degree > 0.0 && self.mean_degree < self.node_count as f64) {
            return bad("mean_degree must lie in (0, node_count)");
        }
        for (name, v) in [
            ("homophily", self.homophily),
            ("unlabeled_fraction", self.unlabeled_fraction),
            ("outlink_fraction", self.outlink_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.attribute_signal.is_finite() && self.attribute_signal >= 0.0) {
            return bad("attribute_signal must be finite and nonnegative");
        }
        if self.attribute_count == 0 || self.informative_attributes > self.attribute_count {
            return bad("need 0 < attribute_count and informative_attributes <= attribute_count");
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        (self.node_count as f64 * self.mean_degree / 2.0).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    pub graph: AttributedWebgraph,
    /// Labels of the labeled nodes only; unlabeled nodes are absent.
    pub labels: BTreeMap<String, BinaryLabels>,
    /// Planted class of every node, indexed by node id.
    pub classes: Vec<usize>,
    /// The records the graph was built from, for writing back to files.
    pub node_records: Vec<NodeRecord>,
    pub edge_records: Vec<EdgeRecord>,
}

/// Attribute names: the canonical set first, then `noise_<k>` columns.
pub fn synthetic_manifest(count: usize) -> AttributeManifest {
    let names = (0..count).map(|i| match CANONICAL_ATTRIBUTES.get(i) {
        Some(n) => n.to_string(),
        None => format!("noise_{}", i - CANONICAL_ATTRIBUTES.len()),
    });
    AttributeManifest::new(names).expect("generated names are unique")
}

/// Labels for a planted class. Odd classes are the positive class of every
/// task: unreliable, extreme, right.
pub fn class_labels(class: usize) -> BinaryLabels {
    if class % 2 == 1 {
        BinaryLabels::from_parts(ReliabilityGrade::Low, Some(2))
    } else {
        BinaryLabels::from_parts(ReliabilityGrade::High, Some(-1))
    }
}

pub fn generate_synthetic_webgraph(config: &SyntheticConfig) -> Result<SyntheticGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.node_count;
    let c = config.class_count;

    let mut classes: Vec<usize> = (0..n).map(|i| i % c).collect();
    classes.shuffle(&mut rng);
    let mut members = vec![Vec::new(); c];
    for (i, &k) in classes.iter().enumerate() {
        members[k].push(i);
    }

    let links_dist = Geometric::new(1.0 / 20.0).expect("valid probability");
    let domains: Vec<String> = (0..n).map(|i| format!("site{i:05}.test")).collect();
    let mut edges = Vec::with_capacity(config.edge_count());
    let mut in_sum = vec![0u64; n];
    let mut out_sum = vec![0u64; n];
    for _ in 0..config.edge_count() {
        let s = rng.random_range(0..n);
        let ks = classes[s];
        let t = if rng.random::<f64>() < config.homophily {
            loop {
                let t = members[ks][rng.random_range(0..members[ks].len())];
                if t != s {
                    break t;
                }
            }
        } else {
            let mut kt = rng.random_range(0..c - 1);
            if kt >= ks {
                kt += 1;
            }
            members[kt][rng.random_range(0..members[kt].len())]
        };
        let links = 1 + links_dist.sample(&mut rng);
        let ref_pages = rng.random_range(1..=links);
        let kind = if rng.random::<f64>() < config.outlink_fraction {
            EdgeKind::Outlink
        } else {
            EdgeKind::Backlink
        };
        in_sum[t] += links;
        out_sum[s] += links;
        edges.push(EdgeRecord {
            source: domains[s].clone(),
            target: domains[t].clone(),
            kind,
            links,
            ref_pages,
        });
    }

    let manifest = synthetic_manifest(config.attribute_count);
    let extra = Geometric::new(1.0 / 500.0).expect("valid probability");
    let nodes: Vec<NodeRecord> = (0..n)
        .map(|i| {
            let shift = config.attribute_signal * classes[i] as f64;
            let attributes = (0..config.attribute_count)
                .map(|a| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if a < config.informative_attributes {
                        z + shift
                    } else {
                        z
                    }
                })
                .collect();
            NodeRecord {
                domain: domains[i].clone(),
                provider_backlink_total: Some(in_sum[i] + extra.sample(&mut rng)),
                provider_outlink_total: Some(out_sum[i] + extra.sample(&mut rng)),
                attributes,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let unlabeled = (config.unlabeled_fraction * n as f64).round() as usize;
    let labels = order[unlabeled..]
        .iter()
        .map(|&i| (domains[i].clone(), class_labels(classes[i])))
        .collect();

    let graph = build_graph(nodes.clone(), edges.clone(), manifest)?;
    Ok(SyntheticGraph {
        graph,
        labels,
        classes,
        node_records: nodes,
        edge_records: edges,
    })
}

/// Fraction of non-self-loop edges whose endpoints share a class.
pub fn intra_class_fraction(graph: &AttributedWebgraph, classes: &[usize]) -> f64 {
    let (mut intra, mut total) = (0usize, 0usize);
    for e in graph.edges() {
        total += 1;
        intra += (classes[e.source.index()] == classes[e.target.index()]) as usize;
    }
    if total == 0 {
        0.0
    } else {
        intra as f64 / total as f64
    }
}
