use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{BinaryLabels, Reliability};
use crate::webgraph::AttributedWebgraph;

/// Breadth and depth constraints a backlinking domain must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSchemeCriteria {
    /// Minimum total links into unreliable targets.
    pub alpha_min: u64,
    /// Minimum number of distinct unreliable targets.
    pub beta_min: u64,
}

impl Default for LinkSchemeCriteria {
    fn default() -> Self {
        Self {
            alpha_min: 2500,
            beta_min: 2,
        }
    }
}

/// Which successors of a candidate enter the breadth and depth counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeMode {
    /// Only successors labeled unreliable.
    #[default]
    UnreliableTargets,
    /// Every successor of the candidate.
    AllSuccessors,
}

impl SchemeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeMode::UnreliableTargets => "unreliable_targets",
            SchemeMode::AllSuccessors => "all_successors",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkScheme {
    pub domain: String,
    pub beta: u64,
    pub alpha: u64,
}

fn is_unreliable(labels: &BTreeMap<String, BinaryLabels>, domain: &str) -> bool {
    labels
        .get(domain)
        .is_some_and(|l| l.reliability == Reliability::Unreliable)
}

/// Sources with at least one edge into an unreliable-labeled target.
pub fn scheme_candidates(graph: &AttributedWebgraph, labels: &BTreeMap<String, BinaryLabels>) -> BTreeSet<String> {
    graph
        .edges()
        .iter()
        .filter(|e| is_unreliable(labels, graph.domain(e.target)))
        .map(|e| graph.domain(e.source).to_string())
        .collect()
}

/// Flags backlinking domains that meet both constraints.
///
/// Output is sorted by breadth, then depth, both descending, then by domain.
pub fn identify_link_schemes(
    graph: &AttributedWebgraph,
    labels: &BTreeMap<String, BinaryLabels>,
    criteria: LinkSchemeCriteria,
    mode: SchemeMode,
) -> Vec<LinkScheme> {
    let mut out = Vec::new();
    for domain in scheme_candidates(graph, labels) {
        let id = graph.lookup(&domain).expect("candidate is a node");
        let (mut beta, mut alpha) = (0u64, 0u64);
        for e in graph.successors(id) {
            if mode == SchemeMode::AllSuccessors || is_unreliable(labels, graph.domain(e.target)) {
                beta += 1;
                alpha += e.links;
            }
        }
        if beta >= criteria.beta_min && alpha >= criteria.alpha_min {
            out.push(LinkScheme { domain, beta, alpha });
        }
    }
    out.sort_by(|a, b| {
        b.beta
            .cmp(&a.beta)
            .then(b.alpha.cmp(&a.alpha))
            .then_with(|| a.domain.cmp(&b.domain))
    });
    out
}
