use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AttributedWebgraph, LinkEdge};
use crate::error::{Error, Result};

/// Edge-weighting approaches for the link matrix.
///
/// Normalizing variants follow the per-edge reading: `backlink` is the share
/// of the target's provider-reported backlinks that come from the source,
/// `outlink` the share of the source's provider-reported outlinks going to
/// the target, and the `graph_*` variants use the sums observed in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Links,
    LogLinks,
    Backlink,
    Outlink,
    GraphBacklink,
    GraphOutlink,
    Page,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 7] = [
        WeightScheme::Links,
        WeightScheme::LogLinks,
        WeightScheme::Backlink,
        WeightScheme::Outlink,
        WeightScheme::GraphBacklink,
        WeightScheme::GraphOutlink,
        WeightScheme::Page,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightScheme::Links => "links",
            WeightScheme::LogLinks => "log_links",
            WeightScheme::Backlink => "backlink",
            WeightScheme::Outlink => "outlink",
            WeightScheme::GraphBacklink => "graph_backlink",
            WeightScheme::GraphOutlink => "graph_outlink",
            WeightScheme::Page => "page",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.trim().to_ascii_lowercase().replace('-', "_");
        WeightScheme::ALL
            .into_iter()
            .find(|w| w.as_str() == k)
            .ok_or_else(|| Error::invalid(format!("unknown weight scheme {s:?}")))
    }
}

/// Per-edge weights, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn weight_edges(graph: &AttributedWebgraph, scheme: WeightScheme) -> Result<EdgeWeights> {
    let name = scheme.as_str();
    let edges = graph.edges();

    let missing: Vec<String> = match scheme {
        WeightScheme::Backlink => missing_totals(graph, |e| e.target, |g, id| {
            g.node(id).provider_backlink_total
        }),
        WeightScheme::Outlink => missing_totals(graph, |e| e.source, |g, id| {
            g.node(id).provider_outlink_total
        }),
        _ => Vec::new(),
    };
    if !missing.is_empty() {
        return Err(Error::MissingProviderTotal {
            scheme: name,
            domains: missing,
        });
    }

    let page_totals = if scheme == WeightScheme::Page {
        let mut t = vec![0u64; graph.node_count()];
        for e in edges {
            t[e.target.0] += e.ref_pages;
        }
        t
    } else {
        Vec::new()
    };

    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        let w = match scheme {
            WeightScheme::Links => e.links as f64,
            WeightScheme::LogLinks => (e.links as f64).ln(),
            WeightScheme::Backlink => {
                let d = graph.node(e.target).provider_backlink_total.unwrap_or(0);
                ratio(e.links, d, name, graph, e)?
            }
            WeightScheme::Outlink => {
                let d = graph.node(e.source).provider_outlink_total.unwrap_or(0);
                ratio(e.links, d, name, graph, e)?
            }
            WeightScheme::GraphBacklink => {
                ratio(e.links, graph.graph_backlinks(e.target), name, graph, e)?
            }
            WeightScheme::GraphOutlink => {
                ratio(e.links, graph.graph_outlinks(e.source), name, graph, e)?
            }
            WeightScheme::Page => ratio(e.ref_pages, page_totals[e.target.0], name, graph, e)?,
        };
        out.push(w);
    }
    Ok(EdgeWeights(out))
}

fn missing_totals(
    graph: &AttributedWebgraph,
    endpoint: impl Fn(&LinkEdge) -> super::NodeId,
    total: impl Fn(&AttributedWebgraph, super::NodeId) -> Option<u64>,
) -> Vec<String> {
    let mut ids: Vec<_> = graph
        .edges()
        .iter()
        .map(&endpoint)
        .filter(|&id| total(graph, id).is_none())
        .collect();
    ids.sort();
    ids.dedup();
    ids.into_iter().map(|id| graph.domain(id).to_string()).collect()
}

fn ratio(
    num: u64,
    den: u64,
    scheme: &'static str,
    graph: &AttributedWebgraph,
    e: &LinkEdge,
) -> Result<f64> {
    if den == 0 {
        return Err(Error::ZeroDenominator {
            scheme,
            source_domain: graph.domain(e.source).to_string(),
            target_domain: graph.domain(e.target).to_string(),
        });
    }
    Ok(num as f64 / den as f64)
}
