//! Attributed webgraph of news domains and the domains linking to and from them.
//!
//! Nodes are domains carrying a fixed-length vector of SEO attributes and the
//! link totals reported by the data provider. Edges are directed `source links
//! to target` relations with the observed link count and the number of unique
//! referring pages. A graph is immutable once built; derived graphs
//! (top-N truncation, single-network views) are new values.

mod domain;
pub mod io;
mod summary;
mod truncate;
mod weights;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use domain::normalize_domain;
pub use summary::{graph_summary, GraphSummary};
pub use truncate::truncate_topn;
pub use weights::{weight_edges, EdgeWeights, WeightScheme};

/// Dense node handle, assigned from 0 in input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Canonical attribute columns every bundled dataset carries.
pub const CANONICAL_ATTRIBUTES: [&str; 7] = [
    "backlinks",
    "refpages",
    "refdomains",
    "edu",
    "gov",
    "ugc",
    "domain_rating",
];

/// Ordered attribute column names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttributeManifest {
    names: Vec<String>,
}

impl AttributeManifest {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(Error::invalid("empty attribute name"));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::invalid(format!("duplicate attribute name {n:?}")));
            }
        }
        Ok(Self { names })
    }

    pub fn canonical() -> Self {
        Self {
            names: CANONICAL_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Canonical names absent from this manifest.
    pub fn missing_canonical(&self) -> Vec<&'static str> {
        CANONICAL_ATTRIBUTES
            .iter()
            .copied()
            .filter(|c| self.index_of(c).is_none())
            .collect()
    }
}

/// Which top-10 pull produced an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Backlink,
    Outlink,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Backlink => "backlink",
            EdgeKind::Outlink => "outlink",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "backlink" | "backlink-observed" => Ok(EdgeKind::Backlink),
            "outlink" | "outlink-observed" => Ok(EdgeKind::Outlink),
            other => Err(Error::invalid(format!("unknown edge kind {other:?}"))),
        }
    }
}

/// Set of pulls an edge was observed in. An edge seen in both pulls keeps
/// both flags after merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct EdgeKinds {
    pub backlink: bool,
    pub outlink: bool,
}

impl EdgeKinds {
    pub fn only(kind: EdgeKind) -> Self {
        let mut k = Self::default();
        k.insert(kind);
        k
    }

    pub fn contains(self, kind: EdgeKind) -> bool {
        match kind {
            EdgeKind::Backlink => self.backlink,
            EdgeKind::Outlink => self.outlink,
        }
    }

    pub fn insert(&mut self, kind: EdgeKind) {
        match kind {
            EdgeKind::Backlink => self.backlink = true,
            EdgeKind::Outlink => self.outlink = true,
        }
    }

    pub fn remove(&mut self, kind: EdgeKind) {
        match kind {
            EdgeKind::Backlink => self.backlink = false,
            EdgeKind::Outlink => self.outlink = false,
        }
    }

    pub fn is_empty(self) -> bool {
        !self.backlink && !self.outlink
    }
}

/// One of the three link networks built per labeled domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Network {
    Backlink,
    Outlink,
    Combined,
}

impl Network {
    pub const ALL: [Network; 3] = [Network::Backlink, Network::Outlink, Network::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            Network::Backlink => "backlink",
            Network::Outlink => "outlink",
            Network::Combined => "combined",
        }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Network {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "backlink" | "backlinks" => Ok(Network::Backlink),
            "outlink" | "outlinks" => Ok(Network::Outlink),
            "combined" => Ok(Network::Combined),
            other => Err(Error::invalid(format!("unknown network {other:?}"))),
        }
    }
}

/// Node as read from a nodes file, before id assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub domain: String,
    pub provider_backlink_total: Option<u64>,
    pub provider_outlink_total: Option<u64>,
    pub attributes: Vec<f64>,
}

/// Edge as read from an edges file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub kind: EdgeKind,
    pub links: u64,
    pub ref_pages: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainNode {
    pub id: NodeId,
    pub domain: String,
    pub attributes: Vec<f64>,
    /// `None` means the provider reported nothing, which is distinct from 0.
    pub provider_backlink_total: Option<u64>,
    pub provider_outlink_total: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub links: u64,
    pub ref_pages: u64,
    pub kinds: EdgeKinds,
}

/// Directed, edge-weighted, attributed domain graph.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedWebgraph {
    nodes: Vec<DomainNode>,
    edges: Vec<LinkEdge>,
    manifest: AttributeManifest,
    index: HashMap<String, NodeId>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    graph_backlinks: Vec<u64>,
    graph_outlinks: Vec<u64>,
}

/// Builds a graph from raw records.
///
/// Domains are normalized, ids are assigned densely in input order, and
/// repeated `(source, target)` pairs are merged by summing `links` and
/// `ref_pages` while keeping every observed kind.
pub fn build_graph(
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    manifest: AttributeManifest,
) -> Result<AttributedWebgraph> {
    let mut index = HashMap::with_capacity(nodes.len());
    let mut built = Vec::with_capacity(nodes.len());
    for (i, rec) in nodes.into_iter().enumerate() {
        let domain = normalize_domain(&rec.domain)?;
        if rec.attributes.len() != manifest.len() {
            return Err(Error::ManifestMismatch {
                domain,
                expected: manifest.len(),
                found: rec.attributes.len(),
            });
        }
        if rec.attributes.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("attributes of {domain}")));
        }
        let id = NodeId(i);
        if index.insert(domain.clone(), id).is_some() {
            return Err(Error::DuplicateDomain(domain));
        }
        built.push(DomainNode {
            id,
            domain,
            attributes: rec.attributes,
            provider_backlink_total: rec.provider_backlink_total,
            provider_outlink_total: rec.provider_outlink_total,
        });
    }

    let mut merged: BTreeMap<(NodeId, NodeId), LinkEdge> = BTreeMap::new();
    for rec in edges {
        let resolve = |raw: &str| -> Result<NodeId> {
            let d = normalize_domain(raw)?;
            index
                .get(&d)
                .copied()
                .ok_or(Error::DanglingEdge { domain: d })
        };
        let source = resolve(&rec.source)?;
        let target = resolve(&rec.target)?;
        if rec.links == 0 {
            return Err(Error::invalid(format!(
                "edge {} -> {} has zero links",
                rec.source, rec.target
            )));
        }
        if rec.ref_pages == 0 {
            return Err(Error::invalid(format!(
                "edge {} -> {} has links but zero referring pages",
                rec.source, rec.target
            )));
        }
        let e = merged.entry((source, target)).or_insert(LinkEdge {
            source,
            target,
            links: 0,
            ref_pages: 0,
            kinds: EdgeKinds::default(),
        });
        e.links += rec.links;
        e.ref_pages += rec.ref_pages;
        e.kinds.insert(rec.kind);
    }

    AttributedWebgraph::assemble(built, merged.into_values().collect(), manifest, index)
}

impl AttributedWebgraph {
    fn assemble(
        nodes: Vec<DomainNode>,
        edges: Vec<LinkEdge>,
        manifest: AttributeManifest,
        index: HashMap<String, NodeId>,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        let mut graph_backlinks = vec![0u64; n];
        let mut graph_outlinks = vec![0u64; n];
        for (eid, e) in edges.iter().enumerate() {
            in_edges[e.target.0].push(eid);
            out_edges[e.source.0].push(eid);
            graph_backlinks[e.target.0] += e.links;
            graph_outlinks[e.source.0] += e.links;
        }
        for node in &nodes {
            let i = node.id.0;
            if let Some(total) = node.provider_backlink_total {
                if total < graph_backlinks[i] {
                    return Err(Error::invalid(format!(
                        "{}: provider backlink total {total} is below the {} links observed in the graph",
                        node.domain, graph_backlinks[i]
                    )));
                }
            }
            if let Some(total) = node.provider_outlink_total {
                if total < graph_outlinks[i] {
                    return Err(Error::invalid(format!(
                        "{}: provider outlink total {total} is below the {} links observed in the graph",
                        node.domain, graph_outlinks[i]
                    )));
                }
            }
        }
        Ok(Self {
            nodes,
            edges,
            manifest,
            index,
            in_edges,
            out_edges,
            graph_backlinks,
            graph_outlinks,
        })
    }

    /// Same nodes, different edge set. Edges must already be deduplicated.
    pub(crate) fn with_edges(&self, mut edges: Vec<LinkEdge>) -> Result<Self> {
        edges.sort_by_key(|e| (e.source, e.target));
        Self::assemble(
            self.nodes.clone(),
            edges,
            self.manifest.clone(),
            self.index.clone(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[DomainNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &DomainNode {
        &self.nodes[id.0]
    }

    /// Edges in `(source, target)` order; an edge's position is its id.
    pub fn edges(&self) -> &[LinkEdge] {
        &self.edges
    }

    pub fn manifest(&self) -> &AttributeManifest {
        &self.manifest
    }

    pub fn lookup(&self, domain: &str) -> Option<NodeId> {
        let d = normalize_domain(domain).ok()?;
        self.index.get(&d).copied()
    }

    pub fn domain(&self, id: NodeId) -> &str {
        &self.nodes[id.0].domain
    }

    /// Ids of edges pointing into `id`.
    pub fn in_edges(&self, id: NodeId) -> &[usize] {
        &self.in_edges[id.0]
    }

    /// Ids of edges leaving `id`.
    pub fn out_edges(&self, id: NodeId) -> &[usize] {
        &self.out_edges[id.0]
    }

    pub fn successors(&self, id: NodeId) -> impl Iterator<Item = &LinkEdge> + '_ {
        self.out_edges[id.0].iter().map(move |&e| &self.edges[e])
    }

    /// In-graph backlink sum of a node.
    pub fn graph_backlinks(&self, id: NodeId) -> u64 {
        self.graph_backlinks[id.0]
    }

    /// In-graph outlink sum of a node.
    pub fn graph_outlinks(&self, id: NodeId) -> u64 {
        self.graph_outlinks[id.0]
    }

    /// Recomputes both degree caches from the edge list and compares.
    pub fn degree_cache_consistent(&self) -> bool {
        let mut b = vec![0u64; self.nodes.len()];
        let mut o = vec![0u64; self.nodes.len()];
        for e in &self.edges {
            b[e.target.0] += e.links;
            o[e.source.0] += e.links;
        }
        b == self.graph_backlinks && o == self.graph_outlinks
    }

    /// Node attribute rows as a flat row-major buffer.
    pub fn attribute_rows(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .flat_map(|n| n.attributes.iter().copied())
            .collect()
    }

    /// View restricted to the edges observed in one network's pull. Every
    /// node is kept so labeled nodes without edges stay addressable.
    pub fn network(&self, network: Network) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .filter(|e| match network {
                Network::Backlink => e.kinds.backlink,
                Network::Outlink => e.kinds.outlink,
                Network::Combined => true,
            })
            .cloned()
            .collect();
        self.with_edges(edges)
    }
}
