use std::cmp::Reverse;

use super::{AttributedWebgraph, EdgeKind};
use crate::error::{Error, Result};

/// Keeps, per anchor node, only the `n` heaviest edges of one pull.
///
/// The anchor of a backlink edge is its target and of an outlink edge its
/// source, so every labeled node keeps its top `n` backlinks (or outlinks).
/// Ties on `links` go to the lexicographically smaller opposite endpoint. An
/// edge observed in both pulls loses only the truncated kind and survives if
/// the other kind remains.
pub fn truncate_topn(
    graph: &AttributedWebgraph,
    n: usize,
    kind: EdgeKind,
) -> Result<AttributedWebgraph> {
    if n == 0 {
        return Err(Error::invalid("top-N truncation needs n >= 1"));
    }
    let edges = graph.edges();
    let mut keep = vec![true; edges.len()];
    for node in graph.nodes() {
        let incident = match kind {
            EdgeKind::Backlink => graph.in_edges(node.id),
            EdgeKind::Outlink => graph.out_edges(node.id),
        };
        let mut ranked: Vec<usize> = incident
            .iter()
            .copied()
            .filter(|&e| edges[e].kinds.contains(kind))
            .collect();
        if ranked.len() <= n {
            continue;
        }
        ranked.sort_by(|&a, &b| {
            let (ea, eb) = (&edges[a], &edges[b]);
            let other = |e: &super::LinkEdge| match kind {
                EdgeKind::Backlink => graph.domain(e.source),
                EdgeKind::Outlink => graph.domain(e.target),
            };
            (Reverse(ea.links), other(ea)).cmp(&(Reverse(eb.links), other(eb)))
        });
        for &e in &ranked[n..] {
            keep[e] = false;
        }
    }

    let mut out = Vec::with_capacity(edges.len());
    for (e, kept) in edges.iter().zip(keep) {
        let mut e = e.clone();
        if !kept {
            e.kinds.remove(kind);
            if e.kinds.is_empty() {
                continue;
            }
        }
        out.push(e);
    }
    graph.with_edges(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::webgraph::{build_graph, AttributeManifest, EdgeRecord, NodeRecord};

    fn graph(edges: &[(&str, &str, u64)]) -> AttributedWebgraph {
        let mut domains: Vec<&str> = edges.iter().flat_map(|e| [e.0, e.1]).collect();
        domains.sort();
        domains.dedup();
        build_graph(
            domains
                .iter()
                .map(|d| NodeRecord {
                    domain: d.to_string(),
                    provider_backlink_total: None,
                    provider_outlink_total: None,
                    attributes: vec![],
                })
                .collect(),
            edges
                .iter()
                .map(|&(s, t, l)| EdgeRecord {
                    source: s.into(),
                    target: t.into(),
                    kind: EdgeKind::Backlink,
                    links: l,
                    ref_pages: 1,
                })
                .collect(),
            AttributeManifest::default(),
        )
        .unwrap()
    }

    #[test]
    fn keeps_top_two_with_lexicographic_tie() {
        let g = graph(&[("d.com", "t.com", 9), ("c.com", "t.com", 5), ("b.com", "t.com", 5), ("a.com", "t.com", 1)]);
        let t = truncate_topn(&g, 2, EdgeKind::Backlink).unwrap();
        let kept: Vec<(&str, u64)> = t
            .edges()
            .iter()
            .map(|e| (t.domain(e.source), e.links))
            .collect();
        assert_eq!(kept, vec![("b.com", 5), ("d.com", 9)]);
        assert!(t.degree_cache_consistent());
        assert_eq!(t.graph_backlinks(t.lookup("t.com").unwrap()), 14);
    }

    #[test]
    fn ten_of_ten_is_identity() {
        let edges: Vec<(String, u64)> = (0..10).map(|i| (format!("s{i}.com"), 10 - i as u64)).collect();
        let refs: Vec<(&str, &str, u64)> = edges.iter().map(|(s, l)| (s.as_str(), "t.com", *l)).collect();
        let g = graph(&refs);
        assert_eq!(truncate_topn(&g, 10, EdgeKind::Backlink).unwrap(), g);
    }

    #[test]
    fn zero_rejected() {
        let g = graph(&[("a.com", "b.com", 1)]);
        assert!(truncate_topn(&g, 0, EdgeKind::Backlink).is_err());
    }

    #[test]
    fn other_kind_untouched() {
        let g = graph(&[("a.com", "t.com", 3), ("b.com", "t.com", 2)]);
        assert_eq!(truncate_topn(&g, 1, EdgeKind::Outlink).unwrap(), g);
    }
}
