#![allow(dead_code)]

use linkscope_core::webgraph::{build_graph, AttributeManifest, AttributedWebgraph, EdgeKind, EdgeRecord, NodeRecord};
use proptest::prelude::*;

pub fn domain(i: usize) -> String {
    format!("d{i:03}.test")
}

/// `(source, target, links, ref_pages, is_backlink)` over `n` nodes.
pub type Edge = (usize, usize, u64, u64, bool);

pub fn edges(n: usize, max: usize) -> impl Strategy<Value = Vec<Edge>> {
    prop::collection::vec(
        (0..n, 0..n, 1u64..500, any::<bool>()).prop_flat_map(|(s, t, links, back)| {
            (Just(s), Just(t), Just(links), 1..=links, Just(back))
        }),
        0..max,
    )
}

pub fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<Edge>)> {
    (1..=max_nodes).prop_flat_map(|n| (Just(n), edges(n, 4 * n)))
}

pub fn build(n: usize, edges: &[Edge]) -> AttributedWebgraph {
    let nodes = (0..n)
        .map(|i| NodeRecord {
            domain: domain(i),
            provider_backlink_total: Some(1_000_000),
            provider_outlink_total: Some(1_000_000),
            attributes: vec![],
        })
        .collect();
    let records = edges
        .iter()
        .map(|&(s, t, links, ref_pages, back)| EdgeRecord {
            source: domain(s),
            target: domain(t),
            kind: if back { EdgeKind::Backlink } else { EdgeKind::Outlink },
            links,
            ref_pages,
        })
        .collect();
    build_graph(nodes, records, AttributeManifest::new(Vec::<String>::new()).unwrap()).unwrap()
}
