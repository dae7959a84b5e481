use std::collections::VecDeque;

use serde::Serialize;

use super::AttributedWebgraph;

/// Summary statistics over the undirected simple projection of a graph
/// (directions dropped, parallel edges collapsed, self-loops ignored).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub empty: bool,
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    /// Mean local clustering coefficient; nodes of degree < 2 contribute 0.
    pub clustering_coefficient: f64,
    /// Mean shortest-path length over ordered pairs of the largest component.
    pub characteristic_path_length: f64,
    pub density: f64,
    /// Degree assortativity; `None` when every edge joins equal degrees.
    pub degree_assortativity: Option<f64>,
}

impl GraphSummary {
    fn empty() -> Self {
        Self {
            empty: true,
            nodes: 0,
            edges: 0,
            average_degree: 0.0,
            clustering_coefficient: 0.0,
            characteristic_path_length: 0.0,
            density: 0.0,
            degree_assortativity: None,
        }
    }
}

pub fn graph_summary(graph: &AttributedWebgraph) -> GraphSummary {
    let n = graph.node_count();
    if n == 0 {
        return GraphSummary::empty();
    }
    let adj = undirected_adjacency(graph);
    let m: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;

    let mut clustering = 0.0;
    for nbrs in &adj {
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].binary_search(&b).is_ok() {
                    links += 1;
                }
            }
        }
        clustering += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    clustering /= n as f64;

    let density = if n > 1 {
        2.0 * m as f64 / (n * (n - 1)) as f64
    } else {
        0.0
    };

    GraphSummary {
        empty: false,
        nodes: n,
        edges: m,
        average_degree: 2.0 * m as f64 / n as f64,
        clustering_coefficient: clustering,
        characteristic_path_length: path_length(&adj),
        density,
        degree_assortativity: assortativity(&adj),
    }
}

/// Sorted, deduplicated neighbor lists without self-loops.
pub(crate) fn undirected_adjacency(graph: &AttributedWebgraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.node_count()];
    for e in graph.edges() {
        let (s, t) = (e.source.0, e.target.0);
        if s != t {
            adj[s].push(t);
            adj[t].push(s);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

fn path_length(adj: &[Vec<usize>]) -> f64 {
    let n = adj.len();
    let mut component = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        component[start] = start;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            i += 1;
            for &v in &adj[u] {
                if component[v] == usize::MAX {
                    component[v] = start;
                    members.push(v);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    let size = best.len();
    if size < 2 {
        return 0.0;
    }
    let mut total: u64 = 0;
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &src in &best {
        for &v in &best {
            dist[v] = usize::MAX;
        }
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v] as u64;
                    queue.push_back(v);
                }
            }
        }
    }
    total as f64 / (size * (size - 1)) as f64
}

fn assortativity(adj: &[Vec<usize>]) -> Option<f64> {
    let (mut sx, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0);
    for nbrs in adj {
        let du = nbrs.len() as f64;
        for &v in nbrs {
            let dv = adj[v].len() as f64;
            sx += du;
            sxx += du * du;
            sxy += du * dv;
            count += 1.0;
        }
    }
    if count == 0.0 {
        return None;
    }
    // Both endpoint series share one marginal since every edge appears twice.
    let mean = sx / count;
    let var = sxx / count - mean * mean;
    if var <= 1e-12 * mean.max(1.0).powi(2) {
        return None;
    }
    Some((sxy / count - mean * mean) / var)
}
