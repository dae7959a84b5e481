use std::collections::BTreeMap;

use super::DenseMatrix;
use crate::error::Result;
use crate::webgraph::{weight_edges, AttributedWebgraph, WeightScheme};

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from entries; duplicates are summed.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (r, c, v) in entries {
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    /// `self · x`
    pub fn matmul(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, x.rows(), "sparse matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.n, x.cols());
        for r in 0..self.n {
            let dst = out.row_mut(r);
            for (c, v) in self.row(r) {
                for (d, &b) in dst.iter_mut().zip(x.row(c)) {
                    *d += v * b;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                d.set(r, c, v);
            }
        }
        d
    }

    /// Relabels rows and columns so that new index `i` is old `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> CsrMatrix {
        let mut inverse = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        CsrMatrix::from_triplets(
            self.n,
            (0..self.n).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)).collect::<Vec<_>>())
                .map(|(r, c, v)| (inverse[r], inverse[c], v)),
        )
    }
}

/// The propagation operator `D̃^{-1/2} (W_sym + I) D̃^{-1/2}` where
/// `W_sym = (W + Wᵀ)/2` over the scheme's edge weights, or unit weights when
/// no scheme is given.
pub fn normalize_adjacency(
    graph: &AttributedWebgraph,
    scheme: Option<WeightScheme>,
) -> Result<CsrMatrix> {
    let n = graph.node_count();
    let weights = match scheme {
        Some(s) => weight_edges(graph, s)?.into_vec(),
        None => vec![1.0; graph.edge_count()],
    };
    let mut entries = Vec::with_capacity(2 * graph.edge_count() + n);
    for (e, w) in graph.edges().iter().zip(&weights) {
        let (i, j) = (e.source.index(), e.target.index());
        entries.push((i, j, 0.5 * w));
        entries.push((j, i, 0.5 * w));
    }
    entries.extend((0..n).map(|i| (i, i, 1.0)));
    let a = CsrMatrix::from_triplets(n, entries);

    let inv_sqrt: Vec<f64> = (0..n)
        .map(|r| 1.0 / a.row(r).map(|(_, v)| v).sum::<f64>().sqrt())
        .collect();
    let mut s = a;
    for r in 0..n {
        for k in s.indptr[r]..s.indptr[r + 1] {
            let c = s.indices[k];
            s.values[k] *= inv_sqrt[r] * inv_sqrt[c];
        }
    }
    Ok(s)
}
