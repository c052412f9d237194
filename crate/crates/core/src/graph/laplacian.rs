use super::{Adjacency, WeightedGraph};
use crate::{Error, Result};

/// Combinatorial Laplacian `L = D - W` in compressed sparse row form.
///
/// Rows hold the diagonal plus one entry per neighbour, columns sorted.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    order: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    strengths: Vec<f64>,
}

/// Build the Laplacian of a connected weighted graph.
pub fn laplacian(weighted: &WeightedGraph) -> Result<LaplacianMatrix> {
    LaplacianMatrix::from_weighted_edges(weighted.base().node_count(), weighted.weighted_edges())
}

impl LaplacianMatrix {
    /// Laplacian from an undirected weighted edge list (`u != v`, each pair once).
    /// Fails when the edges do not connect all `n` nodes.
    pub fn from_weighted_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Reference(format!("invalid edge ({u}, {v}) for {n} nodes")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Parameter(format!("edge weight must be finite and non-negative, got {w}")));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let sizes = component_sizes(&adj);
        if sizes.len() > 1 {
            return Err(Error::Disconnected { sizes });
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut strengths = Vec::with_capacity(n);
        row_ptr.push(0);
        for (u, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_by_key(|&(v, _)| v);
            let d: f64 = nbrs.iter().map(|&(_, w)| w).sum();
            strengths.push(d);
            let mut diag_done = false;
            for &(v, w) in nbrs.iter() {
                if !diag_done && v > u {
                    cols.push(u);
                    vals.push(d);
                    diag_done = true;
                }
                cols.push(v);
                vals.push(-w);
            }
            if !diag_done {
                cols.push(u);
                vals.push(d);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            order: n,
            row_ptr,
            cols,
            vals,
            strengths,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Node strengths `d_u = Σ_v w(u, v)`.
    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `u` as `(column, value)`.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        match self.cols[r.clone()].binary_search(&v) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// Raw CSR arrays: row pointers, column indices, values.
    pub(crate) fn csr(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.row_ptr, &self.cols, &self.vals)
    }

    /// `y = L x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.order);
        for (u, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `Y = L X` for `width` interleaved vectors (`X[i * width + c]`).
    ///
    /// Each output column sees exactly the arithmetic of [`Self::mul_vec`],
    /// so results do not depend on how columns are grouped.
    pub fn mul_block(&self, x: &[f64], y: &mut [f64], width: usize) {
        debug_assert_eq!(x.len(), self.order * width);
        let mut acc = vec![0.0; width];
        for u in 0..self.order {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                let v = self.vals[k];
                let src = &x[self.cols[k] * width..(self.cols[k] + 1) * width];
                for (a, s) in acc.iter_mut().zip(src) {
                    *a += v * s;
                }
            }
            y[u * width..(u + 1) * width].copy_from_slice(&acc);
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.order;
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            for (v, x) in self.row(u) {
                out[u * n + v] = x;
            }
        }
        out
    }
}

impl Adjacency for LaplacianMatrix {
    fn order(&self) -> usize {
        self.order
    }

    fn for_each_neighbor(&self, u: usize, f: &mut dyn FnMut(usize, f64)) {
        for (v, x) in self.row(u) {
            if v != u {
                f(v, -x);
            }
        }
    }
}

fn component_sizes(adj: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{weight_edges, AttributedGraph};
    use proptest::prelude::*;

    fn unit(n: usize, edges: &[(usize, usize)]) -> LaplacianMatrix {
        LaplacianMatrix::from_weighted_edges(n, edges.iter().map(|&(u, v)| (u, v, 1.0))).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(unit(2, &[(0, 1)]).to_dense(), vec![1.0, -1.0, -1.0, 1.0]);
        let tri = unit(3, &[(0, 1), (1, 2), (0, 2)]);
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(tri.get(u, v), if u == v { 2.0 } else { -1.0 });
            }
        }
        let star = unit(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(star.strengths(), &[3.0, 1.0, 1.0, 1.0]);
        assert_eq!(star.get(2, 2), 1.0);
        assert_eq!(star.get(2, 3), 0.0);
    }

    #[test]
    fn disconnected_is_an_error() {
        let err = LaplacianMatrix::from_weighted_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Disconnected { sizes } if sizes == vec![2, 3]));
    }

    #[test]
    fn block_product_matches_single() {
        let lap = unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]);
        let xs: Vec<Vec<f64>> = (0..3).map(|c| (0..5).map(|i| (i * 7 + c * 3) as f64 * 0.1).collect()).collect();
        let mut block = vec![0.0; 15];
        for i in 0..5 {
            for c in 0..3 {
                block[i * 3 + c] = xs[c][i];
            }
        }
        let mut yb = vec![0.0; 15];
        lap.mul_block(&block, &mut yb, 3);
        for (c, x) in xs.iter().enumerate() {
            let mut y = vec![0.0; 5];
            lap.mul_vec(x, &mut y);
            for i in 0..5 {
                assert_eq!(y[i].to_bits(), yb[i * 3 + c].to_bits());
            }
        }
    }

    proptest! {
        #[test]
        fn conservation_and_sign(
            attrs in prop::collection::vec(-3.0f64..3.0, 8),
            extra in prop::collection::vec((0usize..8, 0usize..8), 0..12),
            sigma in 0.3f64..4.0,
        ) {
            let mut edges: Vec<_> = (0..7).map(|i| (i, i + 1)).collect();
            edges.extend(extra);
            let g = AttributedGraph::new(
                (0..8).map(|i| i.to_string()).collect(),
                attrs.iter().map(|&x| vec![x]).collect(),
                edges, None).unwrap();
            let lap = laplacian(&weight_edges(&g, sigma).unwrap()).unwrap();
            let mut y = vec![0.0; 8];
            lap.mul_vec(&[1.0; 8], &mut y);
            prop_assert!(y.iter().all(|v| v.abs() < 1e-10));
            for u in 0..8 {
                prop_assert_eq!(lap.get(u, u), lap.strengths()[u]);
                for v in 0..8 {
                    prop_assert_eq!(lap.get(u, v), lap.get(v, u));
                    if u != v { prop_assert!(lap.get(u, v) <= 0.0); }
                }
            }
        }
    }
}
