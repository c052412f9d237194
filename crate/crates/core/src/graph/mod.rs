//! Attributed graphs, Gaussian edge weighting and the weighted Laplacian.

pub(crate) mod io;
mod laplacian;

pub use io::{load_attributed_graph, write_attributed_graph, LoadWarnings};
pub use laplacian::{laplacian, LaplacianMatrix};

use rand::seq::index;

use crate::seed::rng_for;
use crate::{mean_std, Error, Result};

/// Undirected simple graph whose nodes carry `d`-dimensional attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    node_ids: Vec<String>,
    dim: usize,
    /// Row-major `N × d`.
    attributes: Vec<f64>,
    /// Sorted, each pair stored as `(min, max)`.
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<bool>>,
}

impl AttributedGraph {
    /// Build a graph, silently dropping self-loops and duplicate edges.
    ///
    /// Use [`AttributedGraph::with_warnings`] to learn how many were dropped.
    pub fn new(
        node_ids: Vec<String>,
        attributes: Vec<Vec<f64>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        Self::with_warnings(node_ids, attributes, edges, labels).map(|(g, _)| g)
    }

    pub fn with_warnings(
        node_ids: Vec<String>,
        attributes: Vec<Vec<f64>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        labels: Option<Vec<bool>>,
    ) -> Result<(Self, LoadWarnings)> {
        let n = node_ids.len();
        if n < 2 {
            return Err(Error::Size(format!("need at least 2 nodes, got {n}")));
        }
        if attributes.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: attributes.len(),
            });
        }
        let dim = attributes[0].len();
        if dim == 0 {
            return Err(Error::Parameter("attribute dimension must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        for id in &node_ids {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(Error::Parameter(format!("invalid node id {id:?}")));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::Parameter(format!("duplicate node id `{id}`")));
            }
        }
        let mut flat = Vec::with_capacity(n * dim);
        for (row, id) in attributes.iter().zip(&node_ids) {
            if row.len() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    got: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::Parameter(format!(
                    "non-finite attribute {bad} on node `{id}`"
                )));
            }
            flat.extend_from_slice(row);
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    got: l.len(),
                });
            }
        }

        let mut warnings = LoadWarnings::default();
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Reference(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                warnings.self_loops += 1;
                continue;
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        warnings.duplicates = before - list.len();

        Ok((
            Self {
                node_ids,
                dim,
                attributes: flat,
                edges: list,
                labels,
            },
            warnings,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn attribute_dim(&self) -> usize {
        self.dim
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn attributes(&self, u: usize) -> &[f64] {
        &self.attributes[u * self.dim..(u + 1) * self.dim]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Option<Vec<bool>>) -> Result<()> {
        if let Some(l) = &labels {
            if l.len() != self.node_count() {
                return Err(Error::Shape {
                    expected: self.node_count(),
                    got: l.len(),
                });
            }
        }
        self.labels = labels;
        Ok(())
    }

    pub(crate) fn attributes_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.attributes[u * self.dim..(u + 1) * self.dim]
    }

    pub fn squared_distance(&self, u: usize, v: usize) -> f64 {
        self.attributes(u)
            .iter()
            .zip(self.attributes(v))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Index lookup by external id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|x| x == id)
    }

    /// Induced subgraph on `nodes` (kept in the given order).
    pub fn subgraph(&self, nodes: &[usize]) -> Result<Self> {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(u, v)| remap[*u] != usize::MAX && remap[*v] != usize::MAX)
            .map(|&(u, v)| (remap[u], remap[v]));
        Self::new(
            nodes.iter().map(|&u| self.node_ids[u].clone()).collect(),
            nodes.iter().map(|&u| self.attributes(u).to_vec()).collect(),
            edges.collect::<Vec<_>>(),
            self.labels
                .as_ref()
                .map(|l| nodes.iter().map(|&u| l[u]).collect()),
        )
    }
}

/// Maximal connected node sets, each sorted, ordered by smallest member.
pub fn connected_components(graph: &AttributedGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in graph.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for u in 0..n {
        let r = find(&mut parent, u);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[r]].push(u);
    }
    comps
}

/// Restrict to the largest connected component (first one on ties).
/// Returns the subgraph and the original indices of its nodes.
pub fn largest_component(graph: &AttributedGraph) -> Result<(AttributedGraph, Vec<usize>)> {
    let comps = connected_components(graph);
    let best = comps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("graph has nodes");
    let nodes = comps[best].clone();
    Ok((graph.subgraph(&nodes)?, nodes))
}

/// Which node pairs feed the automatic bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaPairs {
    #[default]
    All,
    Edges,
}

pub const DEFAULT_PAIR_BUDGET: usize = 2_000_000;

/// Population standard deviation of Euclidean attribute distances.
///
/// Uses every node pair when there are at most `pair_budget` of them,
/// otherwise a seeded uniform sample of `pair_budget` distinct pairs.
pub fn auto_sigma(graph: &AttributedGraph, pair_budget: usize, rng_seed: u64) -> Result<f64> {
    auto_sigma_with(graph, SigmaPairs::All, pair_budget, rng_seed)
}

pub fn auto_sigma_with(
    graph: &AttributedGraph,
    pairs: SigmaPairs,
    pair_budget: usize,
    rng_seed: u64,
) -> Result<f64> {
    let dist = |(u, v): (usize, usize)| graph.squared_distance(u, v).sqrt();
    let distances: Vec<f64> = match pairs {
        SigmaPairs::Edges => graph.edges().iter().copied().map(dist).collect(),
        SigmaPairs::All => {
            let n = graph.node_count();
            let total = n * (n - 1) / 2;
            if total <= pair_budget {
                (0..n)
                    .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                    .map(dist)
                    .collect()
            } else {
                let mut rng = rng_for(rng_seed, "sigma-pairs", 0);
                let mut picks = index::sample(&mut rng, total, pair_budget).into_vec();
                picks.sort_unstable();
                picks.into_iter().map(|k| dist(pair_from_index(k, n))).collect()
            }
        }
    };
    let (_, std) = mean_std(&distances);
    if distances.is_empty() || std <= 0.0 || !std.is_finite() {
        return Err(Error::DegenerateSigma);
    }
    Ok(std)
}

/// Map a linear index over the upper triangle (row-major, `u < v`) to a pair.
pub(crate) fn pair_from_index(k: usize, n: usize) -> (usize, usize) {
    // Row u starts at offset u*(2n-u-1)/2.
    let start = |u: usize| u * (2 * n - u - 1) / 2;
    let nf = n as f64;
    let disc = (2.0 * nf - 1.0).powi(2) - 8.0 * k as f64;
    let mut u = (((2.0 * nf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
    u = u.min(n - 2);
    while u > 0 && start(u) > k {
        u -= 1;
    }
    while u + 1 < n - 1 && start(u + 1) <= k {
        u += 1;
    }
    (u, u + 1 + (k - start(u)))
}

/// Z-score every attribute column (population std); constant columns become 0.
pub fn standardize_attributes(graph: &AttributedGraph) -> AttributedGraph {
    let mut out = graph.clone();
    let n = graph.node_count();
    for k in 0..graph.attribute_dim() {
        let col: Vec<f64> = (0..n).map(|u| graph.attributes(u)[k]).collect();
        let (mean, std) = mean_std(&col);
        for (u, x) in col.iter().enumerate() {
            out.attributes_mut(u)[k] = if std > 0.0 { (x - mean) / std } else { 0.0 };
        }
    }
    out
}

/// Graph with Gaussian similarity weights on its edges.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    base: AttributedGraph,
    sigma: f64,
    /// Aligned with `base.edges()`.
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Every edge weight set to 1 (the `sigma → ∞` limit), used when the
    /// attribute distances carry no scale.
    pub fn unit(base: AttributedGraph) -> Self {
        let weights = vec![1.0; base.edges().len()];
        Self {
            base,
            sigma: f64::INFINITY,
            weights,
        }
    }

    pub fn base(&self) -> &AttributedGraph {
        &self.base
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(u, v, w)` for every edge, `u < v`.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.base
            .edges()
            .iter()
            .zip(&self.weights)
            .map(|(&(u, v), &w)| (u, v, w))
    }
}

/// `w(u, v) = exp(-‖f(u) - f(v)‖² / (2σ²))` on every edge.
pub fn weight_edges(graph: &AttributedGraph, sigma: f64) -> Result<WeightedGraph> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let two_s2 = 2.0 * sigma * sigma;
    let weights = graph
        .edges()
        .iter()
        .map(|&(u, v)| (-graph.squared_distance(u, v) / two_s2).exp())
        .collect();
    Ok(WeightedGraph {
        base: graph.clone(),
        sigma,
        weights,
    })
}

/// Weighted neighbourhoods, shared by graphs and Laplacians.
pub trait Adjacency {
    fn order(&self) -> usize;
    /// Calls `f(v, w)` for every neighbour `v` of `u` with edge weight `w`.
    fn for_each_neighbor(&self, u: usize, f: &mut dyn FnMut(usize, f64));
}

impl Adjacency for WeightedGraph {
    fn order(&self) -> usize {
        self.base.node_count()
    }

    fn for_each_neighbor(&self, u: usize, f: &mut dyn FnMut(usize, f64)) {
        // Linear scan; only used by post-processing on small partitions.
        for (a, b, w) in self.weighted_edges() {
            if a == u {
                f(b, w);
            } else if b == u {
                f(a, w);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scalar_graph(values: &[f64], edges: &[(usize, usize)]) -> AttributedGraph {
        AttributedGraph::new(
            (0..values.len()).map(|i| format!("n{i}")).collect(),
            values.iter().map(|&x| vec![x]).collect(),
            edges.iter().copied(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn components_in_order() {
        let path = scalar_graph(&[0.0; 3], &[(0, 1), (1, 2)]);
        assert_eq!(connected_components(&path), vec![vec![0, 1, 2]]);
        let two = scalar_graph(&[0.0; 4], &[(2, 3), (0, 1)]);
        assert_eq!(connected_components(&two), vec![vec![0, 1], vec![2, 3]]);
        let empty = scalar_graph(&[0.0; 2], &[]);
        assert_eq!(connected_components(&empty), vec![vec![0], vec![1]]);
    }

    #[test]
    fn largest_component_keeps_ids() {
        let g = scalar_graph(&[0.0, 1.0, 2.0, 3.0, 4.0], &[(0, 1), (2, 3), (3, 4)]);
        let (sub, idx) = largest_component(&g).unwrap();
        assert_eq!(idx, vec![2, 3, 4]);
        assert_eq!(sub.node_ids(), &["n2", "n3", "n4"]);
        assert_eq!(sub.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(sub.attributes(2), &[4.0]);
    }

    #[test]
    fn sigma_single_pair_is_degenerate() {
        let g = scalar_graph(&[0.0, 2.0], &[(0, 1)]);
        assert!(matches!(auto_sigma(&g, 100, 0), Err(Error::DegenerateSigma)));
    }

    #[test]
    fn sigma_three_scalars() {
        // distances {0, 3, 3}: mean 2, variance (4 + 1 + 1) / 3 = 2
        let g = scalar_graph(&[0.0, 0.0, 3.0], &[(0, 1), (1, 2)]);
        assert_relative_eq!(auto_sigma(&g, 100, 0).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn sigma_identical_attributes_is_degenerate() {
        let g = scalar_graph(&[1.5; 5], &[(0, 1), (1, 2)]);
        assert!(matches!(auto_sigma(&g, 100, 0), Err(Error::DegenerateSigma)));
    }

    #[test]
    fn sigma_sampling_is_seeded_and_close() {
        let values: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let g = scalar_graph(&values, &[(0, 1)]);
        let exact = auto_sigma(&g, usize::MAX, 0).unwrap();
        let a = auto_sigma(&g, 5000, 11).unwrap();
        let b = auto_sigma(&g, 5000, 11).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - exact).abs() / exact < 0.05, "{a} vs {exact}");
    }

    #[test]
    fn sigma_over_edges() {
        let g = scalar_graph(&[0.0, 1.0, 3.0], &[(0, 1), (1, 2)]);
        // edge distances {1, 2}
        let s = auto_sigma_with(&g, SigmaPairs::Edges, 10, 0).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pair_index_covers_triangle() {
        for n in 2..12 {
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    assert_eq!(pair_from_index(k, n), (u, v), "n={n} k={k}");
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn weights_follow_gaussian() {
        let s2 = 2f64.sqrt();
        let g = scalar_graph(&[0.0, 0.0, 0.7 * s2], &[(0, 1), (1, 2)]);
        let w = weight_edges(&g, 0.7).unwrap();
        assert_eq!(w.weights()[0], 1.0);
        assert_relative_eq!(w.weights()[1], (-1f64).exp(), epsilon = 1e-12);
        assert_eq!(w.weights().len(), 2, "non-edges carry no weight");
        assert!(matches!(weight_edges(&g, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(weight_edges(&g, -1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn standardize_examples() {
        let g = AttributedGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
            [(0, 1)],
            None,
        )
        .unwrap();
        let z = standardize_attributes(&g);
        let c = 1.5f64.sqrt();
        assert_relative_eq!(z.attributes(0)[0], -c, epsilon = 1e-12);
        assert_relative_eq!(z.attributes(1)[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(z.attributes(2)[0], c, epsilon = 1e-12);
        assert!((0..3).all(|u| z.attributes(u)[1] == 0.0));
        let again = standardize_attributes(&z);
        for u in 0..3 {
            assert_relative_eq!(again.attributes(u)[0], z.attributes(u)[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let ids = || vec!["a".to_string(), "b".to_string()];
        assert!(AttributedGraph::new(vec!["a".into()], vec![vec![0.0]], [], None).is_err());
        assert!(AttributedGraph::new(ids(), vec![vec![0.0], vec![f64::NAN]], [], None).is_err());
        assert!(AttributedGraph::new(ids(), vec![vec![0.0], vec![1.0]], [(0, 2)], None).is_err());
        assert!(AttributedGraph::new(
            vec!["a".into(), "a".into()],
            vec![vec![0.0], vec![1.0]],
            [],
            None
        )
        .is_err());
        let (g, w) =
            AttributedGraph::with_warnings(ids(), vec![vec![0.0], vec![1.0]], [(0, 1), (1, 0), (1, 1)], None)
                .unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!((w.self_loops, w.duplicates), (1, 1));
    }

    proptest! {
        #[test]
        fn weights_symmetric_in_range_and_monotone(
            a in prop::collection::vec(-5.0f64..5.0, 3),
            b in prop::collection::vec(-5.0f64..5.0, 3),
            sigma in 0.5f64..10.0,
        ) {
            let g = AttributedGraph::new(
                vec!["x".into(), "y".into()], vec![a.clone(), b.clone()], [(0, 1)], None).unwrap();
            let rev = AttributedGraph::new(
                vec!["x".into(), "y".into()], vec![b.clone(), a.clone()], [(1, 0)], None).unwrap();
            let w = weight_edges(&g, sigma).unwrap().weights()[0];
            prop_assert_eq!(w.to_bits(), weight_edges(&rev, sigma).unwrap().weights()[0].to_bits());
            prop_assert!(w > 0.0 && w <= 1.0);
            prop_assert_eq!(w == 1.0, a == b);
            if a != b && w > 0.0 && w < 1.0 {
                let wider = weight_edges(&g, sigma * 1.5).unwrap().weights()[0];
                prop_assert!(wider > w);
            }
        }
    }
}
