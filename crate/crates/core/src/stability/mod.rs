//! Markov stability of node partitions and its optimisation.
//!
//! For a partition with indicator vectors `h_i`, the stability at time `t`
//! is
//!
//! ```text
//! r(t; H) = Σ_i [ (1/N) h_iᵀ e^{-tL} h_i − (|h_i|₁ / N)² ]
//! ```
//!
//! the probability that a diffusing walker started uniformly is found in
//! the same context after time `t`, minus the same probability for
//! independent uniform placements. Writing it as `Σ_i h_iᵀ B h_i` with
//! `B = e^{-tL}/N − 11ᵀ/N²` turns maximisation into a generalised modularity
//! problem that [`louvain`] attacks with local moves and aggregation.
//!
//! Small `t` favours fine partitions and large `t` coarse ones. Every
//! partition scores 0 once `t` is large enough, and the all-in-one partition
//! always scores 0.

mod louvain;

pub use louvain::{louvain, louvain_traced};

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{Adjacency, LaplacianMatrix};
use crate::kernel::{with_workers, KernelEngine, KernelMatrix, KernelOptions};
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Assignment of nodes to contexts `0..K`, ids compacted by first appearance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    assignment: Vec<usize>,
    contexts: usize,
    pub score: Option<f64>,
    pub time: Option<f64>,
}

impl Partition {
    /// Relabel arbitrary context labels to `0..K` in order of first appearance.
    pub fn new(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            contexts: map.len(),
            assignment,
            score: None,
            time: None,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new(&(0..n).collect::<Vec<_>>())
    }

    pub fn all_in_one(n: usize) -> Self {
        Self::new(&vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Number of contexts `K`.
    pub fn num_contexts(&self) -> usize {
        self.contexts
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn context_of(&self, u: usize) -> usize {
        self.assignment[u]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.contexts];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }

    pub fn members(&self, context: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| self.assignment[u] == context).collect()
    }

    pub(crate) fn with_score(mut self, score: f64, time: f64) -> Self {
        self.score = Some(score);
        self.time = Some(time);
        self
    }
}

/// `B(t) = e^{-tL}/N − 11ᵀ/N²`, dense and symmetric.
#[derive(Debug, Clone)]
pub struct QualityMatrix {
    order: usize,
    time: f64,
    entries: Vec<f64>,
}

impl QualityMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.entries[u * self.order + v]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Drop kernel entries below `eps` (keeping only the null-model term
    /// there). An approximation knob for large graphs; `eps = 0` is a no-op.
    pub fn sparsify(&mut self, eps: f64) {
        if eps <= 0.0 {
            return;
        }
        let n = self.order as f64;
        let null = 1.0 / (n * n);
        for (i, x) in self.entries.iter_mut().enumerate() {
            let (u, v) = (i / self.order, i % self.order);
            if u != v && *x + null < eps {
                *x = -null;
            }
        }
    }
}

pub fn quality_matrix(kernel: &KernelMatrix) -> QualityMatrix {
    let n = kernel.order() as f64;
    let null = 1.0 / (n * n);
    QualityMatrix {
        order: kernel.order(),
        time: kernel.time(),
        entries: kernel.entries().iter().map(|k| k / n - null).collect(),
    }
}

fn check_len(expected: usize, p: &Partition) -> Result<()> {
    if p.len() != expected {
        return Err(Error::Shape {
            expected,
            got: p.len(),
        });
    }
    Ok(())
}

/// Sum of quality-matrix entries inside each context.
pub fn stability_score(q: &QualityMatrix, partition: &Partition) -> Result<f64> {
    check_len(q.order, partition)?;
    let n = q.order;
    let a = partition.assignment();
    let mut total = 0.0;
    for u in 0..n {
        let row = &q.entries[u * n..(u + 1) * n];
        total += row
            .iter()
            .zip(a)
            .filter(|(_, &c)| c == a[u])
            .map(|(x, _)| x)
            .sum::<f64>();
    }
    Ok(total)
}

/// `Σ_i (h_iᵀ e^{-tL} h_i − |h_i|₁ / N)`, the variant with a linear null
/// term. Its subtracted part equals 1 for every partition, so it is
/// reported for comparison only and never optimised.
pub fn literal_stability(kernel: &KernelMatrix, partition: &Partition) -> Result<f64> {
    check_len(kernel.order(), partition)?;
    let n = kernel.order();
    let a = partition.assignment();
    let mut total = 0.0;
    for u in 0..n {
        total += kernel
            .column(u)
            .iter()
            .zip(a)
            .filter(|(_, &c)| c == a[u])
            .map(|(x, _)| x)
            .sum::<f64>();
    }
    let null: f64 = partition.sizes().iter().map(|&s| s as f64 / n as f64).sum();
    Ok(total - null)
}

/// Reassign every single-node context to the adjacent context that receives
/// the largest total edge weight from it (ties to the lowest context id).
///
/// Repeats until no singleton context with an edge remains. A partition made
/// only of singletons is returned unchanged.
pub fn merge_singletons(partition: &Partition, adjacency: &dyn Adjacency) -> Partition {
    let mut labels = partition.assignment().to_vec();
    let n = labels.len();
    let mut sizes = partition.sizes();
    if sizes.iter().all(|&s| s == 1) {
        return partition.clone();
    }
    loop {
        let mut moved = false;
        for u in 0..n {
            if sizes[labels[u]] != 1 {
                continue;
            }
            let mut totals: Vec<(usize, f64)> = Vec::new();
            adjacency.for_each_neighbor(u, &mut |v, w| {
                let c = labels[v];
                match totals.iter_mut().find(|(k, _)| *k == c) {
                    Some(e) => e.1 += w,
                    None => totals.push((c, w)),
                }
            });
            let best = totals
                .into_iter()
                .filter(|&(c, _)| c != labels[u])
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            if let Some((c, _)) = best {
                sizes[labels[u]] -= 1;
                sizes[c] += 1;
                labels[u] = c;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Partition::new(&labels)
}

/// Best partition of an ensemble of Louvain runs at one time.
#[derive(Debug, Clone)]
pub struct BestPartition {
    pub best: Partition,
    pub best_run: usize,
    /// Every run after singleton merging, in run order.
    pub ensemble: Vec<Partition>,
}

/// `runs` seeded Louvain runs on `q`, each followed by [`merge_singletons`];
/// the highest score wins, ties to the lowest run index.
pub fn best_partition_from_quality(
    q: &QualityMatrix,
    adjacency: &(dyn Adjacency + Sync),
    runs: usize,
    rng_seed: u64,
    workers: usize,
) -> Result<BestPartition> {
    if runs == 0 {
        return Err(Error::Parameter("at least one Louvain run is required".into()));
    }
    let ensemble: Vec<Partition> = with_workers(workers, || {
        (0..runs)
            .into_par_iter()
            .map(|r| {
                let raw = louvain(q, derive_seed(rng_seed, "louvain", r as u64));
                let merged = merge_singletons(&raw, adjacency);
                let score = stability_score(q, &merged).expect("length checked");
                merged.with_score(score, q.time)
            })
            .collect()
    });
    let mut best_run = 0;
    for (r, p) in ensemble.iter().enumerate() {
        if p.score > ensemble[best_run].score {
            best_run = r;
        }
    }
    Ok(BestPartition {
        best: ensemble[best_run].clone(),
        best_run,
        ensemble,
    })
}

/// Kernel, quality matrix and Louvain ensemble at a single time.
pub fn best_partition(
    lap: &LaplacianMatrix,
    t: f64,
    runs: usize,
    rng_seed: u64,
    opts: &KernelOptions,
) -> Result<BestPartition> {
    let kernel = KernelEngine::new(lap, opts)?.kernel(t)?;
    best_partition_from_quality(&quality_matrix(&kernel), lap, runs, rng_seed, opts.workers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{weight_edges, AttributedGraph};
    use crate::kernel::exact_kernel;
    use approx::assert_abs_diff_eq;

    fn weak_triangles(bridge: f64) -> LaplacianMatrix {
        LaplacianMatrix::from_weighted_edges(
            6,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, bridge)],
        )
        .unwrap()
    }

    fn quality(lap: &LaplacianMatrix, t: f64) -> QualityMatrix {
        quality_matrix(&exact_kernel(lap, t, 100).unwrap())
    }

    /// Every set partition of `0..n` as restricted growth strings.
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0; n];
        fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for c in 0..=max + 1 {
                cur[i] = c;
                rec(i + 1, max.max(c), cur, out);
            }
        }
        if n > 0 {
            rec(1, 0, &mut cur, &mut out);
        }
        out
    }

    fn optimum(q: &QualityMatrix) -> (f64, Vec<usize>) {
        all_partitions(q.order())
            .into_iter()
            .map(|a| (stability_score(q, &Partition::new(&a)).unwrap(), a))
            .fold((f64::NEG_INFINITY, vec![]), |acc, x| if x.0 > acc.0 { x } else { acc })
    }

    fn path(n: usize) -> LaplacianMatrix {
        LaplacianMatrix::from_weighted_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn star(n: usize) -> LaplacianMatrix {
        LaplacianMatrix::from_weighted_edges(n, (1..n).map(|i| (0, i, 1.0))).unwrap()
    }

    fn clique_pair(k: usize, bridge: f64) -> LaplacianMatrix {
        let mut e = Vec::new();
        for base in [0, k] {
            for i in 0..k {
                for j in i + 1..k {
                    e.push((base + i, base + j, 1.0));
                }
            }
        }
        e.push((k - 1, k, bridge));
        LaplacianMatrix::from_weighted_edges(2 * k, e).unwrap()
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(all_partitions(6).len(), 203);
        assert_eq!(all_partitions(8).len(), 4140);
    }

    #[test]
    fn matches_exhaustive_optimum() {
        let cases = [
            (weak_triangles(0.01), 1.0),
            (clique_pair(3, 1e-9), 1.0),
            (clique_pair(4, 0.05), 2.0),
            (path(7), 1.0),
            (path(8), 3.0),
            (star(6), 0.5),
        ];
        for (lap, t) in cases {
            let q = quality(&lap, t);
            let (best_score, _) = optimum(&q);
            let found = best_partition(&lap, t, 100, 11, &KernelOptions::default()).unwrap();
            assert_abs_diff_eq!(found.best.score.unwrap(), best_score, epsilon = 1e-10);
        }
    }

    #[test]
    fn weak_cliques_beat_extremes() {
        let lap = clique_pair(3, 1e-9);
        let q = quality(&lap, 1.0);
        let two = stability_score(&q, &Partition::new(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!(two > stability_score(&q, &Partition::all_in_one(6)).unwrap());
        assert!(two > stability_score(&q, &Partition::singletons(6)).unwrap());
    }

    #[test]
    fn permutation_equivariance() {
        let lap = clique_pair(4, 0.05);
        let perm = [5, 2, 7, 0, 3, 6, 1, 4];
        let edges: Vec<_> = (0..8)
            .flat_map(|u| lap.row(u).filter(move |&(v, _)| v > u).map(move |(v, w)| (perm[u], perm[v], -w)))
            .collect();
        let permuted = LaplacianMatrix::from_weighted_edges(8, edges).unwrap();
        let a = best_partition(&lap, 2.0, 20, 3, &KernelOptions::default()).unwrap().best;
        let b = best_partition(&permuted, 2.0, 20, 3, &KernelOptions::default()).unwrap().best;
        for u in 0..8 {
            for v in 0..8 {
                assert_eq!(
                    a.context_of(u) == a.context_of(v),
                    b.context_of(perm[u]) == b.context_of(perm[v])
                );
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn score_is_nonnegative_and_decays(labels in proptest::collection::vec(0usize..4, 7)) {
            let lap = path(7);
            let p = Partition::new(&labels);
            let mut prev = f64::INFINITY;
            for t in [0.0, 0.1, 0.5, 1.0, 3.0, 10.0, 40.0] {
                let r = stability_score(&quality(&lap, t), &p).unwrap();
                proptest::prop_assert!(r >= -1e-10);
                proptest::prop_assert!(r <= prev + 1e-8);
                prev = r;
            }
        }
    }

    #[test]
    fn partition_compacts_labels() {
        let p = Partition::new(&[7, 7, 3, 9, 3]);
        assert_eq!(p.assignment(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.num_contexts(), 3);
        assert_eq!(p.sizes(), vec![2, 2, 1]);
        assert_eq!(p.members(1), vec![2, 4]);
    }

    #[test]
    fn reference_scores() {
        let lap = weak_triangles(0.2);
        let n = 6.0;
        let q0 = quality(&lap, 0.0);
        assert_abs_diff_eq!(stability_score(&q0, &Partition::singletons(6)).unwrap(), 1.0 - 1.0 / n, epsilon = 1e-12);
        for t in [0.0, 0.3, 2.0, 50.0] {
            let q = quality(&lap, t);
            assert_abs_diff_eq!(stability_score(&q, &Partition::all_in_one(6)).unwrap(), 0.0, epsilon = 1e-10);
            let rs: f64 = (0..6).map(|v| q.get(2, v)).sum();
            assert_abs_diff_eq!(rs, 0.0, epsilon = 1e-8);
        }
        let late = quality(&lap, 1e4);
        assert!(stability_score(&late, &Partition::new(&[0, 0, 0, 1, 1, 1])).unwrap().abs() < 1e-10);
        assert!(matches!(stability_score(&q0, &Partition::singletons(5)), Err(Error::Shape { .. })));
    }

    #[test]
    fn literal_null_term_is_constant() {
        let lap = weak_triangles(0.2);
        let k = exact_kernel(&lap, 1.0, 100).unwrap();
        // h_iᵀKh_i summed over an all-in-one partition is N, null term 1.
        assert_abs_diff_eq!(literal_stability(&k, &Partition::all_in_one(6)).unwrap(), 5.0, epsilon = 1e-10);
        let halves = literal_stability(&k, &Partition::new(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!(halves < 5.0);
    }

    #[test]
    fn merge_examples() {
        let g = AttributedGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![0.1], vec![0.2]],
            [(0, 1), (1, 2)],
            None,
        )
        .unwrap();
        let wg = weight_edges(&g, 1.0).unwrap();
        let m = merge_singletons(&Partition::new(&[0, 1, 1]), &wg);
        assert_eq!(m.assignment(), &[0, 0, 0]);
        let all = Partition::singletons(3);
        assert_eq!(merge_singletons(&all, &wg), all);

        // a=0 adjacent to X={1,2} (total 0.5) and Y={3} plus {4} (total 0.7)
        let lap = LaplacianMatrix::from_weighted_edges(
            5,
            [(0, 1, 0.2), (0, 2, 0.3), (0, 3, 0.4), (0, 4, 0.3), (1, 2, 1.0), (3, 4, 1.0)],
        )
        .unwrap();
        let m = merge_singletons(&Partition::new(&[0, 1, 1, 2, 2]), &lap);
        assert_eq!(m.assignment(), &[0, 1, 1, 0, 0]);
    }

    #[test]
    fn merge_ties_go_to_lowest_context() {
        let lap = LaplacianMatrix::from_weighted_edges(5, [(0, 1, 0.5), (0, 3, 0.5), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        // contexts: {0}=0, {1,2}=1, {3,4}=2
        let m = merge_singletons(&Partition::new(&[0, 1, 1, 2, 2]), &lap);
        assert_eq!(m.assignment(), &[0, 0, 0, 1, 1]);
    }

    #[test]
    fn best_partition_is_deterministic_across_workers() {
        let lap = weak_triangles(0.01);
        let mut opts = KernelOptions::default();
        let a = best_partition(&lap, 1.0, 16, 5, &opts).unwrap();
        opts.workers = 8;
        let b = best_partition(&lap, 1.0, 16, 5, &opts).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.ensemble, b.ensemble);
        assert_eq!(a.best.assignment(), &[0, 0, 0, 1, 1, 1]);
        assert!(a.ensemble.iter().all(|p| p.assignment() == a.best.assignment()));

        let one = best_partition(&lap, 1.0, 1, 5, &KernelOptions::default()).unwrap();
        let q = quality(&lap, 1.0);
        let direct = merge_singletons(&louvain(&q, derive_seed(5, "louvain", 0)), &lap);
        assert_eq!(one.best.assignment(), direct.assignment());
    }
}
