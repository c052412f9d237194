//! Louvain optimisation on a dense quality matrix.
//!
//! Moving node `u` from context `A` to `C` changes `Σ_c h_cᵀ B h_c` by
//! `2·(Σ_{v∈C} B_uv − Σ_{v∈A, v≠u} B_uv)`; the diagonal cancels. After the
//! local moves settle, contexts are collapsed into super-nodes with
//! `B' = Sᵀ B S` and the moves repeat on the smaller matrix.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Partition, QualityMatrix};

/// Gains at or below this are treated as no improvement.
const MIN_GAIN: f64 = 1e-12;

/// Generalised Louvain from singletons, deterministic given `rng_seed`.
pub fn louvain(q: &QualityMatrix, rng_seed: u64) -> Partition {
    louvain_traced(q, rng_seed).0
}

/// Like [`louvain`], also returning the sum of all accepted move gains.
///
/// A quality matrix whose entries are all below half the move tolerance
/// admits no move from singletons; every partition then scores zero within
/// rounding, and the all-in-one partition (the long-time limit) is returned.
pub fn louvain_traced(q: &QualityMatrix, rng_seed: u64) -> (Partition, f64) {
    if q.entries().iter().all(|x| x.abs() <= MIN_GAIN / 2.0) {
        return (Partition::all_in_one(q.order()), 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n0 = q.order();
    // membership of original nodes in current super-nodes
    let mut node_of: Vec<usize> = (0..n0).collect();
    let mut level = q.entries().to_vec();
    let mut n = n0;
    let mut total_gain = 0.0;

    loop {
        let mut comm: Vec<usize> = (0..n).collect();
        let (moved, gain) = local_moves(&level, n, &mut comm, &mut rng);
        total_gain += gain;
        if !moved {
            break;
        }
        let compact = Partition::new(&comm);
        let k = compact.num_contexts();
        for slot in node_of.iter_mut() {
            *slot = compact.assignment()[*slot];
        }
        level = aggregate(&level, n, compact.assignment(), k);
        n = k;
        if n == 1 {
            break;
        }
    }
    (Partition::new(&node_of), total_gain)
}

fn local_moves(q: &[f64], n: usize, comm: &mut [usize], rng: &mut ChaCha8Rng) -> (bool, f64) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut size = vec![1usize; n];
    let mut link = vec![0.0; n];
    let mut moved_any = false;
    let mut total = 0.0;
    loop {
        let mut moved = false;
        for &u in &order {
            let row = &q[u * n..(u + 1) * n];
            link.iter_mut().for_each(|x| *x = 0.0);
            for (v, &x) in row.iter().enumerate() {
                link[comm[v]] += x;
            }
            let own = comm[u];
            link[own] -= row[u];
            let mut best = own;
            let mut best_gain = MIN_GAIN;
            for c in 0..n {
                if c == own || size[c] == 0 {
                    continue;
                }
                let gain = 2.0 * (link[c] - link[own]);
                if gain > best_gain {
                    best_gain = gain;
                    best = c;
                }
            }
            if best != own {
                size[own] -= 1;
                size[best] += 1;
                comm[u] = best;
                total += best_gain;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            return (moved_any, total);
        }
    }
}

fn aggregate(q: &[f64], n: usize, comm: &[usize], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * k];
    for u in 0..n {
        let cu = comm[u];
        for v in 0..n {
            out[cu * k + comm[v]] += q[u * n + v];
        }
    }
    out
}
