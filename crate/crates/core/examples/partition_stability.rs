//! Markov stability of partitions across time: the optimum found by the
//! Louvain ensemble, its robustness, and how fixed partitions compare.
//!
//! cargo run --release --example partition_stability

use multiscale_anomaly::graph::LaplacianMatrix;
use multiscale_anomaly::kernel::{exact_kernel, KernelOptions};
use multiscale_anomaly::scales::ensemble_vi;
use multiscale_anomaly::stability::{best_partition, quality_matrix, stability_score, Partition};

/// Ring of four 5-cliques, neighbouring cliques joined by a single edge.
fn ring_of_cliques() -> LaplacianMatrix {
    let (k, c) = (5, 4);
    let mut edges = Vec::new();
    for b in 0..c {
        for i in 0..k {
            for j in i + 1..k {
                edges.push((b * k + i, b * k + j, 1.0));
            }
        }
        edges.push((b * k, ((b + 1) % c) * k + 1, 1.0));
    }
    LaplacianMatrix::from_weighted_edges(k * c, edges).unwrap()
}

fn main() -> multiscale_anomaly::Result<()> {
    let lap = ring_of_cliques();
    let n = lap.order();
    let cliques = Partition::new(&(0..n).map(|u| u / 5).collect::<Vec<_>>());
    let pairs = Partition::new(&(0..n).map(|u| u / 10).collect::<Vec<_>>());

    println!("{:>7} {:>3} {:>9} {:>9} {:>9} {:>9}", "t", "K", "best r", "cliques", "pairs", "VI");
    for t in [0.05, 0.3, 1.0, 3.0, 10.0, 30.0] {
        let found = best_partition(&lap, t, 50, 7, &KernelOptions::default())?;
        let q = quality_matrix(&exact_kernel(&lap, t, usize::MAX)?);
        let vi = ensemble_vi(&found.ensemble, 7, 0)?;
        println!(
            "{t:>7} {:>3} {:>9.5} {:>9.5} {:>9.5} {vi:>9.4}",
            found.best.num_contexts(),
            found.best.score.unwrap(),
            stability_score(&q, &cliques)?,
            stability_score(&q, &pairs)?,
        );
    }
    Ok(())
}
