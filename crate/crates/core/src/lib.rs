//! Multi-scale anomaly detection in attributed networks.
//!
//! Node attributes are turned into Gaussian edge weights, the weighted
//! Laplacian drives a heat diffusion `e^{-tL}`, and the diffusion time `t`
//! plays the role of a scale:
//!
//! * a node whose impulse stays concentrated after diffusing for time `t`
//!   ([`anomaly`]) is dissimilar from its surroundings at that scale;
//! * the partition maximising Markov stability at the same `t`
//!   ([`stability`]) gives every node its context;
//! * scanning `t` and comparing partitions by variation of information
//!   ([`scales`]) finds the scales where contexts are robust.
//!
//! Small graphs use an exact eigendecomposition of the Laplacian; large ones
//! use a column-parallel Chebyshev expansion of the heat kernel
//! ([`kernel`]). The [`bench`] module generates planted-partition test
//! networks and scores detectors; [`pipeline`] wires everything together for
//! the `msad` command-line tool.
//!
//! ```
//! use multiscale_anomaly::graph::{AttributedGraph, weight_edges, laplacian};
//! use multiscale_anomaly::kernel::{heat_kernel, KernelOptions};
//! use multiscale_anomaly::anomaly::{concentration_profile, detect};
//!
//! // A path a - b - c where `c` carries a very different attribute.
//! let graph = AttributedGraph::new(
//!     vec!["a".into(), "b".into(), "c".into()],
//!     vec![vec![0.0], vec![0.1], vec![3.0]],
//!     [(0, 1), (1, 2)],
//!     None,
//! )?;
//! let lap = laplacian(&weight_edges(&graph, 1.0)?)?;
//! let kernel = heat_kernel(&lap, 1.0, &KernelOptions::default())?;
//! let report = detect(&concentration_profile(&kernel));
//! assert_eq!(report.ranking[0], 2);
//! # Ok::<(), multiscale_anomaly::Error>(())
//! ```

pub mod anomaly;
pub mod bench;
mod error;
pub mod graph;
pub mod kernel;
pub mod pipeline;
pub mod scales;
pub mod seed;
pub mod stability;

pub use error::{Error, Result};

/// Population mean and standard deviation (divisor = count).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
