//! Exact and Chebyshev heat kernels side by side, plus degree escalation.
//!
//! cargo run --release --example heat_kernel

use std::time::Instant;

use multiscale_anomaly::bench::preferential_attachment;
use multiscale_anomaly::graph::LaplacianMatrix;
use multiscale_anomaly::kernel::{full_kernel_approx, guarded_coefficients, spectral_bound, Spectrum};

fn main() -> multiscale_anomaly::Result<()> {
    let n = 600;
    let edges = preferential_attachment(n, 3, 1)?;
    let lap = LaplacianMatrix::from_weighted_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))?;
    let bound = spectral_bound(&lap, false);
    let refined = spectral_bound(&lap, true);
    let spectrum = Spectrum::new(&lap, usize::MAX)?;
    let lmax = *spectrum.eigenvalues().last().unwrap();
    println!("N={n} nnz={} lambda_max={lmax:.2} bound 2*dmax={bound:.1} refined={refined:.2}", lap.nnz());

    println!("{:>8} {:>7} {:>12} {:>10} {:>10}", "t", "degree", "max error", "exact ms", "cheb ms");
    for t in [0.01, 0.1, 0.5, 1.0, 2.0] {
        let start = Instant::now();
        let exact = spectrum.kernel(t);
        let exact_ms = start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        let approx = full_kernel_approx(&lap, t, 30, 1)?;
        let cheb_ms = start.elapsed().as_secs_f64() * 1e3;
        let degree = guarded_coefficients(t, bound, 30).degree();
        println!(
            "{t:>8} {degree:>7} {:>12.2e} {exact_ms:>10.1} {cheb_ms:>10.1}",
            approx.max_abs_diff(&exact)
        );
    }
    Ok(())
}
