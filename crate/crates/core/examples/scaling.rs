//! Runtime of the full Chebyshev kernel on preferential-attachment graphs,
//! with the fitted growth exponent.
//!
//! cargo run --release --example scaling [workers] [max_n]

use std::time::Instant;

use multiscale_anomaly::bench::preferential_attachment;
use multiscale_anomaly::graph::LaplacianMatrix;
use multiscale_anomaly::kernel::{full_kernel_approx, KernelMethod};

fn main() -> multiscale_anomaly::Result<()> {
    let mut args = std::env::args().skip(1);
    let workers: usize = args.next().map_or(1, |s| s.parse().expect("workers"));
    let max_n: usize = args.next().map_or(4000, |s| s.parse().expect("max_n"));

    let mut points = Vec::new();
    let mut n = 500;
    while n <= max_n {
        let edges = preferential_attachment(n, 3, 9)?;
        let lap = LaplacianMatrix::from_weighted_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))?;
        let start = Instant::now();
        let k = full_kernel_approx(&lap, 1.0, 30, workers)?;
        let secs = start.elapsed().as_secs_f64();
        let degree = match k.method() {
            KernelMethod::Chebyshev { degree } => degree,
            KernelMethod::Exact => unreachable!(),
        };
        println!("N={n:>6} degree={degree:>4} {secs:>8.2}s");
        points.push(((n as f64).ln(), secs.ln()));
        n *= 2;
    }
    if points.len() >= 2 {
        let m = points.len() as f64;
        let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
        let slope = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / points.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
        println!("fitted exponent {slope:.2} with {workers} worker(s)");
    }
    Ok(())
}
