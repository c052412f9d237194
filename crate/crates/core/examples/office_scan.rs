//! Multi-scale scan of a four-community office network with three planted
//! outliers: find robust scales, then see which outliers stand out at each.
//!
//! cargo run --release --example office_scan

use multiscale_anomaly::anomaly::detect;
use multiscale_anomaly::bench::{office_network, OfficeConfig, COMMUNITY_NAMES};
use multiscale_anomaly::graph::{laplacian, weight_edges};
use multiscale_anomaly::kernel::KernelOptions;
use multiscale_anomaly::scales::{
    log_grid, scan, select_scales, ScanOptions, DEFAULT_T_COUNT, DEFAULT_T_MAX, DEFAULT_T_MIN, DEFAULT_DIP_QUANTILE,
    DEFAULT_MIN_PLATEAU, DEFAULT_PLATEAU_EPS,
};

fn main() -> multiscale_anomaly::Result<()> {
    let net = office_network(&OfficeConfig::default())?;
    let lap = laplacian(&weight_edges(&net.graph, net.sigma)?)?;
    let times = log_grid(DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_T_COUNT)?;
    let opts = ScanOptions {
        kernel: KernelOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            ..KernelOptions::default()
        },
        ..ScanOptions::default()
    };
    let result = scan(&lap, &times, &opts)?;
    let selection = select_scales(&result, DEFAULT_DIP_QUANTILE, DEFAULT_PLATEAU_EPS, DEFAULT_MIN_PLATEAU);

    println!("communities: {COMMUNITY_NAMES:?}");
    println!("{:>10} {:>3} {:>9}  contexts", "t", "K", "VI within");
    for (i, t) in result.times.iter().enumerate().step_by(10) {
        let sizes = result.best_partitions[i].sizes();
        println!("{t:>10.3} {:>3} {:>9.4}  {sizes:?}", result.num_clusters[i], result.vi_within[i]);
    }

    let profiles = result.concentration.as_ref().expect("scan records concentrations");
    let ids = net.graph.node_ids();
    for reason in &selection.reasons {
        let report = detect(&profiles[reason.index]);
        let status: Vec<String> = net
            .outliers
            .iter()
            .zip(["o1", "o2", "o3"])
            .map(|(&u, name)| format!("{name}:{}", if report.is_flagged(u) { "flagged" } else { "clear" }))
            .collect();
        let others = report.flagged.iter().filter(|u| !net.outliers.contains(u)).count();
        println!(
            "selected t={:.3} K={} plateau {}..{} | {} | {} other nodes flagged (first: {:?})",
            reason.time,
            reason.num_clusters,
            reason.plateau_start,
            reason.plateau_end,
            status.join(" "),
            others,
            report.flagged.iter().find(|u| !net.outliers.contains(u)).map(|&u| &ids[u]),
        );
    }
    Ok(())
}
