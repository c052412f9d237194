//! Command-line front end. Settings resolve as flags, then `--config` file
//! entries, then defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multiscale_anomaly::pipeline::{self, RunConfig};
use multiscale_anomaly::{Error, Result};

#[derive(Parser)]
#[command(name = "msad", version, about = "Multi-scale anomaly and context detection in attributed networks")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan diffusion times, select relevant scales and report outliers at each.
    Scan(Common),
    /// Detect outliers at a single time.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
    },
    /// Generate a synthetic network and evaluate detection on it.
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        synthetic: Synthetic,
    },
    /// Evaluate externally produced scores against labels.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Stability of a given partition at time t.
    ScorePartition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Args)]
struct Common {
    /// key=value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    edges: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `auto` or a positive bandwidth.
    #[arg(long)]
    sigma: Option<String>,
    /// Node pairs for the automatic bandwidth: `all` or `edges`.
    #[arg(long)]
    sigma_pairs: Option<String>,
    #[arg(long)]
    pair_budget: Option<String>,
    #[arg(long)]
    largest_component: bool,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    t_min: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    t_count: Option<String>,
    /// Comma-separated times replacing the grid and automatic selection.
    #[arg(long)]
    at_times: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    /// Chebyshev degree.
    #[arg(long)]
    degree: Option<String>,
    /// Largest order handled by dense eigendecomposition.
    #[arg(long)]
    dense_limit: Option<String>,
    /// `auto`, `exact` or `chebyshev`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    plateau_eps: Option<String>,
    #[arg(long)]
    min_plateau: Option<String>,
    #[arg(long)]
    dip_quantile: Option<String>,
    /// Drop kernel entries below this before optimisation.
    #[arg(long)]
    sparsify: Option<String>,
    /// Also report the stability with a linear null term.
    #[arg(long)]
    linear_null: bool,
    /// Write kernel matrices as CSV.
    #[arg(long)]
    dump_kernel: bool,
}

#[derive(Args)]
struct Synthetic {
    #[arg(long)]
    bench_nodes: Option<String>,
    #[arg(long)]
    mixing: Option<String>,
    #[arg(long)]
    mean_degree: Option<String>,
    #[arg(long)]
    attribute_dim: Option<String>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    anomaly_fraction: Option<String>,
    #[arg(long)]
    perturbed_fraction: Option<String>,
}

fn apply(cfg: &mut RunConfig, pairs: &[(&str, &Option<String>)]) -> Result<()> {
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    Ok(())
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        apply(
            &mut cfg,
            &[
                ("nodes", &self.nodes),
                ("edges", &self.edges),
                ("out", &self.out),
                ("sigma", &self.sigma),
                ("sigma-pairs", &self.sigma_pairs),
                ("pair-budget", &self.pair_budget),
                ("t-min", &self.t_min),
                ("t-max", &self.t_max),
                ("t-count", &self.t_count),
                ("at-times", &self.at_times),
                ("runs", &self.runs),
                ("degree", &self.degree),
                ("dense-limit", &self.dense_limit),
                ("method", &self.method),
                ("workers", &self.workers),
                ("seed", &self.seed),
                ("plateau-eps", &self.plateau_eps),
                ("min-plateau", &self.min_plateau),
                ("dip-quantile", &self.dip_quantile),
                ("sparsify", &self.sparsify),
            ],
        )?;
        cfg.largest_component |= self.largest_component;
        cfg.standardize |= self.standardize;
        cfg.linear_null |= self.linear_null;
        cfg.dump_kernel |= self.dump_kernel;
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Scan(common) => {
            let cfg = common.config()?;
            let outcome = pipeline::run_scan(&cfg)?;
            for s in &outcome.selection.selected {
                println!("t={:.6e} K={} flagged={}", s.time, s.num_clusters, s.flagged.join(","));
            }
        }
        Command::Detect { common, t } => {
            let cfg = common.config()?;
            let report = pipeline::run_detect(&cfg, t)?;
            println!("t={t:.6e} threshold={:.6} flagged={}", report.threshold, report.flagged.join(","));
        }
        Command::Bench { common, synthetic } => {
            let mut cfg = common.config()?;
            apply(
                &mut cfg,
                &[
                    ("bench-nodes", &synthetic.bench_nodes),
                    ("mixing", &synthetic.mixing),
                    ("mean-degree", &synthetic.mean_degree),
                    ("attribute-dim", &synthetic.attribute_dim),
                    ("noise", &synthetic.noise),
                    ("anomaly-fraction", &synthetic.anomaly_fraction),
                    ("perturbed-fraction", &synthetic.perturbed_fraction),
                ],
            )?;
            let m = pipeline::run_bench(&cfg)?;
            println!(
                "t={:.6e} roc_auc={:.4} pr_auc={:.4} random_roc_auc={:.4}",
                m.best_time, m.detector.roc_auc, m.detector.pr_auc, m.random.roc_auc
            );
        }
        Command::Eval { scores, labels, out } => {
            let m = pipeline::run_eval(&scores, &labels, &out)?;
            println!("roc_auc={:.4} pr_auc={:.4}", m.metrics.roc_auc, m.metrics.pr_auc);
        }
        Command::ScorePartition { common, partition, t } => {
            let cfg = common.config()?;
            let s = pipeline::run_score_partition(&cfg, &partition, t)?;
            println!("t={t:.6e} K={} score={:.12}", s.contexts, s.score);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
