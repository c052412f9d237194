//! Run settings shared by every command.

use std::path::{Path, PathBuf};

use crate::bench::SyntheticConfig;
use crate::graph::{SigmaPairs, DEFAULT_PAIR_BUDGET};
use crate::kernel::{KernelOptions, MethodChoice, DEFAULT_DEGREE, DEFAULT_DENSE_LIMIT};
use crate::scales::{
    log_grid, DEFAULT_DIP_QUANTILE, DEFAULT_MIN_PLATEAU, DEFAULT_PLATEAU_EPS, DEFAULT_T_COUNT, DEFAULT_T_MAX,
    DEFAULT_T_MIN,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    /// Standard deviation of pairwise attribute distances.
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for Sigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Sigma::Auto);
        }
        match s.parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(Sigma::Fixed(x)),
            _ => Err(Error::Config(format!("sigma must be `auto` or a positive number, got `{s}`"))),
        }
    }
}

/// Everything a command needs. Build with [`RunConfig::default`], then
/// [`RunConfig::load_file`] and [`RunConfig::set`] so that explicit flags
/// override file entries, which override defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub out: PathBuf,
    pub sigma: Sigma,
    pub sigma_pairs: SigmaPairs,
    pub pair_budget: usize,
    pub largest_component: bool,
    pub standardize: bool,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub at_times: Option<Vec<f64>>,
    pub runs: usize,
    pub degree: usize,
    pub dense_limit: usize,
    pub method: MethodChoice,
    pub workers: usize,
    pub seed: u64,
    pub plateau_eps: f64,
    pub min_plateau: usize,
    pub dip_quantile: f64,
    pub sparsify: f64,
    pub linear_null: bool,
    pub dump_kernel: bool,
    pub synthetic: SyntheticConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nodes: None,
            edges: None,
            out: PathBuf::from("out"),
            sigma: Sigma::Auto,
            sigma_pairs: SigmaPairs::All,
            pair_budget: DEFAULT_PAIR_BUDGET,
            largest_component: false,
            standardize: false,
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
            t_count: DEFAULT_T_COUNT,
            at_times: None,
            runs: 100,
            degree: DEFAULT_DEGREE,
            dense_limit: DEFAULT_DENSE_LIMIT,
            method: MethodChoice::Auto,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 0,
            plateau_eps: DEFAULT_PLATEAU_EPS,
            min_plateau: DEFAULT_MIN_PLATEAU,
            dip_quantile: DEFAULT_DIP_QUANTILE,
            sparsify: 0.0,
            linear_null: false,
            dump_kernel: false,
            synthetic: SyntheticConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl RunConfig {
    /// Apply one `key = value` setting; keys are the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "nodes" => self.nodes = Some(PathBuf::from(v)),
            "edges" => self.edges = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "sigma" => self.sigma = v.parse()?,
            "sigma-pairs" => {
                self.sigma_pairs = match v {
                    "all" => SigmaPairs::All,
                    "edges" => SigmaPairs::Edges,
                    _ => return Err(Error::Config(format!("sigma-pairs must be `all` or `edges`, got `{v}`"))),
                }
            }
            "pair-budget" => self.pair_budget = parse(key, v)?,
            "largest-component" => self.largest_component = parse_bool(key, v)?,
            "standardize" => self.standardize = parse_bool(key, v)?,
            "t-min" => self.t_min = parse(key, v)?,
            "t-max" => self.t_max = parse(key, v)?,
            "t-count" => self.t_count = parse(key, v)?,
            "at-times" => {
                self.at_times = Some(v.split(',').map(|x| parse(key, x.trim())).collect::<Result<_>>()?)
            }
            "runs" => self.runs = parse(key, v)?,
            "degree" => self.degree = parse(key, v)?,
            "dense-limit" => self.dense_limit = parse(key, v)?,
            "method" => {
                self.method = match v {
                    "auto" => MethodChoice::Auto,
                    "exact" => MethodChoice::Exact,
                    "chebyshev" => MethodChoice::Chebyshev,
                    _ => return Err(Error::Config(format!("method must be auto, exact or chebyshev, got `{v}`"))),
                }
            }
            "workers" => self.workers = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "plateau-eps" => self.plateau_eps = parse(key, v)?,
            "min-plateau" => self.min_plateau = parse(key, v)?,
            "dip-quantile" => self.dip_quantile = parse(key, v)?,
            "sparsify" => self.sparsify = parse(key, v)?,
            "linear-null" => self.linear_null = parse_bool(key, v)?,
            "dump-kernel" => self.dump_kernel = parse_bool(key, v)?,
            "bench-nodes" => self.synthetic.nodes = parse(key, v)?,
            "mixing" => self.synthetic.mixing = parse(key, v)?,
            "mean-degree" => self.synthetic.mean_degree = parse(key, v)?,
            "attribute-dim" => self.synthetic.attribute_dim = parse(key, v)?,
            "noise" => self.synthetic.noise = parse(key, v)?,
            "anomaly-fraction" => self.synthetic.anomaly_fraction = parse(key, v)?,
            "perturbed-fraction" => self.synthetic.perturbed_attr_fraction = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file; blank lines and `#` comments are skipped.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = crate::graph::io::read(path)?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.degree == 0 {
            return bad("degree must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if !(self.plateau_eps >= 0.0) || !(0.0..=1.0).contains(&self.dip_quantile) {
            return bad("plateau-eps must be >= 0 and dip-quantile in [0, 1]");
        }
        if let Some(ts) = &self.at_times {
            if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return bad("at-times must be positive finite numbers");
            }
        }
        Ok(())
    }

    pub fn kernel_options(&self) -> KernelOptions {
        KernelOptions {
            degree: self.degree,
            dense_limit: self.dense_limit,
            workers: self.workers,
            method: self.method,
            ..KernelOptions::default()
        }
    }

    /// `--at-times` sorted and deduplicated, or the log grid.
    pub fn times(&self) -> Result<Vec<f64>> {
        match &self.at_times {
            Some(ts) => {
                let mut ts = ts.clone();
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                Ok(ts)
            }
            None => log_grid(self.t_min, self.t_max, self.t_count),
        }
    }
}
