//! End-to-end commands with on-disk artifacts, as driven by the `msad`
//! binary. Every command is deterministic given the configuration and seed,
//! whatever the worker count.

mod artifacts;
mod config;

pub use artifacts::{
    BenchMetrics, EvalMetrics, NodeScore, PartitionScore, ReportArtifact, SelectedScale, SelectionArtifact,
};
pub use config::{RunConfig, Sigma};

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::anomaly::{detect, AnomalyReport, ConcentrationProfile};
use crate::bench::{evaluate, generate_synthetic, random_baseline, roc_auc};
use crate::graph::io::{read, rows};
use crate::graph::{
    auto_sigma_with, largest_component, laplacian, load_attributed_graph, standardize_attributes, weight_edges,
    write_attributed_graph, AttributedGraph, LaplacianMatrix, WeightedGraph,
};
use crate::kernel::{KernelEngine, KernelMatrix};
use crate::scales::{scan, select_scales, ScaleScan, ScanOptions};
use crate::seed::derive_seed;
use crate::stability::{literal_stability, quality_matrix, stability_score, Partition};
use crate::{Error, Result};

use artifacts::{time_tag, write_csv, write_json};

/// A loaded, weighted graph ready for diffusion.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub weighted: WeightedGraph,
    pub lap: LaplacianMatrix,
    /// `None` when attributes were constant and unit weights were used.
    pub sigma: Option<f64>,
}

impl Prepared {
    pub fn graph(&self) -> &AttributedGraph {
        self.weighted.base()
    }
}

/// Weight a graph per the configured bandwidth and build its Laplacian.
pub fn prepare_graph(graph: AttributedGraph, cfg: &RunConfig) -> Result<Prepared> {
    let graph = if cfg.largest_component {
        let n = graph.node_count();
        let (g, kept) = largest_component(&graph)?;
        if kept.len() < n {
            log::warn!("keeping the largest component: {} of {n} nodes", kept.len());
        }
        g
    } else {
        graph
    };
    let graph = if cfg.standardize { standardize_attributes(&graph) } else { graph };
    let sigma = match cfg.sigma {
        Sigma::Fixed(s) => Some(s),
        Sigma::Auto => match auto_sigma_with(&graph, cfg.sigma_pairs, cfg.pair_budget, derive_seed(cfg.seed, "sigma", 0)) {
            Ok(s) => Some(s),
            Err(Error::DegenerateSigma) => {
                log::warn!("attribute distances have zero spread; using unit edge weights");
                None
            }
            Err(e) => return Err(e),
        },
    };
    let weighted = match sigma {
        Some(s) => weight_edges(&graph, s)?,
        None => WeightedGraph::unit(graph),
    };
    let lap = laplacian(&weighted)?;
    log::info!("graph: {} nodes, {} edges, sigma {:?}", lap.order(), weighted.weights().len(), sigma);
    Ok(Prepared { weighted, lap, sigma })
}

fn load(cfg: &RunConfig) -> Result<Prepared> {
    let (nodes, edges) = match (&cfg.nodes, &cfg.edges) {
        (Some(n), Some(e)) => (n, e),
        _ => return Err(Error::Config("--nodes and --edges are required".into())),
    };
    let (graph, warnings) = load_attributed_graph(nodes, edges)?;
    if warnings.total() > 0 {
        log::warn!("dropped {} self-loops and {} duplicate edges", warnings.self_loops, warnings.duplicates);
    }
    prepare_graph(graph, cfg)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn report_artifact(graph: &AttributedGraph, report: &AnomalyReport, profile: &ConcentrationProfile) -> ReportArtifact {
    let ranks = report.ranks();
    let ids = graph.node_ids();
    ReportArtifact {
        time: report.time,
        threshold: report.threshold,
        mean: profile.mean,
        std: profile.std,
        flagged: report.flagged.iter().map(|&u| ids[u].clone()).collect(),
        nodes: (0..ids.len())
            .map(|u| NodeScore {
                id: ids[u].clone(),
                score: report.scores[u],
                rank: ranks[u],
                flagged: report.is_flagged(u),
                context: report.contexts.as_ref().map(|c| c[u]),
            })
            .collect(),
    }
}

fn write_report(
    dir: &Path,
    graph: &AttributedGraph,
    report: &AnomalyReport,
    profile: &ConcentrationProfile,
) -> Result<ReportArtifact> {
    let art = report_artifact(graph, report, profile);
    let tag = time_tag(report.time);
    write_json(&dir.join(format!("report_t_{tag}.json")), &art)?;
    let rows = art.nodes.iter().map(|n| {
        vec![
            n.id.clone(),
            format!("{:?}", n.score),
            n.rank.to_string(),
            u8::from(n.flagged).to_string(),
            n.context.map_or(String::new(), |c| c.to_string()),
        ]
    });
    write_csv(&dir.join(format!("report_t_{tag}.csv")), &["id", "score", "rank", "flagged", "context"], rows)?;
    Ok(art)
}

fn dump_kernel(dir: &Path, kernel: &KernelMatrix) -> Result<()> {
    let path = dir.join(format!("kernel_t_{}.csv", time_tag(kernel.time())));
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    kernel
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::io(&path, e))
}

/// Result of [`run_scan`].
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub prepared: Prepared,
    pub scan: ScaleScan,
    pub selection: SelectionArtifact,
    /// One report per selected time, contexts filled in.
    pub reports: Vec<AnomalyReport>,
}

/// Scan the time grid (or `--at-times`), select scales, and write every
/// artifact under `cfg.out`.
pub fn run_scan(cfg: &RunConfig) -> Result<ScanOutcome> {
    cfg.validate()?;
    let prepared = load(cfg)?;
    scan_prepared(prepared, cfg)
}

/// [`run_scan`] on an already prepared graph.
pub fn scan_prepared(prepared: Prepared, cfg: &RunConfig) -> Result<ScanOutcome> {
    cfg.validate()?;
    let times = cfg.times()?;
    let opts = ScanOptions {
        runs: cfg.runs,
        rng_seed: derive_seed(cfg.seed, "scan", 0),
        kernel: cfg.kernel_options(),
        sparsify: cfg.sparsify,
        record_concentration: true,
    };
    let result = scan(&prepared.lap, &times, &opts)?;
    let (indices, reasons): (Vec<usize>, Vec<_>) = match cfg.at_times {
        Some(_) => ((0..times.len()).collect(), vec![None; times.len()]),
        None => select_scales(&result, cfg.dip_quantile, cfg.plateau_eps, cfg.min_plateau)
            .reasons
            .into_iter()
            .map(|r| (r.index, Some(r)))
            .unzip(),
    };
    log::info!("selected {} scale(s)", indices.len());

    let graph = prepared.graph();
    let ids = graph.node_ids();
    let out = &cfg.out;
    for sub in ["partitions", "concentration", "reports"] {
        create_dir(&out.join(sub))?;
    }
    let engine = (cfg.linear_null || cfg.dump_kernel)
        .then(|| KernelEngine::new(&prepared.lap, &cfg.kernel_options()))
        .transpose()?;
    let profiles = result.concentration.as_ref().expect("recorded");
    let mut reports = Vec::new();
    let mut selected = Vec::new();
    for (&i, reason) in indices.iter().zip(reasons) {
        let partition = &result.best_partitions[i];
        let mut report = detect(&profiles[i]);
        report.contexts = Some(partition.assignment().to_vec());
        write_report(&out.join("reports"), graph, &report, &profiles[i])?;
        let literal = match &engine {
            Some(e) => {
                let kernel = e.kernel(result.times[i])?;
                if cfg.dump_kernel {
                    dump_kernel(out, &kernel)?;
                }
                cfg.linear_null.then(|| literal_stability(&kernel, partition)).transpose()?
            }
            None => None,
        };
        selected.push(SelectedScale {
            time: result.times[i],
            index: i,
            num_clusters: partition.num_contexts(),
            vi_within: result.vi_within[i],
            score: partition.score.unwrap_or(0.0),
            linear_null: literal,
            flagged: report.flagged.iter().map(|&u| ids[u].clone()).collect(),
            reason,
        });
        reports.push(report);
    }

    write_csv(
        &out.join("vi_within.csv"),
        &["t", "K", "vi"],
        (0..times.len()).map(|i| {
            vec![format!("{:?}", times[i]), result.num_clusters[i].to_string(), format!("{:?}", result.vi_within[i])]
        }),
    )?;
    let mut header = vec!["t".to_string()];
    header.extend(times.iter().map(|t| format!("{t:?}")));
    write_csv(
        &out.join("vi_cross.csv"),
        &header.iter().map(String::as_str).collect::<Vec<_>>(),
        (0..times.len()).map(|i| {
            std::iter::once(format!("{:?}", times[i]))
                .chain(result.vi_cross[i].iter().map(|x| format!("{x:?}")))
                .collect()
        }),
    )?;
    for (i, &t) in times.iter().enumerate() {
        let tag = time_tag(t);
        let p = &result.best_partitions[i];
        let mut text = String::from("id\tcontext\n");
        for u in 0..ids.len() {
            text.push_str(&format!("{}\t{}\n", ids[u], p.context_of(u)));
        }
        let path = out.join("partitions").join(format!("t_{tag}.tsv"));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        write_csv(
            &out.join("concentration").join(format!("t_{tag}.csv")),
            &["id", "concentration"],
            (0..ids.len()).map(|u| vec![ids[u].clone(), format!("{:?}", profiles[i].values[u])]),
        )?;
    }
    let selection = SelectionArtifact {
        nodes: ids.len(),
        edges: graph.edges().len(),
        sigma: prepared.sigma,
        times: times.clone(),
        runs: cfg.runs,
        plateau_eps: cfg.plateau_eps,
        min_plateau: cfg.min_plateau,
        dip_quantile: cfg.dip_quantile,
        manual: cfg.at_times.is_some(),
        selected,
    };
    write_json(&out.join("selection.json"), &selection)?;
    Ok(ScanOutcome {
        prepared,
        scan: result,
        selection,
        reports,
    })
}

/// Single-scale detection without partitions.
pub fn run_detect(cfg: &RunConfig, t: f64) -> Result<ReportArtifact> {
    cfg.validate()?;
    crate::kernel::check_time(t)?;
    let prepared = load(cfg)?;
    create_dir(&cfg.out)?;
    let engine = KernelEngine::new(&prepared.lap, &cfg.kernel_options())?;
    let profile = if cfg.dump_kernel {
        let kernel = engine.kernel(t)?;
        dump_kernel(&cfg.out, &kernel)?;
        crate::anomaly::concentration_profile(&kernel)
    } else {
        ConcentrationProfile::new(t, engine.concentrations(t)?)
    };
    write_report(&cfg.out, prepared.graph(), &detect(&profile), &profile)
}

/// Generate a synthetic network, detect at the grid time with the best
/// ROC-AUC, and write the network, labels and `metrics.json`.
pub fn run_bench(cfg: &RunConfig) -> Result<BenchMetrics> {
    cfg.validate()?;
    let mut synth = cfg.synthetic.clone();
    synth.rng_seed = derive_seed(cfg.seed, "bench", 0);
    let net = generate_synthetic(&synth)?;
    create_dir(&cfg.out)?;
    write_attributed_graph(&net.graph, &cfg.out.join("nodes.tsv"), &cfg.out.join("edges.tsv"))?;
    let ids = net.graph.node_ids();
    write_csv(
        &cfg.out.join("labels.tsv"),
        &["id", "label"],
        (0..ids.len()).map(|u| vec![ids[u].clone(), u8::from(net.labels[u]).to_string()]),
    )?;
    let labels = net.labels.clone();
    let communities = net.truth.num_contexts();
    let prepared = prepare_graph(net.graph, cfg)?;
    let times = cfg.times()?;
    let engine = KernelEngine::new(&prepared.lap, &cfg.kernel_options())?;
    let mut best: Option<(f64, ConcentrationProfile)> = None;
    let mut roc_by_time = Vec::with_capacity(times.len());
    for &t in &times {
        let profile = ConcentrationProfile::new(t, engine.concentrations(t)?);
        let auc = roc_auc(&profile.values, &labels)?;
        roc_by_time.push([t, auc]);
        if best.as_ref().is_none_or(|(b, _)| auc > *b) {
            best = Some((auc, profile));
        }
    }
    let (_, profile) = best.expect("nonempty grid");
    let report = detect(&profile);
    let detector = evaluate(&profile.values, &labels, &report.flagged)?;
    let random_scores = random_baseline(labels.len(), derive_seed(cfg.seed, "bench-random", 0));
    let (_, random_flagged) = crate::anomaly::threshold_rule(&random_scores);
    let random = evaluate(&random_scores, &labels, &random_flagged)?;
    let metrics = BenchMetrics {
        nodes: labels.len(),
        edges: prepared.graph().edges().len(),
        communities,
        anomalies: labels.iter().filter(|&&l| l).count(),
        sigma: prepared.sigma,
        best_time: profile.time,
        detector,
        random,
        roc_by_time,
    };
    write_json(&cfg.out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

/// `id value` rows after a header line.
fn read_keyed(path: &Path) -> Result<Vec<(usize, String, String)>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (line, fields) in rows(&text).skip(1) {
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        out.push((line, fields[0].to_string(), fields[1].to_string()));
    }
    Ok(out)
}

/// Metrics for externally produced scores. Both files are `id value` TSVs
/// with a header row; labels are 0 or 1.
pub fn run_eval(scores_path: &Path, labels_path: &Path, out: &Path) -> Result<EvalMetrics> {
    let perr = |path: &Path, line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut scores: Vec<(String, f64)> = Vec::new();
    for (line, id, v) in read_keyed(scores_path)? {
        let x: f64 = v.parse().map_err(|_| perr(scores_path, line, format!("bad score `{v}`")))?;
        scores.push((id, x));
    }
    let mut labels: HashMap<String, bool> = HashMap::new();
    for (line, id, v) in read_keyed(labels_path)? {
        let l = match v.as_str() {
            "0" => false,
            "1" => true,
            _ => return Err(perr(labels_path, line, format!("label must be 0 or 1, got `{v}`"))),
        };
        if labels.insert(id.clone(), l).is_some() {
            return Err(perr(labels_path, line, format!("duplicate id `{id}`")));
        }
    }
    if labels.len() != scores.len() {
        return Err(Error::Reference(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    let mut y = Vec::with_capacity(scores.len());
    for (id, _) in &scores {
        y.push(*labels.get(id).ok_or_else(|| Error::Reference(format!("no label for id `{id}`")))?);
    }
    let s: Vec<f64> = scores.iter().map(|(_, x)| *x).collect();
    let (threshold, flagged) = crate::anomaly::threshold_rule(&s);
    let metrics = EvalMetrics {
        nodes: s.len(),
        positives: y.iter().filter(|&&l| l).count(),
        threshold,
        metrics: evaluate(&s, &y, &flagged)?,
    };
    create_dir(out)?;
    write_json(&out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

/// Read an `id context` TSV (header row) into a partition of `graph`.
pub fn read_partition(path: &Path, graph: &AttributedGraph) -> Result<Partition> {
    let mut labels: Vec<Option<String>> = vec![None; graph.node_count()];
    for (line, id, ctx) in read_keyed(path)? {
        let u = graph.index_of(&id).ok_or_else(|| Error::UnknownNode(id.clone()))?;
        if labels[u].replace(ctx).is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("node `{id}` listed twice"),
            });
        }
    }
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut raw = Vec::with_capacity(labels.len());
    for (u, l) in labels.into_iter().enumerate() {
        let l = l.ok_or_else(|| Error::Reference(format!("node `{}` has no context", graph.node_ids()[u])))?;
        let next = names.len();
        raw.push(*names.entry(l).or_insert(next));
    }
    Ok(Partition::new(&raw))
}

/// Stability of a given partition at time `t`.
pub fn run_score_partition(cfg: &RunConfig, partition_path: &Path, t: f64) -> Result<PartitionScore> {
    cfg.validate()?;
    crate::kernel::check_time(t)?;
    let prepared = load(cfg)?;
    let partition = read_partition(partition_path, prepared.graph())?;
    let kernel = KernelEngine::new(&prepared.lap, &cfg.kernel_options())?.kernel(t)?;
    let q = quality_matrix(&kernel);
    let result = PartitionScore {
        time: t,
        contexts: partition.num_contexts(),
        sizes: partition.sizes(),
        score: stability_score(&q, &partition)?,
        linear_null: cfg.linear_null.then(|| literal_stability(&kernel, &partition)).transpose()?,
    };
    create_dir(&cfg.out)?;
    if cfg.dump_kernel {
        dump_kernel(&cfg.out, &kernel)?;
    }
    write_json(&cfg.out.join("partition_score.json"), &result)?;
    Ok(result)
}

/// Files a command wrote, relative to its output directory.
pub fn list_outputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let path = entry.map_err(|e| Error::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).expect("under dir").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}
