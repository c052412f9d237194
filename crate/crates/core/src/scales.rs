//! Partition comparison and multiscale scanning.
//!
//! Partitions are compared with the variation of information normalised by
//! `ln N`, which keeps values in `[0, 1]` regardless of the number of
//! contexts. A scan records, for every time on a grid, the best partition,
//! the mean VI across the Louvain ensemble (low where the optimum is robust),
//! and the VI between best partitions of every pair of times (low across a
//! range where the partition persists). [`select_scales`] turns those curves
//! into a list of representative times.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::anomaly::{concentration_profile, ConcentrationProfile};
use crate::graph::{pair_from_index, LaplacianMatrix};
use crate::kernel::{with_workers, KernelEngine, KernelOptions};
use crate::seed::rng_for;
use crate::stability::{best_partition_from_quality, quality_matrix, Partition};
use crate::{Error, Result};

pub const DEFAULT_T_MIN: f64 = 1e-2;
pub const DEFAULT_T_MAX: f64 = 1e3;
pub const DEFAULT_T_COUNT: usize = 100;
pub const DEFAULT_PLATEAU_EPS: f64 = 0.05;
pub const DEFAULT_MIN_PLATEAU: usize = 3;
pub const DEFAULT_DIP_QUANTILE: f64 = 0.25;
/// Ensemble pairs beyond this count are subsampled for VI(t).
pub const MAX_VI_PAIRS: usize = 1000;

/// `count` logarithmically spaced times on `[min, max]`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || count == 0 {
        return Err(Error::Parameter(format!(
            "time grid needs 0 < min <= max and count >= 1, got [{min}, {max}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => min,
            _ if i == count - 1 => max,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

/// Joint context counts as sorted `(c1, c2, n)` triples.
fn contingency(p1: &Partition, p2: &Partition) -> Result<Vec<(usize, usize, usize)>> {
    if p1.len() != p2.len() {
        return Err(Error::Shape {
            expected: p1.len(),
            got: p2.len(),
        });
    }
    let mut pairs: Vec<(usize, usize)> = p1.assignment().iter().copied().zip(p2.assignment().iter().copied()).collect();
    pairs.sort_unstable();
    let mut table: Vec<(usize, usize, usize)> = Vec::new();
    for (a, b) in pairs {
        match table.last_mut() {
            Some(last) if last.0 == a && last.1 == b => last.2 += 1,
            _ => table.push((a, b, 1)),
        }
    }
    Ok(table)
}

fn conditional_from_table(table: &[(usize, usize, usize)], given: &[usize], n: usize, second: bool) -> f64 {
    let nf = n as f64;
    table
        .iter()
        .map(|&(a, b, c)| {
            let g = given[if second { b } else { a }] as f64;
            let c = c as f64;
            -(c / nf) * (c / g).ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// `H(P1 | P2)` in nats under the uniform node distribution.
pub fn conditional_entropy(p1: &Partition, p2: &Partition) -> Result<f64> {
    let table = contingency(p1, p2)?;
    Ok(conditional_from_table(&table, &p2.sizes(), p1.len(), true))
}

/// `(H(P1|P2) + H(P2|P1)) / ln N`.
pub fn variation_of_information(p1: &Partition, p2: &Partition) -> Result<f64> {
    let table = contingency(p1, p2)?;
    let n = p1.len();
    if n < 2 {
        return Err(Error::Size(format!("variation of information needs N >= 2, got {n}")));
    }
    let h12 = conditional_from_table(&table, &p2.sizes(), n, true);
    let h21 = conditional_from_table(&table, &p1.sizes(), n, false);
    Ok(((h12 + h21) / (n as f64).ln()).clamp(0.0, 1.0))
}

/// Mean pairwise VI over an ensemble, on at most [`MAX_VI_PAIRS`] seeded pairs.
pub fn ensemble_vi(ensemble: &[Partition], rng_seed: u64, index: u64) -> Result<f64> {
    let r = ensemble.len();
    if r < 2 {
        return Ok(0.0);
    }
    let total = r * (r - 1) / 2;
    let picks: Vec<usize> = if total <= MAX_VI_PAIRS {
        (0..total).collect()
    } else {
        let mut v = sample(&mut rng_for(rng_seed, "vi-pairs", index), total, MAX_VI_PAIRS).into_vec();
        v.sort_unstable();
        v
    };
    let vis = picks
        .par_iter()
        .map(|&k| {
            let (a, b) = pair_from_index(k, r);
            variation_of_information(&ensemble[a], &ensemble[b])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vis.iter().sum::<f64>() / vis.len() as f64)
}

/// Curves over a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleScan {
    pub times: Vec<f64>,
    pub best_partitions: Vec<Partition>,
    pub num_clusters: Vec<usize>,
    /// Mean pairwise VI within each time's Louvain ensemble.
    pub vi_within: Vec<f64>,
    /// VI between best partitions, `T × T`.
    pub vi_cross: Vec<Vec<f64>>,
    #[serde(skip)]
    pub concentration: Option<Vec<ConcentrationProfile>>,
}

/// Settings for [`scan`].
#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub runs: usize,
    pub rng_seed: u64,
    pub kernel: KernelOptions,
    /// Kernel entries below this are dropped before optimisation; 0 keeps all.
    pub sparsify: f64,
    pub record_concentration: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            runs: 100,
            rng_seed: 0,
            kernel: KernelOptions::default(),
            sparsify: 0.0,
            record_concentration: true,
        }
    }
}

/// Best partitions, ensemble VI and cross-time VI over an ascending grid.
pub fn scan(lap: &LaplacianMatrix, times: &[f64], opts: &ScanOptions) -> Result<ScaleScan> {
    if times.is_empty() || times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Parameter("scan times must be positive and ascending".into()));
    }
    let engine = KernelEngine::new(lap, &opts.kernel)?;
    let mut best_partitions = Vec::with_capacity(times.len());
    let mut vi_within = Vec::with_capacity(times.len());
    let mut profiles = Vec::new();
    for &t in times {
        let kernel = engine.kernel(t).inspect_err(|e| log::error!("kernel failed at t={t}: {e}"))?;
        if opts.record_concentration {
            profiles.push(concentration_profile(&kernel));
        }
        let mut q = quality_matrix(&kernel);
        drop(kernel);
        q.sparsify(opts.sparsify);
        let best = best_partition_from_quality(&q, lap, opts.runs, opts.rng_seed, opts.kernel.workers)?;
        let vi = with_workers(opts.kernel.workers, || ensemble_vi(&best.ensemble, opts.rng_seed, t.to_bits()))?;
        log::info!("t={t:.4e}: K={} VI={vi:.4}", best.best.num_contexts());
        best_partitions.push(best.best);
        vi_within.push(vi);
    }
    let vi_cross = cross_vi(&best_partitions, opts.kernel.workers)?;
    Ok(ScaleScan {
        times: times.to_vec(),
        num_clusters: best_partitions.iter().map(Partition::num_contexts).collect(),
        best_partitions,
        vi_within,
        vi_cross,
        concentration: opts.record_concentration.then_some(profiles),
    })
}

fn cross_vi(parts: &[Partition], workers: usize) -> Result<Vec<Vec<f64>>> {
    let t = parts.len();
    let upper = with_workers(workers, || {
        (0..t * t)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / t, k % t);
                if j > i {
                    variation_of_information(&parts[i], &parts[j])
                } else {
                    Ok(0.0)
                }
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..t)
        .map(|i| (0..t).map(|j| upper[i.min(j) * t + i.max(j)]).collect())
        .collect())
}

/// Why a time was selected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReason {
    pub time: f64,
    /// Index into the scan grid.
    pub index: usize,
    pub num_clusters: usize,
    pub vi_within: f64,
    /// The quantile of VI(t) over the grid that the dip had to reach.
    pub dip_threshold: f64,
    pub plateau_start: f64,
    pub plateau_end: f64,
    /// Distinct grid times covered by the plateau (after merging).
    pub plateau_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSelection {
    pub selected_times: Vec<f64>,
    pub reasons: Vec<SelectionReason>,
}

/// Linear-interpolation quantile of `values`, `q ∈ [0,1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Representative times of persistent, robust partitions.
///
/// Plateaus are taken greedily left to right as maximal runs of distinct
/// grid times whose pairwise cross-time VI is below `plateau_eps`; runs
/// shorter than `min_plateau` are discarded. Each plateau contributes its
/// minimum-VI(t) time if that VI(t) does not exceed the `dip_quantile`
/// quantile of VI(t) over the grid. Plateaus whose representatives share
/// the same partition are merged.
pub fn select_scales(scan: &ScaleScan, dip_quantile: f64, plateau_eps: f64, min_plateau: usize) -> ScaleSelection {
    // distinct grid points, first occurrence
    let mut idx: Vec<usize> = Vec::new();
    for (i, &t) in scan.times.iter().enumerate() {
        if idx.last().is_none_or(|&j| scan.times[j] != t) {
            idx.push(i);
        }
    }
    let empty = ScaleSelection {
        selected_times: vec![],
        reasons: vec![],
    };
    if idx.is_empty() {
        return empty;
    }
    let within: Vec<f64> = idx.iter().map(|&i| scan.vi_within[i]).collect();
    let dip = quantile(&within, dip_quantile);
    let min_len = min_plateau.max(1);

    struct Block {
        start: usize,
        end: usize,
        rep: usize,
        len: usize,
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut a = 0;
    while a < idx.len() {
        let mut b = a;
        while b + 1 < idx.len() && (a..=b).all(|k| scan.vi_cross[idx[k]][idx[b + 1]] < plateau_eps) {
            b += 1;
        }
        if b + 1 - a >= min_len {
            let rep = (a..=b).fold(a, |m, k| if within[k] < within[m] { k } else { m });
            if within[rep] <= dip {
                let merged = blocks
                    .iter_mut()
                    .find(|blk| scan.best_partitions[idx[blk.rep]] == scan.best_partitions[idx[rep]]
                        || scan.best_partitions[idx[blk.rep]].assignment() == scan.best_partitions[idx[rep]].assignment());
                match merged {
                    Some(blk) => {
                        blk.end = b;
                        blk.len += b + 1 - a;
                        if within[rep] < within[blk.rep] {
                            blk.rep = rep;
                        }
                    }
                    None => blocks.push(Block {
                        start: a,
                        end: b,
                        rep,
                        len: b + 1 - a,
                    }),
                }
            }
            a = b + 1;
        } else {
            a += 1;
        }
    }
    blocks.sort_by_key(|b| b.rep);
    let reasons: Vec<SelectionReason> = blocks
        .iter()
        .map(|b| {
            let i = idx[b.rep];
            SelectionReason {
                time: scan.times[i],
                index: i,
                num_clusters: scan.num_clusters[i],
                vi_within: within[b.rep],
                dip_threshold: dip,
                plateau_start: scan.times[idx[b.start]],
                plateau_end: scan.times[idx[b.end]],
                plateau_length: b.len,
            }
        })
        .collect();
    ScaleSelection {
        selected_times: reasons.iter().map(|r| r.time).collect(),
        reasons,
    }
}
