//! Serialized outputs. The JSON layouts are mirrored by the schemas in
//! `docs/schemas/`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::bench::EvalResult;
use crate::scales::SelectionReason;
use crate::{Error, Result};

/// File-name form of a time: six significant decimals in scientific notation.
pub fn time_tag(t: f64) -> String {
    format!("{t:.6e}")
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let sep = if path.extension().is_some_and(|e| e == "tsv") { "\t" } else { "," };
    let mut text = header.join(sep);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(sep));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeScore {
    pub id: String,
    pub score: f64,
    pub rank: usize,
    pub flagged: bool,
    pub context: Option<usize>,
}

/// `report_t_<time>.json`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportArtifact {
    pub time: f64,
    pub threshold: f64,
    pub mean: f64,
    pub std: f64,
    pub flagged: Vec<String>,
    pub nodes: Vec<NodeScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedScale {
    pub time: f64,
    pub index: usize,
    pub num_clusters: usize,
    pub vi_within: f64,
    pub score: f64,
    pub linear_null: Option<f64>,
    pub flagged: Vec<String>,
    /// Absent for times given explicitly.
    pub reason: Option<SelectionReason>,
}

/// `selection.json`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionArtifact {
    pub nodes: usize,
    pub edges: usize,
    pub sigma: Option<f64>,
    pub times: Vec<f64>,
    pub runs: usize,
    pub plateau_eps: f64,
    pub min_plateau: usize,
    pub dip_quantile: f64,
    /// Whether the times came from `--at-times`.
    pub manual: bool,
    pub selected: Vec<SelectedScale>,
}

/// `metrics.json` from `bench`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchMetrics {
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    pub anomalies: usize,
    pub sigma: Option<f64>,
    pub best_time: f64,
    pub detector: EvalResult,
    pub random: EvalResult,
    /// `[t, roc_auc]` over the grid.
    pub roc_by_time: Vec<[f64; 2]>,
}

/// `metrics.json` from `eval`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub nodes: usize,
    pub positives: usize,
    pub threshold: f64,
    pub metrics: EvalResult,
}

/// `partition_score.json`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionScore {
    pub time: f64,
    pub contexts: usize,
    pub sizes: Vec<usize>,
    pub score: f64,
    pub linear_null: Option<f64>,
}
