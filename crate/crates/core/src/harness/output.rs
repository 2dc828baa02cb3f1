use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::sweep::{ExperimentConfig, SweepResult};
use crate::harness::Record;

/// Mean and standard error of one metric across replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub theta: f64,
    pub model: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    /// Relative change for likelihood, rank and revenue metrics, absolute otherwise.
    pub delta_vs_ind: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub theta: f64,
    pub model: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
}

fn is_relative(metric: &str) -> bool {
    metric.ends_with("_ll") || metric == "rank_acc" || metric.starts_with("revenue")
}

/// Groups records by (theta, model, metric).
pub fn summarize(records: &[Record]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(u64, &str, &str), Vec<f64>> = BTreeMap::new();
    for r in records {
        // Non-negative floats order like their bit patterns.
        groups
            .entry((r.theta.to_bits(), r.model.as_str(), r.metric.as_str()))
            .or_default()
            .push(r.value);
    }
    let stats: BTreeMap<(u64, &str, &str), (f64, f64, usize)> = groups
        .into_iter()
        .map(|(k, v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            (k, (mean, stderr, n))
        })
        .collect();
    stats
        .iter()
        .map(|(&(bits, model, metric), &(mean, stderr, n))| {
            let delta_vs_ind = (model != "ind")
                .then(|| stats.get(&(bits, "ind", metric)))
                .flatten()
                .map(|&(base, _, _)| {
                    if is_relative(metric) {
                        (mean - base) / base.abs()
                    } else {
                        mean - base
                    }
                });
            SummaryRow {
                theta: f64::from_bits(bits),
                model: model.to_string(),
                metric: metric.to_string(),
                mean,
                stderr,
                n,
                delta_vs_ind,
            }
        })
        .collect()
}

/// Long-format series for plotting.
pub fn emit_plot_data(summary: &[SummaryRow]) -> Vec<PlotRow> {
    summary
        .iter()
        .map(|s| PlotRow {
            theta: s.theta,
            model: s.model.clone(),
            metric: s.metric.clone(),
            mean: s.mean,
            stderr: s.stderr,
        })
        .collect()
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn version() -> String {
    let git = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match git {
        Some(g) => format!("{}+{g}", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Writes `manifest.json` with the configuration and a version string.
pub fn write_manifest<C: Serialize>(out_dir: &Path, kind: &str, config: &C) -> Result<()> {
    let manifest = serde_json::json!({
        "kind": kind,
        "version": version(),
        "config": config,
    });
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// `raw/records.csv`, `raw/failures.json`, `tables/summary.csv`, `plots/series.csv` and the manifest.
pub fn write_sweep_outputs(result: &SweepResult, config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    for sub in ["raw", "tables", "plots"] {
        fs::create_dir_all(out_dir.join(sub))?;
    }
    write_csv(&out_dir.join("raw/records.csv"), &result.records)?;
    fs::write(out_dir.join("raw/failures.json"), serde_json::to_string_pretty(&result.failures)?)?;
    write_csv(&out_dir.join("tables/summary.csv"), &result.summary)?;
    write_csv(&out_dir.join("plots/series.csv"), &emit_plot_data(&result.summary))?;
    write_manifest(out_dir, "sweep", config)
}
