use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{write_jsonl, EmOptions, FittedModel};
use crate::harness::output::write_csv;
use crate::harness::sweep::Failure;
use crate::harness::{fit_model, write_manifest, ModelKind};
use crate::metrics::{cm_score, evaluate_model, scs, CoCount, MetricReport};
use crate::pipeline::{build_dataset, read_raw_csv, train_test_split, Dataset, PipelineOptions};

/// Settings of a case study on raw transaction data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseStudyConfig {
    /// CSV with `week,customer_id,category,product_id,quantity` rows.
    pub transactions: PathBuf,
    #[serde(flatten)]
    pub pipeline: PipelineOptions,
    #[serde(default = "default_ratio")]
    pub train_ratio: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "ModelKind::all")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_top_k")]
    pub top_k: Vec<usize>,
    #[serde(default)]
    pub em: EmOptions,
    #[serde(default = "default_starts")]
    pub em_starts: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_ratio() -> f64 {
    0.7
}

fn default_top_k() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_starts() -> usize {
    1
}

impl CaseStudyConfig {
    pub fn new(transactions: impl Into<PathBuf>, category_a: &str, category_b: &str) -> Self {
        CaseStudyConfig {
            transactions: transactions.into(),
            pipeline: PipelineOptions {
                category_a: category_a.into(),
                category_b: category_b.into(),
                threshold: 0.10,
            },
            train_ratio: default_ratio(),
            seed: 0,
            models: ModelKind::all(),
            top_k: default_top_k(),
            em: EmOptions::default(),
            em_starts: default_starts(),
            out_dir: None,
        }
    }
}

/// One cell of the model comparison table; `None` marks an undefined metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model: String,
    pub metric: String,
    pub value: Option<f64>,
    pub delta_vs_ind: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseStudyResult {
    pub products_a: Vec<String>,
    pub products_b: Vec<String>,
    pub train_size: usize,
    pub test_size: usize,
    pub cm: Option<f64>,
    pub fits: Vec<FittedModel>,
    pub reports: Vec<MetricReport>,
    pub table: Vec<TableRow>,
    /// Specific complementarity scores of the fitted attraction rows.
    pub scs: Option<Vec<Vec<f64>>>,
    pub failures: Vec<Failure>,
}

fn table_rows(model: &str, train_ll: f64, report: &MetricReport) -> Vec<TableRow> {
    let mut rows = vec![
        ("train_ll".to_string(), Some(train_ll)),
        ("test_ll".to_string(), Some(report.ll_b)),
        ("test_avg_ll".to_string(), Some(report.avg_ll_b)),
        ("rank_acc".to_string(), Some(report.rank_acc)),
    ];
    rows.extend(report.top_k_hit.iter().map(|&(k, h)| (format!("top{k}_hit"), Some(h))));
    rows.push(("ehr".to_string(), report.ehr));
    rows.into_iter()
        .map(|(metric, value)| TableRow {
            model: model.to_string(),
            metric,
            value,
            delta_vs_ind: None,
        })
        .collect()
}

fn fill_deltas(table: &mut [TableRow]) {
    let base: Vec<(String, Option<f64>)> = table
        .iter()
        .filter(|r| r.model == "ind")
        .map(|r| (r.metric.clone(), r.value))
        .collect();
    for row in table.iter_mut().filter(|r| r.model != "ind") {
        let b = base.iter().find(|(m, _)| *m == row.metric).and_then(|(_, v)| *v);
        row.delta_vs_ind = match (row.value, b) {
            (Some(v), Some(b)) if row.metric.ends_with("_ll") || row.metric == "rank_acc" => Some((v - b) / b.abs()),
            (Some(v), Some(b)) => Some(v - b),
            _ => None,
        };
    }
}

/// Splits, fits and scores a preprocessed dataset.
pub fn case_study_from_dataset(data: &Dataset, config: &CaseStudyConfig) -> Result<CaseStudyResult> {
    if !(config.train_ratio > 0.0 && config.train_ratio < 1.0) {
        return Err(Error::Config("train_ratio must lie strictly between 0 and 1".into()));
    }
    if data.observations.is_empty() {
        return Err(Error::Data("no observations survive preprocessing".into()));
    }
    let (n_a, n_b) = (data.n_a(), data.n_b());
    let (train, test) = train_test_split(&data.observations, config.train_ratio, config.seed)?;
    let mut result = CaseStudyResult {
        products_a: data.products_a.clone(),
        products_b: data.products_b.clone(),
        train_size: train.len(),
        test_size: test.len(),
        cm: cm_score(&CoCount::from_observations(&data.observations, n_a, n_b)?).ok(),
        fits: Vec::new(),
        reports: Vec::new(),
        table: Vec::new(),
        scs: None,
        failures: Vec::new(),
    };
    for &kind in &config.models {
        let outcome = fit_model(kind, &train, n_a, n_b, &config.em, config.em_starts, config.seed).and_then(|fit| {
            let train_ll = fit.model.loglik_b(&train)?;
            let report = evaluate_model(&fit.model, &test, &config.top_k)?;
            Ok((fit.model, train_ll, report))
        });
        match outcome {
            Ok((model, train_ll, report)) => {
                if let FittedModel::Markov(p) = &model {
                    result.scs = Some(scs(p));
                }
                result.table.extend(table_rows(kind.label(), train_ll, &report));
                result.fits.push(model);
                result.reports.push(report);
            }
            Err(e) => {
                warn!("case study model {}: {e}", kind.label());
                result.failures.push(Failure {
                    theta: f64::NAN,
                    replication: 0,
                    model: kind.label().to_string(),
                    error: e.to_string(),
                });
            }
        }
    }
    fill_deltas(&mut result.table);
    Ok(result)
}

/// Reads the transaction CSV, preprocesses it and runs [`case_study_from_dataset`].
pub fn run_case_study(config: &CaseStudyConfig) -> Result<(Dataset, CaseStudyResult)> {
    let raw = read_raw_csv(&config.transactions)?;
    let data = build_dataset(&raw, &config.pipeline)?;
    let result = case_study_from_dataset(&data, config)?;
    if let Some(dir) = &config.out_dir {
        write_case_study(dir, config, &data, &result)?;
    }
    Ok((data, result))
}

fn write_case_study(dir: &Path, config: &CaseStudyConfig, data: &Dataset, result: &CaseStudyResult) -> Result<()> {
    for sub in ["raw", "tables"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    write_jsonl(&dir.join("raw/observations.jsonl"), &data.observations)?;
    fs::write(dir.join("raw/fits.json"), serde_json::to_string_pretty(&result.fits)?)?;
    write_csv(&dir.join("tables/comparison.csv"), &result.table)?;
    #[derive(Serialize)]
    struct CmRow<'a> {
        category_a: &'a str,
        category_b: &'a str,
        cm: Option<f64>,
    }
    write_csv(
        &dir.join("tables/cm.csv"),
        &[CmRow {
            category_a: &config.pipeline.category_a,
            category_b: &config.pipeline.category_b,
            cm: result.cm,
        }],
    )?;
    if let Some(m) = &result.scs {
        let mut w = csv::Writer::from_path(dir.join("tables/scs.csv"))?;
        let header: Vec<String> = std::iter::once("a\\b".to_string())
            .chain(std::iter::once("0".to_string()))
            .chain(data.products_b.iter().cloned())
            .collect();
        w.write_record(&header)?;
        let labels = std::iter::once("0".to_string()).chain(data.products_a.iter().cloned());
        for (label, row) in labels.zip(m) {
            w.write_record(std::iter::once(label).chain(row.iter().map(|x| x.to_string())))?;
        }
        w.flush()?;
    }
    write_manifest(dir, "case-study", config)
}
