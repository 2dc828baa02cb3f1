//! Experiment orchestration: synthetic sweeps, case studies and their output files.

mod case_study;
mod output;
mod sweep;

pub use case_study::{case_study_from_dataset, run_case_study, CaseStudyConfig, CaseStudyResult, TableRow};
pub use output::{emit_plot_data, summarize, write_manifest, write_sweep_outputs, PlotRow, SummaryRow};
pub use sweep::{run_sweep_cell, run_synthetic_sweep, ExperimentConfig, Failure, SweepResult};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::{fit_em_multistart, fit_ind, fit_multimnl, EmOptions, FittedModel, Observation};
use crate::metrics::MetricReport;

/// Model families compared by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Markov,
    Ind,
    Multi,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Markov => "markov",
            ModelKind::Ind => "ind",
            ModelKind::Multi => "multi",
        }
    }

    pub fn all() -> Vec<ModelKind> {
        vec![ModelKind::Markov, ModelKind::Ind, ModelKind::Multi]
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markov" => Ok(ModelKind::Markov),
            "ind" => Ok(ModelKind::Ind),
            "multi" => Ok(ModelKind::Multi),
            other => Err(crate::error::Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

/// Fitted model plus EM diagnostics when applicable.
#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub model: FittedModel,
    pub ll_trace: Vec<f64>,
    pub converged: bool,
}

/// Fits one model family; `seed` only matters for EM restarts.
pub fn fit_model(
    kind: ModelKind,
    train: &[Observation],
    n_a: usize,
    n_b: usize,
    em: &EmOptions,
    starts: usize,
    seed: u64,
) -> Result<Fit> {
    Ok(match kind {
        ModelKind::Markov => {
            let r = fit_em_multistart(train, n_a, n_b, em, starts, seed)?;
            Fit {
                model: FittedModel::Markov(r.params),
                ll_trace: r.ll_trace,
                converged: r.converged,
            }
        }
        ModelKind::Ind => Fit {
            model: fit_ind(train, n_a, n_b, em.cap)?,
            ll_trace: Vec::new(),
            converged: true,
        },
        ModelKind::Multi => Fit {
            model: fit_multimnl(train, n_a, n_b, em.cap)?,
            ll_trace: Vec::new(),
            converged: true,
        },
    })
}

/// One observation in a long-format result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub theta: f64,
    pub replication: usize,
    pub model: String,
    pub metric: String,
    pub value: f64,
}

/// Metric name/value pairs of a test-set report.
pub fn report_metrics(report: &MetricReport) -> Vec<(String, f64)> {
    let mut out = vec![
        ("test_ll".to_string(), report.ll_b),
        ("test_avg_ll".to_string(), report.avg_ll_b),
        ("rank_acc".to_string(), report.rank_acc),
    ];
    for &(k, h) in &report.top_k_hit {
        out.push((format!("top{k}_hit"), h));
    }
    if let Some(e) = report.ehr {
        out.push(("ehr".to_string(), e));
    }
    out
}
