use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::EmOptions;
use crate::harness::output::{summarize, SummaryRow};
use crate::harness::{fit_model, report_metrics, ModelKind, Record};
use crate::metrics::{cm_score, evaluate_model, CoCount};
use crate::optimize::optimize_two_category;
use crate::pipeline::train_test_split;
use crate::sampling::{child_rng, derive_seed};
use crate::synth::{gen_ground_truth, gen_prices, simulate_dataset, GroundTruthSpec, PriceDist, PriceRegime, PriceScenario};

/// Settings of a synthetic sweep over complementarity strengths.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub thetas: Vec<f64>,
    pub replications: usize,
    pub transactions: usize,
    pub models: Vec<ModelKind>,
    pub price_scenarios: Vec<PriceScenario>,
    /// Independent price vectors per scenario and replication.
    pub price_draws: usize,
    pub master_seed: u64,
    pub out_dir: Option<PathBuf>,
    pub train_ratio: f64,
    pub top_k: Vec<usize>,
    /// Sizes and deletion probability; its `theta` is replaced by each sweep value.
    pub ground_truth: GroundTruthSpec,
    pub em: EmOptions,
    pub em_starts: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scenarios = [PriceRegime::Low, PriceRegime::High]
            .into_iter()
            .flat_map(|r| [PriceDist::Normal, PriceDist::Uniform].map(|d| PriceScenario::new(r, d)))
            .collect();
        ExperimentConfig {
            thetas: (0..=10).map(f64::from).collect(),
            replications: 10,
            transactions: 12_000,
            models: ModelKind::all(),
            price_scenarios: scenarios,
            price_draws: 50,
            master_seed: 0,
            out_dir: None,
            train_ratio: 0.7,
            top_k: vec![1, 2, 3],
            ground_truth: GroundTruthSpec::default(),
            em: EmOptions::default(),
            em_starts: 1,
            jobs: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.thetas.is_empty() || self.thetas.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("thetas must be a non-empty list of values >= 0");
        }
        if self.models.is_empty() {
            return bad("at least one model is required");
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return bad("train_ratio must lie strictly between 0 and 1");
        }
        if !self.price_scenarios.is_empty() && self.price_draws == 0 {
            return bad("price_draws must be positive when price scenarios are given");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive");
        }
        Ok(())
    }
}

/// A model that could not be fitted or evaluated in one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub theta: f64,
    pub replication: usize,
    pub model: String,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub records: Vec<Record>,
    pub failures: Vec<Failure>,
    pub summary: Vec<SummaryRow>,
}

/// Runs one (theta, replication) cell.
///
/// The ground truth depends on the replication only, so cells sharing a
/// replication differ in `theta` alone.
pub fn run_sweep_cell(config: &ExperimentConfig, theta_index: usize, replication: usize) -> Result<(Vec<Record>, Vec<Failure>)> {
    let theta = config.thetas[theta_index];
    let seed = config.master_seed;
    let (ti, r) = (theta_index as u64, replication as u64);
    let spec = GroundTruthSpec {
        theta,
        ..config.ground_truth.clone()
    };
    let gt = gen_ground_truth(&spec, &mut child_rng(seed, "gt", &[r]))?;
    let data = simulate_dataset(&gt, config.transactions, &mut child_rng(seed, "data", &[ti, r]));
    let (n_a, n_b) = (spec.n_a, spec.n_b);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut push = |model: &str, metric: String, value: f64| {
        records.push(Record {
            theta,
            replication,
            model: model.to_string(),
            metric,
            value,
        })
    };
    if !data.is_empty() {
        push("data", "cm".into(), cm_score(&CoCount::from_observations(&data, n_a, n_b)?)?);
    }
    let (train, test) = train_test_split(&data, config.train_ratio, derive_seed(seed, "split", &[ti, r]))?;
    for &kind in &config.models {
        let label = kind.label();
        let outcome = (|| -> Result<Vec<(String, f64)>> {
            let fit = fit_model(kind, &train, n_a, n_b, &config.em, config.em_starts, derive_seed(seed, "em", &[ti, r]))?;
            let mut metrics = vec![("train_ll".to_string(), fit.model.loglik_b(&train)?)];
            metrics.extend(report_metrics(&evaluate_model(&fit.model, &test, &config.top_k)?));
            if kind == ModelKind::Markov {
                metrics.push(("em_iterations".into(), fit.ll_trace.len().saturating_sub(1) as f64));
                metrics.push(("em_converged".into(), f64::from(u8::from(fit.converged))));
            }
            if kind != ModelKind::Multi && !config.price_scenarios.is_empty() {
                let cc = fit.model.to_cross_cat()?;
                let a = cc.node_index("A")?;
                for (si, scenario) in config.price_scenarios.iter().enumerate() {
                    let mut total = 0.0;
                    for d in 0..config.price_draws {
                        let idx = [r, si as u64, d as u64];
                        let pa = gen_prices(scenario, n_a, &mut child_rng(seed, "prices-a", &idx))?;
                        let pb = gen_prices(scenario, n_b, &mut child_rng(seed, "prices-b", &idx))?;
                        let sol = optimize_two_category(&cc, &pa, &pb)?;
                        total += gt.expected_revenue(&pa, &pb, &sol.sets[a], &sol.sets[1 - a])?;
                    }
                    metrics.push((format!("revenue:{}", scenario.label()), total / config.price_draws as f64));
                }
            }
            Ok(metrics)
        })();
        match outcome {
            Ok(metrics) => metrics.into_iter().for_each(|(m, v)| push(label, m, v)),
            Err(e) => {
                warn!("theta {theta} replication {replication} model {label}: {e}");
                failures.push(Failure {
                    theta,
                    replication,
                    model: label.to_string(),
                    error: e.to_string(),
                });
            }
        }
    }
    Ok((records, failures))
}

/// Every (theta, replication) cell, run in parallel; per-model failures are recorded, not fatal.
pub fn run_synthetic_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = (0..config.thetas.len())
        .flat_map(|t| (0..config.replications).map(move |r| (t, r)))
        .collect();
    let run = || -> Vec<Result<(Vec<Record>, Vec<Failure>)>> {
        cells
            .par_iter()
            .map(|&(t, r)| {
                info!("cell theta={} replication={r}", config.thetas[t]);
                run_sweep_cell(config, t, r)
            })
            .collect()
    };
    let outcomes = match config.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        let (r, f) = o?;
        records.extend(r);
        failures.extend(f);
    }
    let summary = summarize(&records);
    Ok(SweepResult {
        records,
        failures,
        summary,
    })
}
