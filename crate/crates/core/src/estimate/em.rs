use log::{debug, warn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::MnlModel;
use crate::error::{Error, Result};
use crate::estimate::data::{check_observations, Observation};
use crate::estimate::mnl_mle::{fit_mnl_mle, ChoiceGroups, DEFAULT_CAP};
use crate::estimate::params::{loglik_a, TwoCatParams, LOG_FLOOR};
use crate::sampling::child_rng;

/// Slack allowed before a likelihood drop counts as a failure.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Stopping rule and bounds for EM.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EmOptions {
    /// Threshold on the change in average (per-observation) log-likelihood.
    pub tol_ll: f64,
    /// Threshold on the largest parameter change.
    pub tol_param: f64,
    pub max_iter: usize,
    pub cap: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            tol_ll: 1e-2,
            tol_param: 1e-2,
            max_iter: 500,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmReport {
    pub params: TwoCatParams,
    /// Observed log-likelihood at the start and after every iteration.
    pub ll_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Posterior over the latent initial attraction in B, one vector per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentPosterior {
    pub xhat: Vec<Vec<f64>>,
    /// Observations whose posterior normalizer was zero.
    pub flagged: Vec<usize>,
}

/// One downstream transition: upstream choice, offered set, downstream choice.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EdgeObs<'a> {
    pub up: usize,
    pub set: &'a Assortment,
    pub choice: usize,
}

/// Parameters governing one edge: attraction rows and the downstream MNL weights.
#[derive(Clone, Debug)]
pub(crate) struct EdgeParams {
    pub lambda: Vec<Vec<f64>>,
    pub v: MnlModel,
}

impl EdgeParams {
    pub fn prob(&self, o: &EdgeObs) -> f64 {
        let row = &self.lambda[o.up];
        let lost: f64 = (1..row.len()).filter(|&m| !o.set.contains(m)).map(|m| row[m]).sum();
        row[o.choice] + self.v.weight(o.choice) / (self.v.total_weight(o.set) + 1.0) * lost
    }

    pub fn loglik(&self, obs: &[EdgeObs]) -> f64 {
        // Collect before summing so the result does not depend on thread scheduling.
        let terms: Vec<f64> = obs.par_iter().map(|o| self.prob(o).max(LOG_FLOOR).ln()).collect();
        terms.iter().sum()
    }

    pub fn max_change(&self, other: &EdgeParams) -> f64 {
        let lam = self
            .lambda
            .iter()
            .flatten()
            .zip(other.lambda.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        self.v
            .weights()
            .iter()
            .zip(other.v.weights())
            .fold(lam, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn posterior_one(p: &EdgeParams, o: &EdgeObs) -> Option<Vec<f64>> {
    let row = &p.lambda[o.up];
    let sub = p.v.weight(o.choice) / (p.v.total_weight(o.set) + 1.0);
    let mut x: Vec<f64> = (0..row.len())
        .map(|m| {
            let direct = if m == o.choice { 1.0 } else { 0.0 };
            let substituted = if m != 0 && !o.set.contains(m) { sub } else { 0.0 };
            row[m] * (direct + substituted)
        })
        .collect();
    let total: f64 = x.iter().sum();
    if total > 0.0 && total.is_finite() {
        x.iter_mut().for_each(|v| *v /= total);
        Some(x)
    } else {
        None
    }
}

/// Support of the posterior: the chosen option plus every unoffered product.
fn uniform_support(n1: usize, o: &EdgeObs) -> Vec<f64> {
    let support: Vec<bool> = (0..n1)
        .map(|m| m == o.choice || (m != 0 && !o.set.contains(m)))
        .collect();
    let k = support.iter().filter(|&&s| s).count() as f64;
    support.iter().map(|&s| if s { 1.0 / k } else { 0.0 }).collect()
}

pub(crate) fn edge_e_step(p: &EdgeParams, obs: &[EdgeObs]) -> LatentPosterior {
    let n1 = p.v.n() + 1;
    let results: Vec<Option<Vec<f64>>> = obs.par_iter().map(|o| posterior_one(p, o)).collect();
    let mut flagged = Vec::new();
    let xhat = results
        .into_iter()
        .enumerate()
        .map(|(t, r)| {
            r.unwrap_or_else(|| {
                flagged.push(t);
                uniform_support(n1, &obs[t])
            })
        })
        .collect();
    if !flagged.is_empty() {
        warn!(
            "{} observations have zero probability under the current parameters; using uniform posteriors",
            flagged.len()
        );
    }
    LatentPosterior { xhat, flagged }
}

pub(crate) fn edge_m_step(p: &EdgeParams, obs: &[EdgeObs], post: &LatentPosterior, cap: f64) -> Result<EdgeParams> {
    let n1 = p.v.n() + 1;
    let mut sums = vec![vec![0.0; n1]; p.lambda.len()];
    let mut counts = vec![0usize; p.lambda.len()];
    for (o, x) in obs.iter().zip(&post.xhat) {
        counts[o.up] += 1;
        for (s, v) in sums[o.up].iter_mut().zip(x) {
            *s += v;
        }
    }
    let lambda = sums
        .into_iter()
        .zip(&counts)
        .zip(&p.lambda)
        .map(|((row, &c), old)| {
            if c == 0 {
                old.clone()
            } else {
                let total: f64 = row.iter().sum();
                row.into_iter().map(|v| v / total).collect()
            }
        })
        .collect();
    let groups = ChoiceGroups::from_weighted(obs.iter().zip(&post.xhat).map(|(o, x)| {
        let w: f64 = (1..n1).filter(|&m| !o.set.contains(m)).map(|m| x[m]).sum();
        (o.set, o.choice, w)
    }));
    let v = groups.fit(&p.v, cap)?;
    Ok(EdgeParams { lambda, v })
}

fn edge_obs(data: &[Observation]) -> Vec<EdgeObs<'_>> {
    data.iter()
        .map(|o| EdgeObs {
            up: o.a,
            set: &o.s_b,
            choice: o.b,
        })
        .collect()
}

fn split(params: &TwoCatParams) -> EdgeParams {
    EdgeParams {
        lambda: params.lambda.clone(),
        v: params.v_b.clone(),
    }
}

/// Posterior of the latent initial attraction in B for every observation.
pub fn em_e_step(params: &TwoCatParams, data: &[Observation]) -> LatentPosterior {
    edge_e_step(&split(params), &edge_obs(data))
}

/// Updates the attraction rows and B weights given posteriors; A weights are kept.
pub fn em_m_step(
    params: &TwoCatParams,
    posterior: &LatentPosterior,
    data: &[Observation],
    cap: f64,
) -> Result<TwoCatParams> {
    if posterior.xhat.len() != data.len() {
        return Err(Error::domain("posterior and data lengths differ"));
    }
    let e = edge_m_step(&split(params), &edge_obs(data), posterior, cap)?;
    Ok(TwoCatParams {
        v_a: params.v_a.clone(),
        v_b: e.v,
        lambda: e.lambda,
        cap,
    })
}

/// Expected complete-data log-likelihood of the B part (attraction and substitution terms).
pub fn expected_complete_loglik(params: &TwoCatParams, posterior: &LatentPosterior, data: &[Observation]) -> f64 {
    let n1 = params.n_b() + 1;
    data.iter()
        .zip(&posterior.xhat)
        .map(|(o, x)| {
            let sub = (params.v_b.weight(o.b) / (params.v_b.total_weight(&o.s_b) + 1.0)).max(LOG_FLOOR).ln();
            (0..n1)
                .filter(|&m| x[m] > 0.0)
                .map(|m| {
                    let substituted = m != 0 && !o.s_b.contains(m);
                    x[m] * (params.lambda[o.a][m].max(LOG_FLOOR).ln() + if substituted { sub } else { 0.0 })
                })
                .sum::<f64>()
        })
        .sum()
}

/// Runs EM iterations on one or more edges until the joint stopping rule holds.
///
/// `base_ll` is the part of the log-likelihood that EM does not touch.
pub(crate) fn run_edges(
    edges: &mut [EdgeParams],
    obs: &[Vec<EdgeObs>],
    base_ll: f64,
    n_obs: usize,
    opts: &EmOptions,
) -> Result<(Vec<f64>, usize, bool)> {
    let total = |e: &[EdgeParams]| base_ll + e.iter().zip(obs).map(|(p, o)| p.loglik(o)).sum::<f64>();
    let scale = n_obs.max(1) as f64;
    let mut ll = total(edges);
    let mut trace = vec![ll];
    for iter in 1..=opts.max_iter {
        let mut next = Vec::with_capacity(edges.len());
        for (p, o) in edges.iter().zip(obs) {
            let post = edge_e_step(p, o);
            next.push(edge_m_step(p, o, &post, opts.cap)?);
        }
        let new_ll = total(&next);
        if new_ll < ll - MONOTONE_SLACK {
            return Err(Error::NonMonotone {
                iteration: iter,
                before: ll,
                after: new_ll,
            });
        }
        let change = edges.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max(a.max_change(b)));
        let ll_change = (new_ll - ll).abs() / scale;
        edges.clone_from_slice(&next);
        trace.push(new_ll);
        debug!("em iteration {iter}: ll {new_ll:.6}, param change {change:.3e}");
        ll = new_ll;
        if ll_change < opts.tol_ll && change < opts.tol_param {
            return Ok((trace, iter, true));
        }
    }
    Ok((trace, opts.max_iter, false))
}

fn fit_v_a(data: &[Observation], n_a: usize, cap: f64) -> Result<MnlModel> {
    let pairs: Vec<(Assortment, usize)> = data.iter().map(|o| (o.s_a.clone(), o.a)).collect();
    fit_mnl_mle(&pairs, n_a, cap)
}

/// Fits the two-category MNL model by EM.
///
/// A weights are fitted once by maximum likelihood; EM then alternates over
/// the attraction rows and B weights from `init` (uniform rows and unit
/// weights when absent). Stops when both the average log-likelihood change
/// and the largest parameter change fall below their tolerances.
pub fn fit_em(
    data: &[Observation],
    n_a: usize,
    n_b: usize,
    init: Option<&TwoCatParams>,
    opts: &EmOptions,
) -> Result<EmReport> {
    check_observations(data, n_a, n_b)?;
    let v_a = fit_v_a(data, n_a, opts.cap)?;
    let start = match init {
        Some(p) if p.n_a() == n_a && p.n_b() == n_b => split(p),
        Some(_) => return Err(Error::domain("initial parameters have the wrong sizes")),
        None => split(&TwoCatParams::uniform(v_a.clone(), n_b)),
    };
    em_from(data, v_a, start, opts)
}

fn em_from(data: &[Observation], v_a: MnlModel, start: EdgeParams, opts: &EmOptions) -> Result<EmReport> {
    let base = loglik_a(&v_a, data);
    let obs = vec![edge_obs(data)];
    let mut edges = vec![start];
    let (ll_trace, iterations, converged) = run_edges(&mut edges, &obs, base, data.len(), opts)?;
    let e = edges.pop().expect("one edge");
    let params = TwoCatParams::new(v_a, e.v, e.lambda, opts.cap)?;
    Ok(EmReport {
        params,
        ll_trace,
        iterations,
        converged,
    })
}

/// Random starting point: Dirichlet(1) attraction rows and log-normal B weights.
pub fn random_init<R: Rng + ?Sized>(v_a: &MnlModel, n_b: usize, cap: f64, rng: &mut R) -> TwoCatParams {
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma");
    let lambda = (0..=v_a.n())
        .map(|_| {
            let g: Vec<f64> = (0..=n_b).map(|_| f64::max(gamma.sample(rng), 1e-12)).collect();
            let total: f64 = g.iter().sum();
            g.into_iter().map(|x| x / total).collect()
        })
        .collect();
    let weights = (0..n_b)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z.exp().min(cap)
        })
        .collect();
    TwoCatParams {
        v_a: v_a.clone(),
        v_b: MnlModel::new(weights).expect("positive weights"),
        lambda,
        cap,
    }
}

/// Best of `starts` EM runs by final log-likelihood.
///
/// The first run uses the deterministic uniform start; the rest use
/// [`random_init`] with seeds derived from `seed`.
pub fn fit_em_multistart(
    data: &[Observation],
    n_a: usize,
    n_b: usize,
    opts: &EmOptions,
    starts: usize,
    seed: u64,
) -> Result<EmReport> {
    check_observations(data, n_a, n_b)?;
    let v_a = fit_v_a(data, n_a, opts.cap)?;
    let mut best: Option<EmReport> = None;
    for k in 0..starts.max(1) {
        let init = if k == 0 {
            TwoCatParams::uniform(v_a.clone(), n_b)
        } else {
            random_init(&v_a, n_b, opts.cap, &mut child_rng(seed, "em-start", &[k as u64]))
        };
        let report = em_from(data, v_a.clone(), split(&init), opts)?;
        let better = best
            .as_ref()
            .is_none_or(|b| report.ll_trace.last() > b.ll_trace.last());
        if better {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one start"))
}
