use std::collections::HashMap;

use crate::assortment::Assortment;
use crate::choice::MnlModel;
use crate::error::{Error, Result};

/// Default upper bound on fitted preference weights.
pub const DEFAULT_CAP: f64 = 1e4;
/// Lower bound on log-weights; `exp(-30)` is numerically zero for choice purposes.
pub const ALPHA_MIN: f64 = -30.0;

const GRAD_TOL: f64 = 1e-8;
const MAX_INNER: usize = 500;

/// Choices aggregated by `(offered set, chosen option)` with summed weights.
#[derive(Clone, Debug, Default)]
pub struct ChoiceGroups {
    groups: Vec<(Assortment, usize, f64)>,
}

impl ChoiceGroups {
    pub fn new() -> Self {
        ChoiceGroups::default()
    }

    /// Groups `(set, choice, weight)` triples, dropping non-positive weights.
    pub fn from_weighted<'a>(items: impl IntoIterator<Item = (&'a Assortment, usize, f64)>) -> Self {
        let mut index: HashMap<(&'a Assortment, usize), usize> = HashMap::new();
        let mut groups: Vec<(Assortment, usize, f64)> = Vec::new();
        for (s, c, w) in items {
            if w <= 0.0 {
                continue;
            }
            match index.get(&(s, c)) {
                Some(&k) => groups[k].2 += w,
                None => {
                    index.insert((s, c), groups.len());
                    groups.push((s.clone(), c, w));
                }
            }
        }
        ChoiceGroups { groups }
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[(Assortment, usize, f64)] {
        &self.groups
    }

    /// Weighted MNL log-likelihood at log-weights `alpha` (outside option fixed at 0).
    pub fn loglik(&self, alpha: &[f64]) -> f64 {
        self.groups
            .iter()
            .map(|(s, c, w)| {
                let denom = 1.0 + s.iter().map(|j| alpha[j - 1].exp()).sum::<f64>();
                let num = if *c == 0 { 0.0 } else { alpha[c - 1] };
                w * (num - denom.ln())
            })
            .sum()
    }

    /// Log-likelihood and its gradient with respect to `alpha`.
    pub fn loglik_grad(&self, alpha: &[f64]) -> (f64, Vec<f64>) {
        let expa: Vec<f64> = alpha.iter().map(|a| a.exp()).collect();
        let mut grad = vec![0.0; alpha.len()];
        let mut ll = 0.0;
        for (s, c, w) in &self.groups {
            let denom = 1.0 + s.iter().map(|j| expa[j - 1]).sum::<f64>();
            if *c != 0 {
                ll += w * alpha[c - 1];
                grad[c - 1] += w;
            }
            ll -= w * denom.ln();
            for j in s.iter() {
                grad[j - 1] -= w * expa[j - 1] / denom;
            }
        }
        (ll, grad)
    }

    /// Maximizes the weighted log-likelihood over weights in `[e^-30, cap]`.
    ///
    /// Projected gradient ascent in log-weights, Barzilai-Borwein step sizes
    /// and Armijo backtracking; starts from `init` and never decreases the
    /// objective.
    pub fn fit(&self, init: &MnlModel, cap: f64) -> Result<MnlModel> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::domain(format!("weight cap must be positive, got {cap}")));
        }
        let hi = cap.ln();
        let project = |a: f64| a.clamp(ALPHA_MIN, hi);
        let mut alpha: Vec<f64> = init
            .weights()
            .iter()
            .map(|&v| project(if v > 0.0 { v.ln() } else { ALPHA_MIN }))
            .collect();
        if self.is_empty() {
            return MnlModel::new(alpha.iter().map(|a| a.exp()).collect());
        }
        let (mut f, mut g) = self.loglik_grad(&alpha);
        let mut step = 1.0 / g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for _ in 0..MAX_INNER {
            let pg: f64 = alpha
                .iter()
                .zip(&g)
                .map(|(a, d)| (project(a + d) - a).powi(2))
                .sum::<f64>()
                .sqrt();
            if pg < GRAD_TOL {
                break;
            }
            let mut accepted = None;
            while step > 1e-20 {
                let cand: Vec<f64> = alpha.iter().zip(&g).map(|(a, d)| project(a + step * d)).collect();
                let (fc, gc) = self.loglik_grad(&cand);
                let ascent: f64 = cand.iter().zip(&alpha).zip(&g).map(|((c, a), d)| (c - a) * d).sum();
                if fc >= f + 1e-4 * ascent && fc >= f {
                    accepted = Some((cand, fc, gc));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, fc, gc)) = accepted else { break };
            let s: Vec<f64> = cand.iter().zip(&alpha).map(|(c, a)| c - a).collect();
            let sy: f64 = s.iter().zip(gc.iter().zip(&g)).map(|(s, (a, b))| s * (a - b)).sum();
            let ss: f64 = s.iter().map(|x| x * x).sum();
            step = if sy < 0.0 { (ss / -sy).clamp(1e-10, 1e10) } else { (2.0 * step).min(1e10) };
            alpha = cand;
            f = fc;
            g = gc;
        }
        MnlModel::new(alpha.iter().map(|a| a.exp()).collect())
    }
}

/// Maximum-likelihood MNL fit from `(offered set, choice)` pairs.
///
/// With no data every weight is 1.
pub fn fit_mnl_mle(observations: &[(Assortment, usize)], n: usize, cap: f64) -> Result<MnlModel> {
    for (s, c) in observations {
        s.check(n)?;
        if *c != 0 && !s.contains(*c) {
            return Err(Error::Data(format!("choice {c} not offered in {s}")));
        }
    }
    let groups = ChoiceGroups::from_weighted(observations.iter().map(|(s, c)| (s, *c, 1.0)));
    groups.fit(&MnlModel::uniform(n), cap)
}
