use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::MnlModel;
use crate::error::{Error, Result};
use crate::estimate::data::Observation;
use crate::estimate::mnl_mle::DEFAULT_CAP;
use crate::model::CrossCatModel;

/// Probabilities below this count as impossible observations.
pub(crate) const LOG_FLOOR: f64 = 1e-300;

/// Parameters of the two-category model with MNL kernels in both categories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRaw")]
pub struct TwoCatParams {
    #[serde(rename = "vA")]
    pub v_a: MnlModel,
    #[serde(rename = "vB")]
    pub v_b: MnlModel,
    pub lambda: Vec<Vec<f64>>,
    pub cap: f64,
}

#[derive(Deserialize)]
struct ParamsRaw {
    #[serde(rename = "vA")]
    v_a: MnlModel,
    #[serde(rename = "vB")]
    v_b: MnlModel,
    lambda: Vec<Vec<f64>>,
    #[serde(default = "default_cap")]
    cap: f64,
}

fn default_cap() -> f64 {
    DEFAULT_CAP
}

impl TryFrom<ParamsRaw> for TwoCatParams {
    type Error = Error;

    fn try_from(raw: ParamsRaw) -> Result<Self> {
        TwoCatParams::new(raw.v_a, raw.v_b, raw.lambda, raw.cap)
    }
}

/// Observed log-likelihood, with the first impossible observation if any.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLik {
    /// `-inf` when some observation has probability zero.
    pub value: f64,
    pub first_impossible: Option<usize>,
}

impl TwoCatParams {
    pub fn new(v_a: MnlModel, v_b: MnlModel, lambda: Vec<Vec<f64>>, cap: f64) -> Result<Self> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::model(format!("cap must be positive, got {cap}")));
        }
        for (name, m) in [("vA", &v_a), ("vB", &v_b)] {
            if let Some(w) = m.weights().iter().find(|&&w| w > cap * (1.0 + 1e-12)) {
                return Err(Error::model(format!("{name} weight {w} exceeds cap {cap}")));
            }
        }
        let (rows, cols) = (v_a.n() + 1, v_b.n() + 1);
        if lambda.len() != rows || lambda.iter().any(|r| r.len() != cols) {
            return Err(Error::model(format!("lambda must be {rows}x{cols}")));
        }
        for (i, row) in lambda.iter().enumerate() {
            let total: f64 = row.iter().sum();
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) || (total - 1.0).abs() > 1e-10 {
                return Err(Error::model(format!("lambda row {i} is not a distribution")));
            }
        }
        Ok(TwoCatParams { v_a, v_b, lambda, cap })
    }

    /// Uniform attraction rows and unit weights in B.
    pub fn uniform(v_a: MnlModel, n_b: usize) -> Self {
        let rows = v_a.n() + 1;
        TwoCatParams {
            v_a,
            v_b: MnlModel::uniform(n_b),
            lambda: vec![vec![1.0 / (n_b + 1) as f64; n_b + 1]; rows],
            cap: DEFAULT_CAP,
        }
    }

    pub fn n_a(&self) -> usize {
        self.v_a.n()
    }

    pub fn n_b(&self) -> usize {
        self.v_b.n()
    }

    /// B-choice distribution after choosing `a` in A, with B offering `s_b`.
    pub fn conditional_b(&self, a: usize, s_b: &Assortment) -> Vec<f64> {
        let row = &self.lambda[a];
        let denom = self.v_b.total_weight(s_b) + 1.0;
        let mut p = vec![0.0; row.len()];
        p[0] = row[0];
        let mut lost: f64 = row[1..].iter().sum();
        for j in s_b.iter() {
            p[j] = row[j];
            lost -= row[j];
        }
        let lost = lost.max(0.0);
        p[0] += lost / denom;
        for j in s_b.iter() {
            p[j] += lost * self.v_b.weight(j) / denom;
        }
        p
    }

    /// `P(b | a, S_B)` for one observation.
    pub fn prob_b(&self, o: &Observation) -> f64 {
        let row = &self.lambda[o.a];
        let lost: f64 = (1..row.len()).filter(|&m| !o.s_b.contains(m)).map(|m| row[m]).sum();
        row[o.b] + self.v_b.weight(o.b) / (self.v_b.total_weight(&o.s_b) + 1.0) * lost
    }

    /// `P(a | S_A)` for one observation.
    pub fn prob_a(&self, o: &Observation) -> f64 {
        self.v_a.weight(o.a) / (self.v_a.total_weight(&o.s_a) + 1.0)
    }

    /// Joint two-category model with these parameters.
    pub fn to_model(&self) -> Result<CrossCatModel> {
        CrossCatModel::two_category(self.v_a.clone(), self.v_b.clone(), self.lambda.clone())
    }

    /// Largest absolute difference over attraction rows and B weights.
    pub fn max_change(&self, other: &TwoCatParams) -> f64 {
        let lam = self
            .lambda
            .iter()
            .flatten()
            .zip(other.lambda.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        self.v_b
            .weights()
            .iter()
            .zip(other.v_b.weights())
            .fold(lam, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Observed-data log-likelihood of both categories.
pub fn loglik_observed(params: &TwoCatParams, data: &[Observation]) -> LogLik {
    let mut value = 0.0;
    for (t, o) in data.iter().enumerate() {
        let p = params.prob_a(o) * params.prob_b(o);
        if p <= 0.0 {
            return LogLik {
                value: f64::NEG_INFINITY,
                first_impossible: Some(t),
            };
        }
        value += params.prob_a(o).ln() + params.prob_b(o).ln();
    }
    LogLik {
        value,
        first_impossible: None,
    }
}

/// Category-A part of the log-likelihood.
pub fn loglik_a(v_a: &MnlModel, data: &[Observation]) -> f64 {
    data.iter()
        .map(|o| (v_a.weight(o.a) / (v_a.total_weight(&o.s_a) + 1.0)).ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_concavity_fixture() {
        // One A product with v = 1; B product j with v = 7.5261; lambda row of
        // the chosen A product puts 0.2611 on j and 0.5875 on an unoffered product.
        let v_a = MnlModel::new(vec![1.0]).unwrap();
        let v_b = MnlModel::new(vec![7.5261, 1.0]).unwrap();
        let rest = 1.0 - 0.2611 - 0.5875;
        let lambda = vec![vec![1.0, 0.0, 0.0], vec![rest, 0.2611, 0.5875]];
        let p = TwoCatParams::new(v_a, v_b, lambda, DEFAULT_CAP).unwrap();
        let data = [Observation::new([1], [1], 1, 1)];
        let ll = loglik_observed(&p, &data);
        assert!((ll.value - (0.5f64.ln() - 0.2488)).abs() < 1e-3, "{}", ll.value);
        assert!((ll.value + 0.9419).abs() < 1e-3);
    }

    #[test]
    fn impossible_observation_is_reported() {
        let p = TwoCatParams::new(
            MnlModel::uniform(1),
            MnlModel::uniform(1),
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
            DEFAULT_CAP,
        )
        .unwrap();
        let data = [Observation::new([1], [1], 1, 0), Observation::new([1], [1], 1, 1)];
        let ll = loglik_observed(&p, &data);
        assert_eq!(ll.value, f64::NEG_INFINITY);
        assert_eq!(ll.first_impossible, Some(1));
    }

    #[test]
    fn conditional_matches_kernel_substitution() {
        let p = TwoCatParams::new(
            MnlModel::new(vec![0.5, 2.0]).unwrap(),
            MnlModel::new(vec![1.0, 0.3, 2.2]).unwrap(),
            vec![
                vec![0.4, 0.2, 0.2, 0.2],
                vec![0.1, 0.6, 0.1, 0.2],
                vec![0.0, 0.0, 0.5, 0.5],
            ],
            DEFAULT_CAP,
        )
        .unwrap();
        let model = p.to_model().unwrap();
        let s = Assortment::from([1, 3]);
        for a in 0..3 {
            let x = p.conditional_b(a, &s);
            let y = model.conditional_b_prob(0, a, &s).unwrap();
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }
}
