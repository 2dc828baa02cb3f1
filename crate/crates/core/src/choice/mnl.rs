use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::markov::McModel;
use crate::error::{Error, Result};

/// Multinomial logit model over products `1..=n` with the outside weight fixed at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MnlRaw")]
pub struct MnlModel {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct MnlRaw {
    weights: Vec<f64>,
}

impl TryFrom<MnlRaw> for MnlModel {
    type Error = Error;

    fn try_from(raw: MnlRaw) -> Result<Self> {
        MnlModel::new(raw.weights)
    }
}

impl MnlModel {
    /// `weights[k]` is the preference weight of product `k + 1`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::model(format!(
                "mnl weight of product {} is {w}",
                k + 1
            )));
        }
        Ok(MnlModel { weights })
    }

    /// Every product gets weight 1.
    pub fn uniform(n: usize) -> Self {
        MnlModel {
            weights: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of option `j`, with `weight(0) == 1`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            self.weights[j - 1]
        }
    }

    /// Sum of weights over `s`.
    pub fn total_weight(&self, s: &Assortment) -> f64 {
        s.iter().map(|j| self.weights[j - 1]).sum()
    }

    /// Choice probabilities over options `0..=n`; entries outside `s ∪ {0}` are zero.
    pub fn choice_prob(&self, s: &Assortment) -> Result<Vec<f64>> {
        s.check(self.n())?;
        let denom = self.total_weight(s) + 1.0;
        let mut p = vec![0.0; self.n() + 1];
        p[0] = 1.0 / denom;
        for j in s.iter() {
            p[j] = self.weights[j - 1] / denom;
        }
        Ok(p)
    }

    /// Substitution distribution after an initial attraction to the unavailable product `k`.
    ///
    /// Under IIA this is the unconditional distribution, whatever `k` is.
    pub fn conditional_prob(&self, s: &Assortment, k: usize) -> Result<Vec<f64>> {
        if k == 0 || k > self.n() {
            return Err(Error::domain(format!("product {k} is outside 1..={}", self.n())));
        }
        if s.contains(k) {
            return Err(Error::precondition(format!(
                "conditioning product {k} is offered in {s}"
            )));
        }
        self.choice_prob(s)
    }

    /// Markov chain with the same choice probabilities for every assortment.
    ///
    /// `ρ_ij = v_j / (V - v_i + 1)` for `j != i`, `ρ_i0 = 1 / (V - v_i + 1)`,
    /// arrival `ψ_j = v_j / (V + 1)` where `V` is the total weight.
    pub fn to_markov_chain(&self) -> McModel {
        let n = self.n();
        let total: f64 = self.weights.iter().sum();
        let mut arrival = vec![0.0; n + 1];
        arrival[0] = 1.0 / (total + 1.0);
        for j in 1..=n {
            arrival[j] = self.weights[j - 1] / (total + 1.0);
        }
        let mut transition = vec![vec![0.0; n + 1]; n + 1];
        transition[0][0] = 1.0;
        for i in 1..=n {
            let denom = total - self.weights[i - 1] + 1.0;
            transition[i][0] = 1.0 / denom;
            for j in 1..=n {
                if j != i {
                    transition[i][j] = self.weights[j - 1] / denom;
                }
            }
        }
        McModel::new_unchecked(arrival, transition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn empty_assortment_is_no_purchase() {
        let m = MnlModel::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(m.choice_prob(&Assortment::empty()).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn fixture_weights_one_and_two() {
        // v_2 = 1, v_3 = 2 (product 1 carries no weight).
        let m = MnlModel::new(vec![0.0, 1.0, 2.0]).unwrap();
        let p = m.choice_prob(&Assortment::from([2, 3])).unwrap();
        assert!(close(p[0], 0.25) && close(p[2], 0.25) && close(p[3], 0.5));
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn single_product_closed_form() {
        let m = MnlModel::new(vec![3.0]).unwrap();
        let p = m.choice_prob(&Assortment::from([1])).unwrap();
        assert!(close(p[1], 0.75) && close(p[0], 0.25));
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let m = MnlModel::uniform(2);
        assert!(matches!(
            m.choice_prob(&Assortment::from([3])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conditional_is_pass_through() {
        let m = MnlModel::new(vec![0.5, 1.0, 2.0]).unwrap();
        for (s, k) in [(vec![], 1), (vec![2, 3], 1), (vec![1], 3)] {
            let s = Assortment::new(s);
            assert_eq!(m.conditional_prob(&s, k).unwrap(), m.choice_prob(&s).unwrap());
        }
        assert!(matches!(
            m.conditional_prob(&Assortment::from([1]), 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rejects_negative_weight() {
        assert!(MnlModel::new(vec![1.0, -0.1]).is_err());
        assert!(serde_json::from_str::<MnlModel>(r#"{"weights":[1.0,-1.0]}"#).is_err());
    }

    #[test]
    fn embedding_reproduces_choice_probabilities() {
        let m = MnlModel::new(vec![0.3, 1.7, 0.0, 2.5]).unwrap();
        let mc = m.to_markov_chain();
        for mask in 0..16u64 {
            let s = Assortment::from_mask(mask, 4);
            let a = m.choice_prob(&s).unwrap();
            let b = mc.choice_prob(&s).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "{s}: {a:?} vs {b:?}");
            }
        }
    }
}
