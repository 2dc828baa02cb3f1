use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::MnlModel;
use crate::error::{Error, Result};
use crate::estimate::data::{check_observations, Observation};
use crate::estimate::mnl_mle::fit_mnl_mle;
use crate::estimate::params::{TwoCatParams, LOG_FLOOR};
use crate::model::CrossCatModel;

/// A fitted two-category model of any supported family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FittedModel {
    /// Attraction rows plus MNL substitution in B.
    Markov(TwoCatParams),
    /// Independent MNL models per category.
    Ind {
        #[serde(rename = "vA")]
        v_a: MnlModel,
        #[serde(rename = "vB")]
        v_b: MnlModel,
    },
    /// One B-category MNL model per A choice.
    Multi {
        #[serde(rename = "vA")]
        v_a: MnlModel,
        per_a: Vec<MnlModel>,
    },
}

impl FittedModel {
    pub fn label(&self) -> &'static str {
        match self {
            FittedModel::Markov(_) => "markov",
            FittedModel::Ind { .. } => "ind",
            FittedModel::Multi { .. } => "multi",
        }
    }

    pub fn v_a(&self) -> &MnlModel {
        match self {
            FittedModel::Markov(p) => &p.v_a,
            FittedModel::Ind { v_a, .. } | FittedModel::Multi { v_a, .. } => v_a,
        }
    }

    pub fn n_b(&self) -> usize {
        match self {
            FittedModel::Markov(p) => p.n_b(),
            FittedModel::Ind { v_b, .. } => v_b.n(),
            FittedModel::Multi { per_a, .. } => per_a.first().map_or(0, MnlModel::n),
        }
    }

    /// Predicted B-choice distribution over `0..=n_B` given A choice `a`.
    pub fn predict_b(&self, a: usize, s_b: &Assortment) -> Result<Vec<f64>> {
        match self {
            FittedModel::Markov(p) => {
                s_b.check(p.n_b())?;
                if a > p.n_a() {
                    return Err(Error::domain(format!("A choice {a} out of range")));
                }
                Ok(p.conditional_b(a, s_b))
            }
            FittedModel::Ind { v_b, .. } => v_b.choice_prob(s_b),
            FittedModel::Multi { per_a, .. } => per_a
                .get(a)
                .ok_or_else(|| Error::domain(format!("A choice {a} out of range")))?
                .choice_prob(s_b),
        }
    }

    /// Log-likelihood of the B choices given A choices; zero probabilities are floored.
    pub fn loglik_b(&self, data: &[Observation]) -> Result<f64> {
        let mut total = 0.0;
        for o in data {
            let p = self.predict_b(o.a, &o.s_b)?;
            total += p[o.b].max(LOG_FLOOR).ln();
        }
        Ok(total)
    }

    /// Log-likelihood of both categories.
    pub fn loglik(&self, data: &[Observation]) -> Result<f64> {
        let v_a = self.v_a();
        let a: f64 = data
            .iter()
            .map(|o| (v_a.weight(o.a) / (v_a.total_weight(&o.s_a) + 1.0)).max(LOG_FLOOR).ln())
            .sum();
        Ok(a + self.loglik_b(data)?)
    }

    /// Cross-category model used for assortment optimization.
    ///
    /// Independent MNLs become attraction rows equal to B's full-assortment
    /// MNL distribution. The per-choice MNL family has no such representation.
    pub fn to_cross_cat(&self) -> Result<CrossCatModel> {
        match self {
            FittedModel::Markov(p) => p.to_model(),
            FittedModel::Ind { v_a, v_b } => {
                let row = v_b.choice_prob(&Assortment::full(v_b.n()))?;
                CrossCatModel::two_category(v_a.clone(), v_b.clone(), vec![row; v_a.n() + 1])
            }
            FittedModel::Multi { .. } => Err(Error::UnsupportedStructure(
                "the per-choice MNL family is estimated only, not optimized".into(),
            )),
        }
    }
}

fn a_pairs(data: &[Observation]) -> Vec<(Assortment, usize)> {
    data.iter().map(|o| (o.s_a.clone(), o.a)).collect()
}

/// Two independent MNL models.
pub fn fit_ind(data: &[Observation], n_a: usize, n_b: usize, cap: f64) -> Result<FittedModel> {
    check_observations(data, n_a, n_b)?;
    let v_a = fit_mnl_mle(&a_pairs(data), n_a, cap)?;
    let b: Vec<(Assortment, usize)> = data.iter().map(|o| (o.s_b.clone(), o.b)).collect();
    let v_b = fit_mnl_mle(&b, n_b, cap)?;
    Ok(FittedModel::Ind { v_a, v_b })
}

/// One B-category MNL per A choice; choices never observed keep unit weights.
pub fn fit_multimnl(data: &[Observation], n_a: usize, n_b: usize, cap: f64) -> Result<FittedModel> {
    check_observations(data, n_a, n_b)?;
    let v_a = fit_mnl_mle(&a_pairs(data), n_a, cap)?;
    let mut by_a: Vec<Vec<(Assortment, usize)>> = vec![Vec::new(); n_a + 1];
    for o in data {
        by_a[o.a].push((o.s_b.clone(), o.b));
    }
    let per_a = by_a
        .iter()
        .map(|obs| fit_mnl_mle(obs, n_b, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedModel::Multi { v_a, per_a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::mnl_mle::DEFAULT_CAP;

    #[test]
    fn ind_as_cross_cat_reproduces_mnl() {
        let m = FittedModel::Ind {
            v_a: MnlModel::new(vec![1.0, 2.0]).unwrap(),
            v_b: MnlModel::new(vec![0.5, 1.5, 3.0]).unwrap(),
        };
        let cc = m.to_cross_cat().unwrap();
        let s = Assortment::from([1, 3]);
        for a in 0..3 {
            let x = cc.conditional_b_prob(0, a, &s).unwrap();
            let y = m.predict_b(a, &s).unwrap();
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multi_unobserved_choice_is_uniform() {
        let data = vec![Observation::new([1], [1, 2], 1, 2); 5];
        let FittedModel::Multi { per_a, .. } = fit_multimnl(&data, 2, 2, DEFAULT_CAP).unwrap() else {
            unreachable!()
        };
        assert_eq!(per_a[2].weights(), &[1.0, 1.0]);
        assert_eq!(per_a[0].weights(), &[1.0, 1.0]);
    }

    #[test]
    fn tagged_json() {
        let m = FittedModel::Ind {
            v_a: MnlModel::uniform(1),
            v_b: MnlModel::uniform(1),
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.starts_with(r#"{"model":"ind""#));
        let p = FittedModel::Markov(TwoCatParams::uniform(MnlModel::uniform(1), 2));
        let back: FittedModel = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
