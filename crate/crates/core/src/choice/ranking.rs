use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::markov::check_distribution;
use crate::choice::mnl::MnlModel;
use crate::error::{Error, Result};

/// Explicit distribution over preference orders of `0..=n`.
///
/// Each ranking lists options from most to least preferred; a customer
/// picks the first listed option that is offered (0 is always offered).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RankingRaw")]
pub struct RankingModel {
    rankings: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RankingRaw {
    rankings: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl TryFrom<RankingRaw> for RankingModel {
    type Error = Error;

    fn try_from(raw: RankingRaw) -> Result<Self> {
        RankingModel::new(raw.rankings, raw.probs)
    }
}

impl RankingModel {
    pub fn new(rankings: Vec<Vec<usize>>, probs: Vec<f64>) -> Result<Self> {
        if rankings.is_empty() || rankings.len() != probs.len() {
            return Err(Error::model(
                "need one probability per ranking and at least one ranking",
            ));
        }
        check_distribution(&probs, "ranking probabilities")?;
        let n1 = rankings[0].len();
        for (k, r) in rankings.iter().enumerate() {
            let mut seen = vec![false; n1];
            let valid = r.len() == n1
                && r.iter().all(|&j| j < n1 && !std::mem::replace(&mut seen[j], true));
            if !valid {
                return Err(Error::model(format!(
                    "ranking {k} is not a permutation of 0..={}",
                    n1.saturating_sub(1)
                )));
            }
        }
        if n1 == 0 {
            return Err(Error::model("rankings must include option 0"));
        }
        Ok(RankingModel { rankings, probs })
    }

    /// Sequential-sampling representation of an MNL model.
    ///
    /// Options are drawn without replacement with probability proportional to
    /// their weight (outside option weight 1), which enumerates `(n+1)!`
    /// orders; orders with zero probability are omitted. Limited to `n <= 8`.
    pub fn from_mnl(model: &MnlModel) -> Result<Self> {
        let n = model.n();
        if n > 8 {
            return Err(Error::domain(format!(
                "refusing to enumerate {}! rankings",
                n + 1
            )));
        }
        let mut rankings = Vec::new();
        let mut probs = Vec::new();
        let mut prefix = Vec::with_capacity(n + 1);
        let mut remaining: Vec<usize> = (0..=n).collect();
        expand(model, &mut prefix, &mut remaining, 1.0, &mut rankings, &mut probs);
        Ok(RankingModel { rankings, probs })
    }

    pub fn n(&self) -> usize {
        self.rankings[0].len() - 1
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// First option of `ranking` found in `offered`.
    pub fn first_offered(ranking: &[usize], offered: &[bool]) -> usize {
        ranking.iter().copied().find(|&j| offered[j]).unwrap_or(0)
    }

    pub fn choice_prob(&self, s: &Assortment) -> Result<Vec<f64>> {
        let offered = s.offered_mask(self.n())?;
        let mut p = vec![0.0; self.n() + 1];
        for (r, &w) in self.rankings.iter().zip(&self.probs) {
            p[Self::first_offered(r, &offered)] += w;
        }
        Ok(p)
    }

    /// Choice distribution among rankings whose top option is the unavailable product `l`.
    ///
    /// All zeros when no such ranking carries positive probability.
    pub fn conditional_prob(&self, s: &Assortment, l: usize) -> Result<Vec<f64>> {
        let n = self.n();
        if l == 0 || l > n {
            return Err(Error::domain(format!("product {l} is outside 1..={n}")));
        }
        if s.contains(l) {
            return Err(Error::precondition(format!("product {l} is offered in {s}")));
        }
        let offered = s.offered_mask(n)?;
        let mut p = vec![0.0; n + 1];
        let mut mass = 0.0;
        for (r, &w) in self.rankings.iter().zip(&self.probs) {
            if r[0] == l {
                p[Self::first_offered(r, &offered)] += w;
                mass += w;
            }
        }
        if mass > 0.0 {
            p.iter_mut().for_each(|x| *x /= mass);
        }
        Ok(p)
    }
}

fn expand(
    model: &MnlModel,
    prefix: &mut Vec<usize>,
    remaining: &mut Vec<usize>,
    prob: f64,
    rankings: &mut Vec<Vec<usize>>,
    probs: &mut Vec<f64>,
) {
    if remaining.is_empty() {
        rankings.push(prefix.clone());
        probs.push(prob);
        return;
    }
    let total: f64 = remaining.iter().map(|&j| model.weight(j)).sum();
    for k in 0..remaining.len() {
        let j = remaining[k];
        let w = model.weight(j);
        if w == 0.0 {
            continue;
        }
        remaining.remove(k);
        prefix.push(j);
        expand(model, prefix, remaining, prob * w / total, rankings, probs);
        prefix.pop();
        remaining.insert(k, j);
    }
    // Zero-weight products can only follow every positive-weight option; their
    // relative order never affects a choice, so append them in index order.
    if remaining.iter().all(|&j| model.weight(j) == 0.0) {
        prefix.extend(remaining.iter());
        rankings.push(prefix.clone());
        probs.push(prob);
        prefix.truncate(prefix.len() - remaining.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outside_first_always_no_purchase() {
        let m = RankingModel::new(vec![vec![0, 1, 2]], vec![1.0]).unwrap();
        for mask in 0..4 {
            let p = m.choice_prob(&Assortment::from_mask(mask, 2)).unwrap();
            assert_eq!(p, vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn symmetric_pair() {
        let m = RankingModel::new(vec![vec![1, 2, 0], vec![2, 1, 0]], vec![0.5, 0.5]).unwrap();
        let p = m.choice_prob(&Assortment::from([1, 2])).unwrap();
        assert_eq!(p, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn empty_conditioning_class_is_zero() {
        let m = RankingModel::new(vec![vec![1, 0, 2]], vec![1.0]).unwrap();
        let p = m.conditional_prob(&Assortment::from([1]), 2).unwrap();
        assert_eq!(p, vec![0.0; 3]);
    }

    #[test]
    fn hand_built_conditional() {
        // Rankings led by product 1: (1,2,0) w.p. 0.2 and (1,0,2) w.p. 0.3.
        let m = RankingModel::new(
            vec![vec![1, 2, 0], vec![1, 0, 2], vec![2, 1, 0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let p = m.conditional_prob(&Assortment::from([2]), 1).unwrap();
        assert!((p[2] - 0.4).abs() < 1e-15 && (p[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_permutation() {
        assert!(RankingModel::new(vec![vec![0, 1, 1]], vec![1.0]).is_err());
        assert!(RankingModel::new(vec![vec![0, 1], vec![0, 1, 2]], vec![0.5, 0.5]).is_err());
        assert!(RankingModel::new(vec![vec![0, 1]], vec![0.9]).is_err());
    }

    #[test]
    fn mnl_enumeration_has_all_orders() {
        let m = RankingModel::from_mnl(&MnlModel::new(vec![1.0, 2.0, 0.5]).unwrap()).unwrap();
        assert_eq!(m.rankings().len(), 24);
        assert!((m.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mnl_enumeration_with_zero_weight() {
        let mnl = MnlModel::new(vec![0.0, 1.0, 2.0]).unwrap();
        let m = RankingModel::from_mnl(&mnl).unwrap();
        let s = Assortment::from([1, 2, 3]);
        let a = m.choice_prob(&s).unwrap();
        let b = mnl.choice_prob(&s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
