//! Single-category choice kernels.

mod markov;
mod mnl;
mod ranking;

pub use markov::{McModel, STOCHASTIC_TOL};
pub use mnl::MnlModel;
pub use ranking::RankingModel;

pub(crate) use markov::check_distribution;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::sampling::sample_index;

/// Choice model of one category, serialized with a `"type"` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChoiceKernel {
    Mnl(MnlModel),
    Mc(McModel),
    Rcm(RankingModel),
}

impl From<MnlModel> for ChoiceKernel {
    fn from(m: MnlModel) -> Self {
        ChoiceKernel::Mnl(m)
    }
}

impl From<McModel> for ChoiceKernel {
    fn from(m: McModel) -> Self {
        ChoiceKernel::Mc(m)
    }
}

impl From<RankingModel> for ChoiceKernel {
    fn from(m: RankingModel) -> Self {
        ChoiceKernel::Rcm(m)
    }
}

impl ChoiceKernel {
    pub fn n(&self) -> usize {
        match self {
            ChoiceKernel::Mnl(m) => m.n(),
            ChoiceKernel::Mc(m) => m.n(),
            ChoiceKernel::Rcm(m) => m.n(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChoiceKernel::Mnl(_) => "mnl",
            ChoiceKernel::Mc(_) => "mc",
            ChoiceKernel::Rcm(_) => "rcm",
        }
    }

    pub fn choice_prob(&self, s: &Assortment) -> Result<Vec<f64>> {
        match self {
            ChoiceKernel::Mnl(m) => m.choice_prob(s),
            ChoiceKernel::Mc(m) => m.choice_prob(s),
            ChoiceKernel::Rcm(m) => m.choice_prob(s),
        }
    }

    pub fn conditional_prob(&self, s: &Assortment, l: usize) -> Result<Vec<f64>> {
        match self {
            ChoiceKernel::Mnl(m) => m.conditional_prob(s, l),
            ChoiceKernel::Mc(m) => m.conditional_prob(s, l),
            ChoiceKernel::Rcm(m) => m.conditional_prob(s, l),
        }
    }

    /// Final choice distribution when initial attraction over `0..=n` is `attraction`.
    ///
    /// Attraction to an offered option (or 0) is kept; attraction to an
    /// unoffered product `l` is redistributed by the kernel's conditional
    /// substitution law. Linear in `attraction`.
    pub fn substitute(&self, attraction: &[f64], s: &Assortment) -> Result<Vec<f64>> {
        let n = self.n();
        if attraction.len() != n + 1 {
            return Err(Error::domain(format!(
                "attraction vector has length {}, expected {}",
                attraction.len(),
                n + 1
            )));
        }
        let offered = s.offered_mask(n)?;
        match self {
            ChoiceKernel::Mc(m) => m.absorb(attraction, s),
            ChoiceKernel::Mnl(m) => {
                let base = m.choice_prob(s)?;
                let lost: f64 = (1..=n).filter(|&l| !offered[l]).map(|l| attraction[l]).sum();
                Ok((0..=n)
                    .map(|j| if offered[j] { attraction[j] + lost * base[j] } else { 0.0 })
                    .collect())
            }
            ChoiceKernel::Rcm(m) => {
                let mut out: Vec<f64> = (0..=n)
                    .map(|j| if offered[j] { attraction[j] } else { 0.0 })
                    .collect();
                for l in (1..=n).filter(|&l| !offered[l] && attraction[l] > 0.0) {
                    let c = m.conditional_prob(s, l)?;
                    for (o, p) in out.iter_mut().zip(&c) {
                        *o += attraction[l] * p;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Markov chain view used by the optimizer; ranking kernels have none.
    pub fn as_markov_chain(&self) -> Result<McModel> {
        match self {
            ChoiceKernel::Mc(m) => Ok(m.clone()),
            ChoiceKernel::Mnl(m) => Ok(m.to_markov_chain()),
            ChoiceKernel::Rcm(_) => Err(Error::domain(
                "ranking kernels have no Markov chain representation for optimization",
            )),
        }
    }

    /// Draws one choice from `s` using the kernel's own arrival behavior.
    pub fn sample_choice<R: Rng + ?Sized>(&self, s: &Assortment, rng: &mut R) -> Result<usize> {
        let offered = s.offered_mask(self.n())?;
        Ok(match self {
            ChoiceKernel::Mnl(m) => sample_index(&m.choice_prob(s)?, rng),
            ChoiceKernel::Mc(m) => {
                let start = sample_index(m.arrival(), rng);
                m.walk(start, &offered, rng)
            }
            ChoiceKernel::Rcm(m) => {
                let k = sample_index(m.probs(), rng);
                RankingModel::first_offered(&m.rankings()[k], &offered)
            }
        })
    }

    /// Draws the final choice of a customer initially attracted to option `l`.
    ///
    /// A ranking kernel with no ranking led by `l` yields no purchase.
    pub fn sample_from_attraction<R: Rng + ?Sized>(
        &self,
        l: usize,
        offered: &[bool],
        rng: &mut R,
    ) -> usize {
        if offered[l] {
            return l;
        }
        match self {
            ChoiceKernel::Mnl(m) => {
                let w: Vec<f64> = (0..=m.n())
                    .map(|j| if offered[j] { m.weight(j) } else { 0.0 })
                    .collect();
                sample_index(&w, rng)
            }
            ChoiceKernel::Mc(m) => m.walk(l, offered, rng),
            ChoiceKernel::Rcm(m) => {
                let w: Vec<f64> = m
                    .rankings()
                    .iter()
                    .zip(m.probs())
                    .map(|(r, &p)| if r[0] == l { p } else { 0.0 })
                    .collect();
                if w.iter().all(|&x| x == 0.0) {
                    return 0;
                }
                let k = sample_index(&w, rng);
                RankingModel::first_offered(&m.rankings()[k], offered)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_all_kinds() {
        let docs = [
            r#"{"type":"mnl","weights":[1.0,2.0]}"#,
            r#"{"type":"mc","arrival":[0.5,0.5],"transition":[[1.0,0.0],[1.0,0.0]]}"#,
            r#"{"type":"rcm","rankings":[[1,0],[0,1]],"probs":[0.25,0.75]}"#,
        ];
        for doc in docs {
            let k: ChoiceKernel = serde_json::from_str(doc).unwrap();
            let back: ChoiceKernel =
                serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
            assert_eq!(k, back);
        }
    }

    #[test]
    fn json_validation_applies() {
        let bad = r#"{"type":"mc","arrival":[0.5,0.6],"transition":[[1.0,0.0],[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ChoiceKernel>(bad).is_err());
    }

    #[test]
    fn substitute_matches_kernels_on_mnl() {
        let mnl = MnlModel::new(vec![0.4, 1.5, 0.9]).unwrap();
        let kernels = [
            ChoiceKernel::Mnl(mnl.clone()),
            ChoiceKernel::Mc(mnl.to_markov_chain()),
            ChoiceKernel::Rcm(RankingModel::from_mnl(&mnl).unwrap()),
        ];
        let attraction = [0.1, 0.2, 0.3, 0.4];
        let s = Assortment::from([2]);
        let reference = kernels[0].substitute(&attraction, &s).unwrap();
        for k in &kernels[1..] {
            let p = k.substitute(&attraction, &s).unwrap();
            for (x, y) in p.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12, "{} {p:?} {reference:?}", k.kind());
            }
        }
    }
}
