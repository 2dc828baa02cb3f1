//! Ranking-based ground truth with tunable cross-category complementarity.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::estimate::Observation;
use crate::sampling::sample_index;

/// A customer class: arrival probability and preference list (option 0 included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedClass {
    pub prob: f64,
    pub ranking: Vec<usize>,
}

/// Size and complementarity settings of a generated ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSpec {
    pub n_a: usize,
    pub n_b: usize,
    pub m_a: usize,
    pub m_b: usize,
    pub theta: f64,
    pub p_del: f64,
}

impl Default for GroundTruthSpec {
    fn default() -> Self {
        GroundTruthSpec {
            n_a: 10,
            n_b: 8,
            m_a: 10,
            m_b: 10,
            theta: 0.0,
            p_del: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: GroundTruthSpec,
    pub classes_a: Vec<RankedClass>,
    /// Baseline B rankings; `conditional[k][i]` perturbs class `k` after A choice `i`.
    pub classes_b: Vec<RankedClass>,
    pub conditional: Vec<Vec<Vec<usize>>>,
}

/// Preference list of one class over products `1..=n`, best first, without option 0.
fn class_ranking<R: Rng + ?Sized>(n: usize, p_del: f64, rng: &mut R) -> Vec<usize> {
    let lo = rng.random_range(1..=n);
    let hi = rng.random_range(lo..=n);
    let mut scored: Vec<(f64, usize)> = (lo..=hi)
        .map(|j| {
            let z: f64 = StandardNormal.sample(rng);
            (j as f64 + z, j)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored
        .into_iter()
        .map(|(_, j)| j)
        .filter(|_| !rng.random_bool(p_del))
        .collect()
}

fn class_probs<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let beta: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let total: f64 = beta.iter().sum();
    if total > 0.0 {
        beta.iter().map(|b| b / total).collect()
    } else {
        vec![1.0 / m as f64; m]
    }
}

/// Draws a ground truth.
///
/// Each class considers a random interval of products, perturbs their order
/// with standard normal noise and drops each one with probability `p_del`.
/// In B, the baseline position of option 0 is `n_B + 1`; after A choice `i`
/// a retained option `j` is re-scored as `position(j) + theta * eps[i][j]`
/// with one standard normal `eps[i][j]` shared by all classes. The draws do
/// not depend on `theta`, so equal seeds give the same model up to `theta`.
pub fn gen_ground_truth<R: Rng + ?Sized>(spec: &GroundTruthSpec, rng: &mut R) -> Result<GroundTruth> {
    if spec.n_a == 0 || spec.n_b == 0 || spec.m_a == 0 || spec.m_b == 0 {
        return Err(Error::Config("category sizes and class counts must be positive".into()));
    }
    if !(spec.theta >= 0.0 && spec.theta.is_finite()) || !(0.0..=1.0).contains(&spec.p_del) {
        return Err(Error::Config("theta must be >= 0 and p_del in [0, 1]".into()));
    }
    let probs_a = class_probs(spec.m_a, rng);
    let classes_a = probs_a
        .into_iter()
        .map(|prob| {
            let mut ranking = class_ranking(spec.n_a, spec.p_del, rng);
            ranking.push(0);
            RankedClass { prob, ranking }
        })
        .collect();
    let probs_b = class_probs(spec.m_b, rng);
    let baselines: Vec<Vec<usize>> = (0..spec.m_b).map(|_| class_ranking(spec.n_b, spec.p_del, rng)).collect();
    let eps: Vec<Vec<f64>> = (0..=spec.n_a)
        .map(|_| (0..=spec.n_b).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    let conditional = baselines
        .iter()
        .map(|base| {
            eps.iter()
                .map(|e| {
                    let mut scored: Vec<(f64, usize)> = base
                        .iter()
                        .enumerate()
                        .map(|(pos, &j)| ((pos + 1) as f64 + spec.theta * e[j], j))
                        .chain([((spec.n_b + 1) as f64 + spec.theta * e[0], 0)])
                        .collect();
                    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
                    scored.into_iter().map(|(_, j)| j).collect()
                })
                .collect()
        })
        .collect();
    let classes_b = probs_b
        .into_iter()
        .zip(baselines)
        .map(|(prob, mut ranking)| {
            ranking.push(0);
            RankedClass { prob, ranking }
        })
        .collect();
    Ok(GroundTruth {
        spec: spec.clone(),
        classes_a,
        classes_b,
        conditional,
    })
}

fn first_offered(ranking: &[usize], s: &Assortment) -> usize {
    ranking.iter().copied().find(|&j| j == 0 || s.contains(j)).unwrap_or(0)
}

impl GroundTruth {
    /// A-choice distribution over `0..=n_A`.
    pub fn choice_prob_a(&self, s_a: &Assortment) -> Result<Vec<f64>> {
        s_a.check(self.spec.n_a)?;
        let mut p = vec![0.0; self.spec.n_a + 1];
        for c in &self.classes_a {
            p[first_offered(&c.ranking, s_a)] += c.prob;
        }
        Ok(p)
    }

    /// B-choice distribution over `0..=n_B` after A choice `i`.
    pub fn conditional_prob(&self, i: usize, s_b: &Assortment) -> Result<Vec<f64>> {
        s_b.check(self.spec.n_b)?;
        if i > self.spec.n_a {
            return Err(Error::domain(format!("A choice {i} is outside 0..={}", self.spec.n_a)));
        }
        let mut p = vec![0.0; self.spec.n_b + 1];
        for (c, cond) in self.classes_b.iter().zip(&self.conditional) {
            p[first_offered(&cond[i], s_b)] += c.prob;
        }
        Ok(p)
    }

    /// Exact expected revenue of offering `(s_a, s_b)`; prices are indexed from option 0.
    pub fn expected_revenue(&self, prices_a: &[f64], prices_b: &[f64], s_a: &Assortment, s_b: &Assortment) -> Result<f64> {
        if prices_a.len() != self.spec.n_a + 1 || prices_b.len() != self.spec.n_b + 1 {
            return Err(Error::domain("price vectors must cover options 0..=n"));
        }
        let pa = self.choice_prob_a(s_a)?;
        let mut total = 0.0;
        for (i, &p) in pa.iter().enumerate() {
            if p > 0.0 {
                let cond = self.conditional_prob(i, s_b)?;
                let down: f64 = cond.iter().zip(prices_b).map(|(q, r)| q * r).sum();
                total += p * (prices_a[i] + down);
            }
        }
        Ok(total)
    }

    /// Draws one transaction for the given assortments.
    pub fn sample<R: Rng + ?Sized>(&self, s_a: &Assortment, s_b: &Assortment, rng: &mut R) -> Observation {
        let pa: Vec<f64> = self.classes_a.iter().map(|c| c.prob).collect();
        let pb: Vec<f64> = self.classes_b.iter().map(|c| c.prob).collect();
        let a = first_offered(&self.classes_a[sample_index(&pa, rng)].ranking, s_a);
        let b = first_offered(&self.conditional[sample_index(&pb, rng)][a], s_b);
        Observation {
            s_a: s_a.clone(),
            s_b: s_b.clone(),
            a,
            b,
        }
    }
}

/// Uniformly random subset of `1..=n`.
pub fn random_assortment<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Assortment {
    (1..=n).filter(|_| rng.random_bool(0.5)).collect()
}

/// `t` transactions with both assortments drawn uniformly from all subsets.
pub fn simulate_dataset<R: Rng + ?Sized>(gt: &GroundTruth, t: usize, rng: &mut R) -> Vec<Observation> {
    (0..t)
        .map(|_| {
            let s_a = random_assortment(gt.spec.n_a, rng);
            let s_b = random_assortment(gt.spec.n_b, rng);
            gt.sample(&s_a, &s_b, rng)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceRegime {
    /// Prices fall with the product index, which follows preference.
    Low,
    /// Prices rise with the product index.
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceDist {
    Normal,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceScenario {
    pub regime: PriceRegime,
    pub dist: PriceDist,
    /// Variance of the normal draws; zero makes every scenario deterministic.
    #[serde(default = "default_variance")]
    pub variance: f64,
}

fn default_variance() -> f64 {
    25.0
}

impl PriceScenario {
    pub fn new(regime: PriceRegime, dist: PriceDist) -> Self {
        PriceScenario {
            regime,
            dist,
            variance: default_variance(),
        }
    }

    pub fn label(&self) -> String {
        let r = match self.regime {
            PriceRegime::Low => "low",
            PriceRegime::High => "high",
        };
        let d = match self.dist {
            PriceDist::Normal => "normal",
            PriceDist::Uniform => "uniform",
        };
        format!("{r}-{d}")
    }
}

/// Prices for options `0..=n`; option 0 is free.
///
/// Product `k` draws from `max(N(100 - 5k, var), 0.1)` / `max(N(50 + 5k, var), 0.1)`
/// or `U[5 - 0.5k, 10 - 0.5k]` / `U[5 + 0.5k, 10 + 0.5k]` for the low and
/// high regimes. With zero variance the normal draws collapse to their
/// truncated mean and the uniform draws to the interval midpoint.
pub fn gen_prices<R: Rng + ?Sized>(scenario: &PriceScenario, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(scenario.variance >= 0.0 && scenario.variance.is_finite()) {
        return Err(Error::Config(format!("price variance must be >= 0, got {}", scenario.variance)));
    }
    let mut prices = vec![0.0; n + 1];
    for (k, price) in prices.iter_mut().enumerate().skip(1) {
        let k = k as f64;
        *price = match (scenario.dist, scenario.regime) {
            (PriceDist::Normal, regime) => {
                let mean = match regime {
                    PriceRegime::Low => 100.0 - 5.0 * k,
                    PriceRegime::High => 50.0 + 5.0 * k,
                };
                let draw = if scenario.variance == 0.0 {
                    mean
                } else {
                    Normal::new(mean, scenario.variance.sqrt())
                        .expect("positive standard deviation")
                        .sample(rng)
                };
                draw.max(0.1)
            }
            (PriceDist::Uniform, regime) => {
                let (lo, hi) = match regime {
                    PriceRegime::Low => (5.0 - 0.5 * k, 10.0 - 0.5 * k),
                    PriceRegime::High => (5.0 + 0.5 * k, 10.0 + 0.5 * k),
                };
                if scenario.variance == 0.0 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * rng.random::<f64>()
                }
            }
        };
    }
    Ok(prices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gt(theta: f64, p_del: f64, seed: u64) -> GroundTruth {
        let spec = GroundTruthSpec {
            theta,
            p_del,
            ..GroundTruthSpec::default()
        };
        gen_ground_truth(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn zero_theta_keeps_baseline() {
        let g = gt(0.0, 0.2, 3);
        for (class, cond) in g.classes_b.iter().zip(&g.conditional) {
            for ranking in cond {
                assert_eq!(ranking, &class.ranking);
            }
        }
    }

    #[test]
    fn full_deletion_leaves_only_no_purchase() {
        let g = gt(2.0, 1.0, 4);
        for c in g.classes_a.iter().chain(&g.classes_b) {
            assert_eq!(c.ranking, vec![0]);
        }
        for cond in g.conditional.iter().flatten() {
            assert_eq!(cond, &vec![0]);
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        assert_eq!(gt(1.5, 0.2, 9), gt(1.5, 0.2, 9));
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        let g = gt(1.5, 0.2, 9);
        assert_eq!(simulate_dataset(&g, 50, &mut r1), simulate_dataset(&g, 50, &mut r2));
    }

    #[test]
    fn class_probabilities_normalized() {
        let g = gt(1.0, 0.2, 5);
        let sa: f64 = g.classes_a.iter().map(|c| c.prob).sum();
        let sb: f64 = g.classes_b.iter().map(|c| c.prob).sum();
        assert!((sa - 1.0).abs() < 1e-12 && (sb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_assortments_earn_nothing() {
        let g = gt(1.0, 0.2, 6);
        let pa = vec![1.0; 11];
        let pb = vec![0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0];
        let pa0: Vec<f64> = std::iter::once(0.0).chain(pa[1..].iter().copied()).collect();
        let r = g.expected_revenue(&pa0, &pb, &Assortment::empty(), &Assortment::empty()).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(simulate_dataset(&g, 0, &mut ChaCha8Rng::seed_from_u64(0)), vec![]);
    }

    #[test]
    fn deterministic_prices_and_truncation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = PriceScenario {
            variance: 0.0,
            ..PriceScenario::new(PriceRegime::Low, PriceDist::Normal)
        };
        assert_eq!(gen_prices(&s, 3, &mut rng).unwrap(), vec![0.0, 95.0, 90.0, 85.0]);
        let s = PriceScenario::new(PriceRegime::High, PriceDist::Normal);
        for _ in 0..200 {
            assert!(gen_prices(&s, 10, &mut rng).unwrap()[1..].iter().all(|&p| p >= 0.1));
        }
    }
}
