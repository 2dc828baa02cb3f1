use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::sampling::sample_index;

/// Tolerance for row sums of user-supplied stochastic inputs.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Markov chain choice model over states `0..=n`, state 0 being no-purchase.
///
/// A customer arrives at state `i` with probability `arrival[i]`; if `i` is
/// not offered they move to `k` with probability `transition[i][k]` and
/// repeat until an offered product or state 0 absorbs them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "McRaw")]
pub struct McModel {
    arrival: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct McRaw {
    arrival: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl TryFrom<McRaw> for McModel {
    type Error = Error;

    fn try_from(raw: McRaw) -> Result<Self> {
        McModel::new(raw.arrival, raw.transition)
    }
}

pub(crate) fn check_distribution(v: &[f64], what: &str) -> Result<()> {
    if let Some((k, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
        return Err(Error::model(format!("{what}: entry {k} is {x}")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::model(format!("{what}: sums to {total}")));
    }
    Ok(())
}

impl McModel {
    pub fn new(arrival: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let n1 = arrival.len();
        if n1 == 0 {
            return Err(Error::model("arrival vector must include state 0"));
        }
        check_distribution(&arrival, "arrival")?;
        if transition.len() != n1 || transition.iter().any(|r| r.len() != n1) {
            return Err(Error::model(format!(
                "transition matrix must be {n1}x{n1}"
            )));
        }
        for (i, row) in transition.iter().enumerate() {
            check_distribution(row, &format!("transition row {i}"))?;
        }
        if transition[0][0] != 1.0 {
            return Err(Error::model("state 0 must be absorbing"));
        }
        let model = McModel {
            arrival,
            transition,
        };
        model.check_reachability()?;
        Ok(model)
    }

    pub(crate) fn new_unchecked(arrival: Vec<f64>, transition: Vec<Vec<f64>>) -> Self {
        McModel {
            arrival,
            transition,
        }
    }

    /// Rejects chains where some product can stay among products forever.
    ///
    /// Iterates `q <- ρ_TT q` from the all-ones vector for `10 n` steps over
    /// all products; any survival probability above `1 - 1e-9` fails.
    fn check_reachability(&self) -> Result<()> {
        let n = self.n();
        let mut q = vec![1.0; n];
        for _ in 0..(10 * n).max(1) {
            q = (1..=n)
                .map(|i| (1..=n).map(|k| self.transition[i][k] * q[k - 1]).sum())
                .collect();
        }
        match q.iter().position(|&x| x > 1.0 - 1e-9) {
            Some(k) => Err(Error::model(format!(
                "no-purchase state is not reachable from product {}",
                k + 1
            ))),
            None => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.arrival.len() - 1
    }

    pub fn arrival(&self) -> &[f64] {
        &self.arrival
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    /// Replaces the arrival vector, keeping the transition matrix.
    pub fn with_arrival(&self, arrival: Vec<f64>) -> Result<Self> {
        if arrival.len() != self.arrival.len() {
            return Err(Error::domain("arrival length does not match the chain"));
        }
        check_distribution(&arrival, "arrival")?;
        Ok(McModel {
            arrival,
            transition: self.transition.clone(),
        })
    }

    /// Absorption distribution of the chain started from `arrival`, absorbing on `s ∪ {0}`.
    ///
    /// `arrival` need not be normalized; the result scales linearly with it.
    pub fn absorb(&self, arrival: &[f64], s: &Assortment) -> Result<Vec<f64>> {
        let n = self.n();
        if arrival.len() != n + 1 {
            return Err(Error::domain("arrival length does not match the chain"));
        }
        let offered = s.offered_mask(n)?;
        let transient: Vec<usize> = (1..=n).filter(|&i| !offered[i]).collect();
        // Expected visits x to transient states: (I - ρ_TTᵀ) x = arrival_T.
        let m = transient.len();
        let mut a = vec![vec![0.0; m]; m];
        for (r, &i) in transient.iter().enumerate() {
            for (c, &k) in transient.iter().enumerate() {
                a[r][c] = -self.transition[k][i];
            }
            a[r][r] += 1.0;
        }
        let rhs: Vec<f64> = transient.iter().map(|&i| arrival[i]).collect();
        let visits = solve_dense(a, rhs).ok_or_else(|| {
            Error::model("transient block is singular; the chain cannot reach an offered option")
        })?;
        let mut p = vec![0.0; n + 1];
        for j in (0..=n).filter(|&j| offered[j]) {
            p[j] = arrival[j]
                + transient
                    .iter()
                    .zip(&visits)
                    .map(|(&i, x)| x * self.transition[i][j])
                    .sum::<f64>();
        }
        Ok(p)
    }

    /// Choice probabilities over `0..=n` from the model's own arrival vector.
    pub fn choice_prob(&self, s: &Assortment) -> Result<Vec<f64>> {
        self.absorb(&self.arrival, s)
    }

    /// Choice probabilities for a customer first attracted to the unavailable product `l`.
    pub fn conditional_prob(&self, s: &Assortment, l: usize) -> Result<Vec<f64>> {
        let n = self.n();
        if l == 0 || l > n {
            return Err(Error::domain(format!("product {l} is outside 1..={n}")));
        }
        if s.contains(l) {
            return Err(Error::precondition(format!("product {l} is offered in {s}")));
        }
        let mut e = vec![0.0; n + 1];
        e[l] = 1.0;
        self.absorb(&e, s)
    }

    /// Walks the chain from `start` until an option in `offered` absorbs it.
    pub fn walk<R: Rng + ?Sized>(&self, start: usize, offered: &[bool], rng: &mut R) -> usize {
        let mut state = start;
        // The reachability check makes long walks vanishingly unlikely.
        for _ in 0..10_000_000 {
            if offered[state] {
                return state;
            }
            state = sample_index(&self.transition[state], rng);
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_product_exit_chain(arrival: Vec<f64>) -> McModel {
        let t = vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ];
        McModel::new(arrival, t).unwrap()
    }

    #[test]
    fn full_assortment_returns_arrival() {
        let m = McModel::new(
            vec![0.1, 0.2, 0.3, 0.4],
            vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.2, 0.0, 0.5, 0.3],
                vec![0.1, 0.6, 0.0, 0.3],
                vec![0.5, 0.25, 0.25, 0.0],
            ],
        )
        .unwrap();
        assert_eq!(m.choice_prob(&Assortment::full(3)).unwrap(), m.arrival());
    }

    #[test]
    fn exit_chain_loses_unoffered_arrivals() {
        let m = two_product_exit_chain(vec![0.0, 1.0, 0.0]);
        let p = m.choice_prob(&Assortment::from([2])).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_closed_product_loop() {
        let t = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ];
        assert!(matches!(
            McModel::new(vec![1.0, 0.0, 0.0], t),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn rejects_bad_rows() {
        let t = vec![vec![1.0, 0.0], vec![0.5, 0.4]];
        assert!(McModel::new(vec![1.0, 0.0], t).is_err());
        let t = vec![vec![0.5, 0.5], vec![1.0, 0.0]];
        assert!(McModel::new(vec![1.0, 0.0], t).is_err());
    }

    #[test]
    fn conditional_from_unavailable_product() {
        let m = McModel::new(
            vec![1.0, 0.0, 0.0],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.25, 0.0, 0.75],
                vec![0.5, 0.5, 0.0],
            ],
        )
        .unwrap();
        let p = m.conditional_prob(&Assortment::from([2]), 1).unwrap();
        assert!((p[2] - 0.75).abs() < 1e-15 && (p[0] - 0.25).abs() < 1e-15);
        assert!(m.conditional_prob(&Assortment::from([1]), 1).is_err());
    }

    #[test]
    fn empty_assortment_absorbs_everything_at_zero() {
        let m = McModel::new(
            vec![0.2, 0.5, 0.3],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.1, 0.0, 0.9],
                vec![0.3, 0.7, 0.0],
            ],
        )
        .unwrap();
        let p = m.choice_prob(&Assortment::empty()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }
}
