//! Fit, prediction and complementarity metrics.

use serde::Serialize;

use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::estimate::{FittedModel, Observation, TwoCatParams};

/// Predicted probabilities for the options a customer could pick.
pub type ScoredOptions = Vec<(usize, f64)>;

/// Restricts a full distribution over `0..=n` to `s ∪ {0}`.
pub fn options_from(dist: &[f64], s: &Assortment) -> ScoredOptions {
    std::iter::once(0).chain(s.iter()).map(|j| (j, dist[j])).collect()
}

/// 1-based rank of `chosen` when sorting by probability descending, ties by index ascending.
pub fn rank_of(options: &[(usize, f64)], chosen: usize) -> Result<usize> {
    let &(_, pc) = options
        .iter()
        .find(|(j, _)| *j == chosen)
        .ok_or_else(|| Error::domain(format!("chosen option {chosen} was not available")))?;
    Ok(1 + options
        .iter()
        .filter(|&&(j, p)| p > pc || (p == pc && j < chosen))
        .count())
}

fn check_lengths(predictions: &[ScoredOptions], chosen: &[usize]) -> Result<()> {
    if predictions.len() != chosen.len() {
        return Err(Error::domain("predictions and choices differ in length"));
    }
    if predictions.is_empty() {
        return Err(Error::Data("no transactions to score".into()));
    }
    Ok(())
}

/// Share of transactions whose choice ranks within the top `k`.
pub fn top_k_hit_rate(predictions: &[ScoredOptions], chosen: &[usize], k: usize) -> Result<f64> {
    check_lengths(predictions, chosen)?;
    let mut hits = 0usize;
    for (p, &c) in predictions.iter().zip(chosen) {
        if rank_of(p, c)? <= k {
            hits += 1;
        }
    }
    Ok(hits as f64 / chosen.len() as f64)
}

/// Mean rank of the chosen option (1 is best).
pub fn rank_accuracy(predictions: &[ScoredOptions], chosen: &[usize]) -> Result<f64> {
    check_lengths(predictions, chosen)?;
    let mut total = 0usize;
    for (p, &c) in predictions.iter().zip(chosen) {
        total += rank_of(p, c)?;
    }
    Ok(total as f64 / chosen.len() as f64)
}

/// Top-1 accuracy among products only, over transactions that ended in a purchase.
pub fn effective_hit_rate(predictions: &[ScoredOptions], chosen: &[usize]) -> Result<f64> {
    if predictions.len() != chosen.len() {
        return Err(Error::domain("predictions and choices differ in length"));
    }
    let mut purchases = 0usize;
    let mut hits = 0usize;
    for (p, &c) in predictions.iter().zip(chosen) {
        if c == 0 {
            continue;
        }
        purchases += 1;
        let best = p
            .iter()
            .filter(|(j, _)| *j != 0)
            .fold(None::<(usize, f64)>, |best, &(j, q)| match best {
                Some((bj, bq)) if bq > q || (bq == q && bj < j) => Some((bj, bq)),
                _ => Some((j, q)),
            });
        if best.map(|b| b.0) == Some(c) {
            hits += 1;
        }
    }
    if purchases == 0 {
        return Err(Error::Data("effective hit rate is undefined without purchases".into()));
    }
    Ok(hits as f64 / purchases as f64)
}

/// Co-purchase counts `c(i, j)` over A options `0..=n_A` and B options `0..=n_B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoCount {
    pub counts: Vec<Vec<u64>>,
}

impl CoCount {
    pub fn zeros(n_a: usize, n_b: usize) -> Self {
        CoCount {
            counts: vec![vec![0; n_b + 1]; n_a + 1],
        }
    }

    pub fn from_observations(data: &[Observation], n_a: usize, n_b: usize) -> Result<Self> {
        let mut c = CoCount::zeros(n_a, n_b);
        for o in data {
            if o.a > n_a || o.b > n_b {
                return Err(Error::Data(format!("choice ({}, {}) out of range", o.a, o.b)));
            }
            c.counts[o.a][o.b] += 1;
        }
        Ok(c)
    }

    fn margins(&self) -> (Vec<u64>, Vec<u64>, u64) {
        let rows: Vec<u64> = self.counts.iter().map(|r| r.iter().sum()).collect();
        let cols = self.counts.first().map_or(0, Vec::len);
        let cols: Vec<u64> = (0..cols).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect();
        let total = rows.iter().sum();
        (rows, cols, total)
    }

    /// True when every non-empty row is exactly proportional to the column totals.
    pub fn is_decoupled(&self) -> bool {
        let (rows, cols, total) = self.margins();
        self.counts.iter().zip(&rows).all(|(row, &f)| {
            f == 0
                || row
                    .iter()
                    .zip(&cols)
                    .all(|(&c, &col)| u128::from(c) * u128::from(total) == u128::from(f) * u128::from(col))
        })
    }
}

/// Weighted L1 distance between each row's conditional distribution and the aggregate.
///
/// Lies in `[0, 2]`; rows without transactions contribute nothing.
pub fn cm_score(counts: &CoCount) -> Result<f64> {
    let (rows, cols, total) = counts.margins();
    if total == 0 {
        return Err(Error::Data("co-purchase counts are all zero".into()));
    }
    let total = total as f64;
    let aggregate: Vec<f64> = cols.iter().map(|&c| c as f64 / total).collect();
    Ok(counts
        .counts
        .iter()
        .zip(&rows)
        .filter(|(_, &f)| f > 0)
        .map(|(row, &f)| {
            let dev: f64 = row
                .iter()
                .zip(&aggregate)
                .map(|(&c, &p)| (c as f64 / f as f64 - p).abs())
                .sum();
            f as f64 / total * dev
        })
        .sum())
}

/// Lift of each attraction probability over B's full-assortment MNL share.
///
/// Column 0 compares against the no-purchase share, so every row sums to zero.
pub fn scs(params: &TwoCatParams) -> Vec<Vec<f64>> {
    let v = &params.v_b;
    let denom = v.weights().iter().sum::<f64>() + 1.0;
    params
        .lambda
        .iter()
        .map(|row| row.iter().enumerate().map(|(j, l)| l - v.weight(j) / denom).collect())
        .collect()
}

/// Test-set summary for one fitted model.
#[derive(Clone, Debug, Serialize)]
pub struct MetricReport {
    pub model: String,
    /// Total log-likelihood of B choices given A choices.
    pub ll_b: f64,
    /// Mean of `ll_b` per transaction.
    pub avg_ll_b: f64,
    pub top_k_hit: Vec<(usize, f64)>,
    pub rank_acc: f64,
    /// `None` when the data hold no B purchase.
    pub ehr: Option<f64>,
}

/// Scores `model`'s B-category predictions on `data`.
pub fn evaluate_model(model: &FittedModel, data: &[Observation], ks: &[usize]) -> Result<MetricReport> {
    let mut predictions = Vec::with_capacity(data.len());
    let mut chosen = Vec::with_capacity(data.len());
    for o in data {
        predictions.push(options_from(&model.predict_b(o.a, &o.s_b)?, &o.s_b));
        chosen.push(o.b);
    }
    let ll_b = model.loglik_b(data)?;
    let top_k_hit = ks
        .iter()
        .map(|&k| top_k_hit_rate(&predictions, &chosen, k).map(|h| (k, h)))
        .collect::<Result<_>>()?;
    Ok(MetricReport {
        model: model.label().to_string(),
        ll_b,
        avg_ll_b: ll_b / data.len().max(1) as f64,
        top_k_hit,
        rank_acc: rank_accuracy(&predictions, &chosen)?,
        ehr: effective_hit_rate(&predictions, &chosen).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::MnlModel;
    use crate::estimate::DEFAULT_CAP;

    #[test]
    fn ranks_break_ties_by_index() {
        let opts = vec![(0, 0.25), (1, 0.25), (2, 0.5)];
        assert_eq!(rank_of(&opts, 2).unwrap(), 1);
        assert_eq!(rank_of(&opts, 0).unwrap(), 2);
        assert_eq!(rank_of(&opts, 1).unwrap(), 3);
        assert!(rank_of(&opts, 3).is_err());
    }

    #[test]
    fn uniform_predictions_hand_case() {
        // Uniform over {0,1,2,3}: ranks equal index + 1, so the mean is 22/10.
        let p: ScoredOptions = (0..4).map(|j| (j, 0.25)).collect();
        let chosen = [0, 1, 2, 3, 0, 1, 2, 3, 0, 0];
        let preds = vec![p; 10];
        assert!((top_k_hit_rate(&preds, &chosen, 2).unwrap() - 0.6).abs() < 1e-15);
        assert!((rank_accuracy(&preds, &chosen).unwrap() - 2.2).abs() < 1e-12);
    }

    #[test]
    fn reversed_predictor_ranks_last() {
        let preds = vec![vec![(0, 0.5), (1, 0.3), (2, 0.2)]];
        assert_eq!(rank_accuracy(&preds, &[2]).unwrap(), 3.0);
    }

    #[test]
    fn effective_hit_rate_hand_case() {
        let p = vec![(0, 0.6), (1, 0.3), (2, 0.1)];
        let q = vec![(0, 0.1), (1, 0.2), (2, 0.7)];
        let preds = vec![p.clone(), p.clone(), q.clone(), q, p];
        // Purchases: 1 (hit), 2 (miss), 2 (hit), 1 (miss); the last row has no purchase.
        let chosen = [1, 2, 2, 1, 0];
        assert_eq!(effective_hit_rate(&preds, &chosen).unwrap(), 0.5);
        assert!(effective_hit_rate(&preds[..1], &[0]).is_err());
    }

    #[test]
    fn cm_examples() {
        let diag = CoCount {
            counts: vec![vec![10, 0], vec![0, 10]],
        };
        assert!((cm_score(&diag).unwrap() - 1.0).abs() < 1e-15);
        let prop = CoCount {
            counts: vec![vec![2, 4, 6], vec![1, 2, 3], vec![0, 0, 0]],
        };
        assert_eq!(cm_score(&prop).unwrap(), 0.0);
        assert!(prop.is_decoupled());
        assert!(!diag.is_decoupled());
        assert!(cm_score(&CoCount::zeros(1, 1)).is_err());
    }

    #[test]
    fn scs_fixture_and_row_sums() {
        let p = TwoCatParams::new(
            MnlModel::uniform(1),
            MnlModel::new(vec![0.0, 1.0, 2.0]).unwrap(),
            vec![
                vec![0.25, 0.25, 0.25, 0.25],
                vec![1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0],
            ],
            DEFAULT_CAP,
        )
        .unwrap();
        let m = scs(&p);
        assert!((m[1][2] - 1.0 / 12.0).abs() < 1e-15);
        for row in &m {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }
}
