use crate::assortment::Assortment;
use crate::choice::MnlModel;
use crate::error::{Error, Result};

const SEARCH_TOL: f64 = 1e-9;
const SEARCH_CAP: usize = 200;

/// Expected revenue of offering `s` under an MNL model, including `prices[0]` for no purchase.
pub fn mnl_revenue(model: &MnlModel, prices: &[f64], s: &Assortment) -> Result<f64> {
    let p = model.choice_prob(s)?;
    Ok(p.iter().zip(prices).map(|(p, r)| p * r).sum())
}

/// Best assortment with at most `k` products under an MNL model.
///
/// Bisects on the revenue target `z`: a target is attainable exactly when the
/// `k` largest positive terms `v_i (r_i - z)` sum to at least `z`. Prices are
/// indexed `0..=n`; a nonzero `prices[0]` is shifted out first.
pub fn mnl_cardinality_assortment(model: &MnlModel, prices: &[f64], k: usize) -> Result<Assortment> {
    let n = model.n();
    if prices.len() != n + 1 {
        return Err(Error::domain(format!(
            "expected {} prices, got {}",
            n + 1,
            prices.len()
        )));
    }
    if k == 0 {
        return Ok(Assortment::empty());
    }
    let r: Vec<f64> = prices.iter().map(|p| p - prices[0]).collect();
    let top = |z: f64| -> (f64, Assortment) {
        let mut terms: Vec<(f64, usize)> = (1..=n)
            .map(|i| (model.weight(i) * (r[i] - z), i))
            .filter(|&(t, _)| t > 0.0)
            .collect();
        terms.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        terms.truncate(k);
        (terms.iter().map(|t| t.0).sum(), terms.iter().map(|t| t.1).collect())
    };
    let (mut lo, mut hi) = (0.0, r.iter().skip(1).fold(0.0f64, |m, &x| m.max(x)));
    for _ in 0..SEARCH_CAP {
        if hi - lo < SEARCH_TOL {
            break;
        }
        let z = 0.5 * (lo + hi);
        if top(z).0 >= z {
            lo = z;
        } else {
            hi = z;
        }
    }
    let revenue = |s: &Assortment| mnl_revenue(model, &r, s);
    let mut best = Assortment::empty();
    let mut best_rev = 0.0;
    for cand in [top(lo).1, top(hi).1] {
        let rev = revenue(&cand)?;
        if rev > best_rev + 1e-15 {
            best = cand;
            best_rev = rev;
        }
    }
    Ok(best)
}
