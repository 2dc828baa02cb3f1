use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;

const VI_TOL: f64 = 1e-10;
const VI_CAP: usize = 100_000;
/// Slack when comparing a price with its continuation value; ties are offered.
const TIE_TOL: f64 = 1e-12;

/// Optimal unconstrained assortment of a Markov chain kernel, valid for every arrival vector.
///
/// `prices[0]` must be zero (shift first). Products with negative price are
/// never offered. Returns the assortment and the value vector `g` with
/// `g[0] = 0` and `g[i] = max(r_i, Σ_j ρ_ij g_j)` for offerable products.
pub fn mc_invariant_assortment(
    transition: &[Vec<f64>],
    prices: &[f64],
) -> Result<(Assortment, Vec<f64>)> {
    let n1 = prices.len();
    if n1 == 0 || transition.len() != n1 || transition.iter().any(|r| r.len() != n1) {
        return Err(Error::domain("prices and transition matrix sizes differ"));
    }
    if prices[0] != 0.0 {
        return Err(Error::precondition(format!(
            "no-purchase price is {}; shift prices first",
            prices[0]
        )));
    }
    if prices.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("prices must be finite"));
    }
    let offerable: Vec<bool> = prices.iter().enumerate().map(|(i, &r)| i > 0 && r >= 0.0).collect();
    let continuation = |g: &[f64], i: usize| -> f64 {
        transition[i].iter().zip(g).skip(1).map(|(p, v)| p * v).sum()
    };

    let mut g: Vec<f64> = (0..n1).map(|i| if offerable[i] { prices[i] } else { 0.0 }).collect();
    for iter in 1..=VI_CAP {
        let next: Vec<f64> = (0..n1)
            .map(|i| match i {
                0 => 0.0,
                _ if offerable[i] => prices[i].max(continuation(&g, i)),
                _ => continuation(&g, i),
            })
            .collect();
        let change = next.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        g = next;
        if change < VI_TOL {
            break;
        }
        // Periodically try to finish exactly by evaluating the current stopping policy.
        if iter % 64 == 0 {
            if let Some(exact) = polish(transition, prices, &offerable, &g) {
                g = exact;
                break;
            }
        }
        if iter == VI_CAP {
            return Err(Error::Convergence {
                what: "invariant assortment value iteration".into(),
                iterations: VI_CAP,
            });
        }
    }
    if let Some(exact) = polish(transition, prices, &offerable, &g) {
        g = exact;
    }
    let set = (1..n1)
        .filter(|&i| offerable[i] && prices[i] >= continuation(&g, i) - TIE_TOL * prices[i].abs().max(1.0))
        .collect();
    Ok((set, g))
}

/// Values of the stopping policy implied by `g`, if they satisfy the Bellman equation.
fn polish(transition: &[Vec<f64>], prices: &[f64], offerable: &[bool], g: &[f64]) -> Option<Vec<f64>> {
    let n1 = prices.len();
    let cont = |v: &[f64], i: usize| -> f64 {
        transition[i].iter().zip(v).skip(1).map(|(p, x)| p * x).sum()
    };
    let stop: Vec<bool> = (0..n1)
        .map(|i| i == 0 || (offerable[i] && prices[i] >= cont(g, i)))
        .collect();
    let exact = policy_values(transition, prices, &stop)?;
    let residual = (1..n1).fold(0.0f64, |m, i| {
        let target = if offerable[i] { prices[i].max(cont(&exact, i)) } else { cont(&exact, i) };
        m.max((target - exact[i]).abs())
    });
    (residual < VI_TOL).then_some(exact)
}

/// Expected collected price when stopping on `stop` (state 0 pays nothing).
pub(crate) fn policy_values(transition: &[Vec<f64>], prices: &[f64], stop: &[bool]) -> Option<Vec<f64>> {
    let n1 = prices.len();
    let free: Vec<usize> = (1..n1).filter(|&i| !stop[i]).collect();
    let mut a = vec![vec![0.0; free.len()]; free.len()];
    let mut b = vec![0.0; free.len()];
    for (r, &i) in free.iter().enumerate() {
        for (c, &k) in free.iter().enumerate() {
            a[r][c] = -transition[i][k];
        }
        a[r][r] += 1.0;
        b[r] = (1..n1).filter(|&j| stop[j]).map(|j| transition[i][j] * prices[j]).sum();
    }
    let x = solve_dense(a, b)?;
    let mut g: Vec<f64> = (0..n1).map(|i| if stop[i] && i > 0 { prices[i] } else { 0.0 }).collect();
    for (&i, v) in free.iter().zip(x) {
        g[i] = v;
    }
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_chain_offers_everything() {
        let t = vec![vec![1.0, 0.0, 0.0]; 3];
        let (s, g) = mc_invariant_assortment(&t, &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(s, Assortment::from([1, 2]));
        assert_eq!(g, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn zero_prices_include_all() {
        let t = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ];
        let (s, g) = mc_invariant_assortment(&t, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s, Assortment::full(2));
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn cheap_product_dropped_when_substitute_is_likely() {
        // Product 1 almost always redirects to the expensive product 2.
        let t = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.05, 0.0, 0.95],
            vec![1.0, 0.0, 0.0],
        ];
        let (s, g) = mc_invariant_assortment(&t, &[0.0, 1.0, 10.0]).unwrap();
        assert_eq!(s, Assortment::from([2]));
        assert!((g[1] - 9.5).abs() < 1e-12);
    }

    #[test]
    fn negative_prices_never_offered() {
        let t = vec![vec![1.0, 0.0, 0.0]; 3];
        let (s, _) = mc_invariant_assortment(&t, &[0.0, -1.0, 2.0]).unwrap();
        assert_eq!(s, Assortment::from([2]));
    }

    #[test]
    fn requires_shifted_prices() {
        let t = vec![vec![1.0, 0.0]; 2];
        assert!(matches!(
            mc_invariant_assortment(&t, &[1.0, 2.0]),
            Err(Error::Precondition(_))
        ));
    }
}
