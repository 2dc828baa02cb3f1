//! Assortment optimization over category DAGs.

mod brute;
mod cardinality;
mod dag;
mod invariant;
mod prices;

pub use brute::brute_force_optimal;
pub use cardinality::{mnl_cardinality_assortment, mnl_revenue};
pub use dag::{optimize_dag, optimize_root_constrained, optimize_two_category};
pub use invariant::mc_invariant_assortment;
pub use prices::read_prices_csv;

use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::model::CrossCatModel;

/// Optimized assortments, one entry per category in model order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssortmentSolution {
    pub categories: Vec<String>,
    pub sets: Vec<Assortment>,
    pub revenue: f64,
    /// Value vectors `g` of each category's stopping problem, after shifting.
    pub bellman: Vec<Vec<f64>>,
    /// Own price plus expected downstream revenue, before shifting.
    pub adjusted_prices: Vec<Vec<f64>>,
}

/// Subtracts the no-purchase price from every entry.
pub fn shift_prices(prices: &[f64]) -> Vec<f64> {
    match prices.first() {
        Some(&r0) => prices.iter().map(|r| r - r0).collect(),
        None => Vec::new(),
    }
}

pub(crate) fn check_prices(model: &CrossCatModel, prices: &[Vec<f64>]) -> Result<()> {
    if prices.len() != model.nodes().len() {
        return Err(Error::domain(format!(
            "expected price vectors for {} categories, got {}",
            model.nodes().len(),
            prices.len()
        )));
    }
    for (node, p) in model.nodes().iter().zip(prices) {
        if p.len() != node.n() + 1 {
            return Err(Error::domain(format!(
                "category {} needs {} prices (including no purchase), got {}",
                node.id,
                node.n() + 1,
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(format!("category {} has a non-finite price", node.id)));
        }
    }
    Ok(())
}

/// Expected total revenue when every category `u` offers `sets[u]`.
///
/// Includes `prices[u][0]` weighted by the probability of no purchase in `u`.
pub fn evaluate_revenue(model: &CrossCatModel, prices: &[Vec<f64>], sets: &[Assortment]) -> Result<f64> {
    check_prices(model, prices)?;
    let marg = model.marginals(sets)?;
    Ok(marg
        .iter()
        .zip(prices)
        .map(|(m, r)| m.iter().zip(r).map(|(p, x)| p * x).sum::<f64>())
        .sum())
}
