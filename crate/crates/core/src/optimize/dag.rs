use crate::assortment::Assortment;
use crate::choice::ChoiceKernel;
use crate::error::{Error, Result};
use crate::model::CrossCatModel;
use crate::optimize::cardinality::mnl_cardinality_assortment;
use crate::optimize::invariant::{mc_invariant_assortment, policy_values};
use crate::optimize::{check_prices, evaluate_revenue, shift_prices, AssortmentSolution};

/// Unconstrained optimum of a two-category model given each category's prices.
pub fn optimize_two_category(
    model: &CrossCatModel,
    prices_a: &[f64],
    prices_b: &[f64],
) -> Result<AssortmentSolution> {
    let edge = &model.edges()[model.two_category_edge()?];
    let a = model.node_index(&edge.from)?;
    let mut prices = vec![Vec::new(); 2];
    prices[a] = prices_a.to_vec();
    prices[1 - a] = prices_b.to_vec();
    optimize_dag(model, &prices)
}

/// Unconstrained optimum by backward induction over a forest of categories.
///
/// `prices[u]` covers options `0..=n_u` of category `u` in model order.
pub fn optimize_dag(model: &CrossCatModel, prices: &[Vec<f64>]) -> Result<AssortmentSolution> {
    backward_induction(model, prices, &vec![None; model.nodes().len()])
}

/// Like [`optimize_dag`], with at most `k` products offered in each listed root category.
///
/// Constrained roots must use an MNL kernel.
pub fn optimize_root_constrained(
    model: &CrossCatModel,
    prices: &[Vec<f64>],
    limits: &[(&str, usize)],
) -> Result<AssortmentSolution> {
    let mut caps = vec![None; model.nodes().len()];
    for &(id, k) in limits {
        let u = model.node_index(id)?;
        if !model.parents(u).is_empty() {
            return Err(Error::UnsupportedStructure(format!(
                "cardinality limit on non-root category {id}"
            )));
        }
        if !matches!(model.node(u).kernel, ChoiceKernel::Mnl(_)) {
            return Err(Error::UnsupportedStructure(format!(
                "cardinality limit on category {id} requires an MNL kernel"
            )));
        }
        caps[u] = Some(k);
    }
    backward_induction(model, prices, &caps)
}

fn backward_induction(
    model: &CrossCatModel,
    prices: &[Vec<f64>],
    caps: &[Option<usize>],
) -> Result<AssortmentSolution> {
    check_prices(model, prices)?;
    if let Some(node) = model.nodes().iter().enumerate().find(|(u, _)| model.parents(*u).len() > 1) {
        return Err(Error::UnsupportedStructure(format!(
            "category {} has {} parents; optimization needs in-degree at most 1",
            node.1.id,
            model.parents(node.0).len()
        )));
    }
    let count = model.nodes().len();
    let mut sets = vec![Assortment::empty(); count];
    let mut bellman = vec![Vec::new(); count];
    let mut adjusted = prices.to_vec();
    for &u in model.topo_order().iter().rev() {
        let n_u = model.node(u).n();
        for &(e, w) in model.children(u) {
            let child = &model.node(w).kernel;
            for i in 0..=n_u {
                let dist = child.substitute(&model.edges()[e].lambda[i], &sets[w])?;
                adjusted[u][i] += dist.iter().zip(&adjusted[w]).map(|(p, r)| p * r).sum::<f64>();
            }
        }
        let shifted = shift_prices(&adjusted[u]);
        let kernel = &model.node(u).kernel;
        let chain = kernel.as_markov_chain()?;
        let (set, g) = match (caps[u], kernel) {
            (Some(k), ChoiceKernel::Mnl(mnl)) => {
                let set = mnl_cardinality_assortment(mnl, &shifted, k)?;
                let mut stop = set.offered_mask(n_u)?;
                stop[0] = true;
                let g = policy_values(chain.transition(), &shifted, &stop)
                    .ok_or_else(|| Error::model("singular system evaluating constrained root"))?;
                (set, g)
            }
            _ => mc_invariant_assortment(chain.transition(), &shifted)?,
        };
        sets[u] = set;
        bellman[u] = g;
    }
    let revenue = evaluate_revenue(model, prices, &sets)?;
    Ok(AssortmentSolution {
        categories: model.nodes().iter().map(|n| n.id.clone()).collect(),
        sets,
        revenue,
        bellman,
        adjusted_prices: adjusted,
    })
}
