use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::model::CrossCatModel;
use crate::optimize::{check_prices, evaluate_revenue, AssortmentSolution};

const MAX_TOTAL_PRODUCTS: usize = 20;
const TIE: f64 = 1e-12;

/// Exhaustive search over every combination of assortments.
///
/// `caps[u]`, when given, bounds the size of category `u`'s assortment.
/// Among revenue ties (within 1e-12) the lexicographically smallest list of
/// sets wins. Only for models with at most 20 products in total.
pub fn brute_force_optimal(
    model: &CrossCatModel,
    prices: &[Vec<f64>],
    caps: Option<&[Option<usize>]>,
) -> Result<AssortmentSolution> {
    check_prices(model, prices)?;
    let sizes = model.sizes();
    let total: usize = sizes.iter().sum();
    if total > MAX_TOTAL_PRODUCTS {
        return Err(Error::precondition(format!(
            "brute force over {total} products exceeds the limit of {MAX_TOTAL_PRODUCTS}"
        )));
    }
    let caps: Vec<Option<usize>> = match caps {
        Some(c) if c.len() == sizes.len() => c.to_vec(),
        Some(_) => return Err(Error::domain("one cardinality bound per category expected")),
        None => vec![None; sizes.len()],
    };
    let mut search = Search {
        model,
        prices,
        caps: &caps,
        sets: vec![Assortment::empty(); sizes.len()],
        marg: vec![Vec::new(); sizes.len()],
        best: None,
    };
    search.visit(0, 0.0)?;
    let (_, sets) = search.best.expect("the empty assortment is always feasible");
    let revenue = evaluate_revenue(model, prices, &sets)?;
    Ok(AssortmentSolution {
        categories: model.nodes().iter().map(|n| n.id.clone()).collect(),
        sets,
        revenue,
        bellman: Vec::new(),
        adjusted_prices: Vec::new(),
    })
}

struct Search<'a> {
    model: &'a CrossCatModel,
    prices: &'a [Vec<f64>],
    caps: &'a [Option<usize>],
    sets: Vec<Assortment>,
    marg: Vec<Vec<f64>>,
    best: Option<(f64, Vec<Assortment>)>,
}

impl Search<'_> {
    /// Fixes the assortment of the `depth`-th category in topological order.
    fn visit(&mut self, depth: usize, acc: f64) -> Result<()> {
        let order = self.model.topo_order();
        if depth == order.len() {
            let better = match &self.best {
                None => true,
                Some((rev, sets)) => acc > rev + TIE || (acc >= rev - TIE && self.sets < *sets),
            };
            if better {
                self.best = Some((acc, self.sets.clone()));
            }
            return Ok(());
        }
        let u = order[depth];
        let n = self.model.node(u).n();
        for mask in 0..1u64 << n {
            let s = Assortment::from_mask(mask, n);
            if self.caps[u].is_some_and(|k| s.len() > k) {
                continue;
            }
            let dist = self.marginal(u, &s)?;
            let gain: f64 = dist.iter().zip(&self.prices[u]).map(|(p, r)| p * r).sum();
            self.sets[u] = s;
            self.marg[u] = dist;
            self.visit(depth + 1, acc + gain)?;
        }
        self.sets[u] = Assortment::empty();
        Ok(())
    }

    fn marginal(&self, u: usize, s: &Assortment) -> Result<Vec<f64>> {
        let kernel = &self.model.node(u).kernel;
        let parents = self.model.parents(u);
        if parents.is_empty() {
            return kernel.choice_prob(s);
        }
        let mut attraction = vec![0.0; kernel.n() + 1];
        let share = 1.0 / parents.len() as f64;
        for &(e, p) in parents {
            for (row, &w) in self.model.edges()[e].lambda.iter().zip(&self.marg[p]) {
                for (a, x) in attraction.iter_mut().zip(row) {
                    *a += share * w * x;
                }
            }
        }
        kernel.substitute(&attraction, s)
    }
}
