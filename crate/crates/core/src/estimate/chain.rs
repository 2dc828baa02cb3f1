use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::MnlModel;
use crate::error::{Error, Result};
use crate::estimate::em::{run_edges, EdgeObs, EdgeParams, EmOptions};
use crate::estimate::mnl_mle::fit_mnl_mle;
use crate::model::{CategoryNode, CrossCatModel, Edge};

/// One transaction along a path of categories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainObservation {
    pub sets: Vec<Assortment>,
    pub choices: Vec<usize>,
}

/// Attraction rows into one category and that category's MNL weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub lambda: Vec<Vec<f64>>,
    pub weights: MnlModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub root: MnlModel,
    pub links: Vec<ChainLink>,
}

impl ChainParams {
    /// Path model with categories named `C0`, `C1`, ...
    pub fn to_model(&self) -> Result<CrossCatModel> {
        let mut nodes = vec![CategoryNode::new("C0", self.root.clone())];
        let mut edges = Vec::new();
        for (k, link) in self.links.iter().enumerate() {
            nodes.push(CategoryNode::new(format!("C{}", k + 1), link.weights.clone()));
            edges.push(Edge::new(format!("C{k}"), format!("C{}", k + 1), link.lambda.clone()));
        }
        CrossCatModel::new(nodes, edges)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub params: ChainParams,
    pub ll_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Category sizes along the path if `model` is a single directed path.
pub fn chain_sizes(model: &CrossCatModel) -> Result<Vec<usize>> {
    let count = model.nodes().len();
    let order = model.topo_order();
    let is_path = model.edges().len() + 1 == count
        && order.windows(2).all(|w| {
            model.children(w[0]).len() == 1 && model.children(w[0])[0].1 == w[1]
        });
    if !is_path {
        return Err(Error::UnsupportedStructure(
            "chain estimation needs the categories to form one directed path".into(),
        ));
    }
    Ok(order.iter().map(|&u| model.node(u).n()).collect())
}

/// EM for a path of MNL categories.
///
/// The root is fitted once by maximum likelihood. Each link's attraction
/// rows and downstream weights are updated from that link's own latent
/// posteriors; the stopping rule applies to the total log-likelihood.
pub fn fit_chain_em(data: &[ChainObservation], sizes: &[usize], opts: &EmOptions) -> Result<ChainReport> {
    if sizes.is_empty() {
        return Err(Error::domain("a chain needs at least one category"));
    }
    for (t, o) in data.iter().enumerate() {
        if o.sets.len() != sizes.len() || o.choices.len() != sizes.len() {
            return Err(Error::Data(format!("observation {t} does not cover every category")));
        }
        for ((s, &c), &n) in o.sets.iter().zip(&o.choices).zip(sizes) {
            s.check(n)?;
            if c != 0 && !s.contains(c) {
                return Err(Error::Data(format!("observation {t}: choice {c} not offered in {s}")));
            }
        }
    }
    let root_pairs: Vec<(Assortment, usize)> =
        data.iter().map(|o| (o.sets[0].clone(), o.choices[0])).collect();
    let root = fit_mnl_mle(&root_pairs, sizes[0], opts.cap)?;
    let base: f64 = root_pairs
        .iter()
        .map(|(s, c)| (root.weight(*c) / (root.total_weight(s) + 1.0)).ln())
        .sum();
    let obs: Vec<Vec<EdgeObs>> = (1..sizes.len())
        .map(|k| {
            data.iter()
                .map(|o| EdgeObs {
                    up: o.choices[k - 1],
                    set: &o.sets[k],
                    choice: o.choices[k],
                })
                .collect()
        })
        .collect();
    let mut edges: Vec<EdgeParams> = sizes
        .windows(2)
        .map(|w| EdgeParams {
            lambda: vec![vec![1.0 / (w[1] + 1) as f64; w[1] + 1]; w[0] + 1],
            v: MnlModel::uniform(w[1]),
        })
        .collect();
    let (ll_trace, iterations, converged) = run_edges(&mut edges, &obs, base, data.len(), opts)?;
    Ok(ChainReport {
        params: ChainParams {
            root,
            links: edges
                .into_iter()
                .map(|e| ChainLink {
                    lambda: e.lambda,
                    weights: e.v,
                })
                .collect(),
        },
        ll_trace,
        iterations,
        converged,
    })
}
