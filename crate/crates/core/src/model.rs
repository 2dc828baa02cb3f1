//! Cross-category model: a DAG of categories linked by attraction matrices.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::choice::{check_distribution, ChoiceKernel};
use crate::error::{Error, Result};
use crate::sampling::sample_index;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryNode {
    pub id: String,
    pub kernel: ChoiceKernel,
}

impl CategoryNode {
    pub fn new(id: impl Into<String>, kernel: impl Into<ChoiceKernel>) -> Self {
        CategoryNode {
            id: id.into(),
            kernel: kernel.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }
}

/// Attraction matrix between two categories.
///
/// Row `i` is the initial-attraction distribution over the target's options
/// `0..=n_to` for a customer who chose option `i` in the source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub lambda: Vec<Vec<f64>>,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, lambda: Vec<Vec<f64>>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            lambda,
        }
    }
}

#[derive(Deserialize)]
struct RawNode {
    id: String,
    kernel: ChoiceKernel,
    #[serde(default)]
    n: Option<usize>,
}

#[derive(Deserialize)]
struct RawModel {
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<Edge>,
}

/// Categories arranged in a DAG. Option 0 of every category is no purchase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct CrossCatModel {
    nodes: Vec<CategoryNode>,
    edges: Vec<Edge>,
    #[serde(skip)]
    topo: Vec<usize>,
    #[serde(skip)]
    incoming: Vec<Vec<(usize, usize)>>,
    #[serde(skip)]
    outgoing: Vec<Vec<(usize, usize)>>,
}

impl TryFrom<RawModel> for CrossCatModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let mut nodes = Vec::with_capacity(raw.nodes.len());
        for node in raw.nodes {
            if let Some(n) = node.n {
                if n != node.kernel.n() {
                    return Err(Error::model(format!(
                        "category {} declares n = {n} but its kernel has {} products",
                        node.id,
                        node.kernel.n()
                    )));
                }
            }
            nodes.push(CategoryNode::new(node.id, node.kernel));
        }
        CrossCatModel::new(nodes, raw.edges)
    }
}

/// Joint choice probabilities `P(i, j)` of a two-category model, full `(n_A+1) x (n_B+1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointChoiceTable {
    pub probs: Vec<Vec<f64>>,
}

impl JointChoiceTable {
    pub fn row_marginals(&self) -> Vec<f64> {
        self.probs.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_marginals(&self) -> Vec<f64> {
        let cols = self.probs.first().map_or(0, Vec::len);
        (0..cols).map(|j| self.probs.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }
}

impl CrossCatModel {
    pub fn new(nodes: Vec<CategoryNode>, edges: Vec<Edge>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::model("a model needs at least one category"));
        }
        let mut index = HashMap::new();
        for (k, node) in nodes.iter().enumerate() {
            if index.insert(node.id.as_str(), k).is_some() {
                return Err(Error::model(format!("duplicate category id {}", node.id)));
            }
        }
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::model(format!("edge endpoint {id} is not a category")))
            };
            let (u, w) = (lookup(&edge.from)?, lookup(&edge.to)?);
            if u == w {
                return Err(Error::model(format!("self-loop on category {}", edge.from)));
            }
            let (rows, cols) = (nodes[u].n() + 1, nodes[w].n() + 1);
            if edge.lambda.len() != rows || edge.lambda.iter().any(|r| r.len() != cols) {
                return Err(Error::model(format!(
                    "lambda on {} -> {} must be {rows}x{cols}",
                    edge.from, edge.to
                )));
            }
            for (i, row) in edge.lambda.iter().enumerate() {
                check_distribution(row, &format!("lambda {} -> {} row {i}", edge.from, edge.to))?;
            }
            if outgoing[u].iter().any(|&(_, t)| t == w) {
                return Err(Error::model(format!(
                    "duplicate edge {} -> {}",
                    edge.from, edge.to
                )));
            }
            outgoing[u].push((e, w));
            incoming[w].push((e, u));
        }
        // Kahn's algorithm; ties resolved by declaration order.
        let mut indeg: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..nodes.len()).rev().filter(|&k| indeg[k] == 0).collect();
        let mut topo = Vec::with_capacity(nodes.len());
        while let Some(u) = ready.pop() {
            topo.push(u);
            let mut next = Vec::new();
            for &(_, w) in &outgoing[u] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    next.push(w);
                }
            }
            next.sort_unstable_by(|a, b| b.cmp(a));
            ready.extend(next);
            ready.sort_unstable_by(|a, b| b.cmp(a));
        }
        if topo.len() != nodes.len() {
            return Err(Error::model("category graph has a cycle"));
        }
        Ok(CrossCatModel {
            nodes,
            edges,
            topo,
            incoming,
            outgoing,
        })
    }

    /// Model with categories `"A"` and `"B"` joined by one edge.
    pub fn two_category(
        a: impl Into<ChoiceKernel>,
        b: impl Into<ChoiceKernel>,
        lambda: Vec<Vec<f64>>,
    ) -> Result<Self> {
        CrossCatModel::new(
            vec![CategoryNode::new("A", a), CategoryNode::new("B", b)],
            vec![Edge::new("A", "B", lambda)],
        )
    }

    pub fn nodes(&self) -> &[CategoryNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, u: usize) -> &CategoryNode {
        &self.nodes[u]
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| Error::domain(format!("no category named {id}")))
    }

    pub fn edge_index(&self, from: &str, to: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.from == from && e.to == to)
            .ok_or_else(|| Error::domain(format!("no edge {from} -> {to}")))
    }

    /// Node indices, parents before children.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// `(edge index, parent node)` pairs pointing into `u`.
    pub fn parents(&self, u: usize) -> &[(usize, usize)] {
        &self.incoming[u]
    }

    /// `(edge index, child node)` pairs leaving `u`.
    pub fn children(&self, u: usize) -> &[(usize, usize)] {
        &self.outgoing[u]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.nodes.iter().map(CategoryNode::n).collect()
    }

    /// Index of the single edge if this is a two-category model.
    pub fn two_category_edge(&self) -> Result<usize> {
        if self.nodes.len() == 2 && self.edges.len() == 1 {
            Ok(0)
        } else {
            Err(Error::domain(format!(
                "expected two categories and one edge, found {} and {}",
                self.nodes.len(),
                self.edges.len()
            )))
        }
    }

    fn edge_ends(&self, edge: usize) -> Result<(usize, usize)> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::domain(format!("edge {edge} does not exist")))?;
        Ok((self.node_index(&e.from)?, self.node_index(&e.to)?))
    }

    /// Choice distribution in the target of `edge` for a customer who chose `i` upstream.
    pub fn conditional_b_prob(&self, edge: usize, i: usize, s_b: &Assortment) -> Result<Vec<f64>> {
        let (u, w) = self.edge_ends(edge)?;
        if i > self.nodes[u].n() {
            return Err(Error::domain(format!(
                "upstream choice {i} is outside 0..={}",
                self.nodes[u].n()
            )));
        }
        self.nodes[w].kernel.substitute(&self.edges[edge].lambda[i], s_b)
    }

    /// Joint distribution of the two categories' choices.
    pub fn joint_choice_prob(&self, s_a: &Assortment, s_b: &Assortment) -> Result<JointChoiceTable> {
        let edge = self.two_category_edge()?;
        let (a, _) = self.edge_ends(edge)?;
        let phi_a = self.nodes[a].kernel.choice_prob(s_a)?;
        let n_b = self.nodes[1 - a].n();
        let mut probs = vec![vec![0.0; n_b + 1]; phi_a.len()];
        for (i, &pa) in phi_a.iter().enumerate() {
            if pa > 0.0 {
                let cond = self.conditional_b_prob(edge, i, s_b)?;
                for (out, c) in probs[i].iter_mut().zip(cond) {
                    *out = pa * c;
                }
            }
        }
        Ok(JointChoiceTable { probs })
    }

    /// Initial-attraction distribution in B averaged over A's choice from `s_a`.
    pub fn aggregate_arrival(&self, s_a: &Assortment) -> Result<Vec<f64>> {
        let edge = self.two_category_edge()?;
        let (a, _) = self.edge_ends(edge)?;
        let phi_a = self.nodes[a].kernel.choice_prob(s_a)?;
        Ok(mix_rows(&self.edges[edge].lambda, &phi_a))
    }

    fn check_sets(&self, sets: &[Assortment]) -> Result<()> {
        if sets.len() != self.nodes.len() {
            return Err(Error::domain(format!(
                "expected {} assortments, got {}",
                self.nodes.len(),
                sets.len()
            )));
        }
        for (node, s) in self.nodes.iter().zip(sets) {
            s.check(node.n())?;
        }
        Ok(())
    }

    /// Marginal choice distribution of every category, indexed like `nodes()`.
    ///
    /// Propagates forward in topological order. A category with several
    /// parents draws its initial attraction from the uniform mixture of the
    /// parents' attraction rows.
    pub fn marginals(&self, sets: &[Assortment]) -> Result<Vec<Vec<f64>>> {
        self.check_sets(sets)?;
        let mut marg: Vec<Vec<f64>> = vec![Vec::new(); self.nodes.len()];
        for &u in &self.topo {
            let kernel = &self.nodes[u].kernel;
            marg[u] = match self.incoming[u].as_slice() {
                [] => kernel.choice_prob(&sets[u])?,
                parents => {
                    let attraction = self.attraction(u, parents, &marg);
                    kernel.substitute(&attraction, &sets[u])?
                }
            };
        }
        Ok(marg)
    }

    fn attraction(&self, u: usize, parents: &[(usize, usize)], marg: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes[u].n() + 1];
        let share = 1.0 / parents.len() as f64;
        for &(e, p) in parents {
            for (o, x) in out.iter_mut().zip(mix_rows(&self.edges[e].lambda, &marg[p])) {
                *o += share * x;
            }
        }
        out
    }

    /// Draws one choice per category for a customer facing `sets`.
    pub fn sample_path<R: Rng + ?Sized>(&self, sets: &[Assortment], rng: &mut R) -> Result<Vec<usize>> {
        self.check_sets(sets)?;
        let mut choice = vec![0; self.nodes.len()];
        for &u in &self.topo {
            let kernel = &self.nodes[u].kernel;
            let parents = &self.incoming[u];
            choice[u] = if parents.is_empty() {
                kernel.sample_choice(&sets[u], rng)?
            } else {
                let (e, p) = parents[rng.random_range(0..parents.len())];
                let l = sample_index(&self.edges[e].lambda[choice[p]], rng);
                let offered = sets[u].offered_mask(kernel.n())?;
                kernel.sample_from_attraction(l, &offered, rng)
            };
        }
        Ok(choice)
    }
}

/// `Σ_i weights[i] · rows[i]`.
pub(crate) fn mix_rows(rows: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows.first().map_or(0, Vec::len)];
    for (row, &w) in rows.iter().zip(weights) {
        if w != 0.0 {
            for (o, x) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::MnlModel;

    fn fixture() -> CrossCatModel {
        // v_1^A = 1; B has v_2 = 1, v_3 = 2 and product 1 with weight 0.
        let a = MnlModel::new(vec![1.0]).unwrap();
        let b = MnlModel::new(vec![0.0, 1.0, 2.0]).unwrap();
        let lambda = vec![
            vec![0.25, 0.25, 0.25, 0.25],
            vec![1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0],
        ];
        CrossCatModel::two_category(a, b, lambda).unwrap()
    }

    #[test]
    fn worked_conditionals() {
        let m = fixture();
        let p = m.conditional_b_prob(0, 1, &Assortment::from([2, 3])).unwrap();
        assert!((p[2] - 1.0 / 3.0).abs() < 1e-12 && (p[3] - 1.0 / 3.0).abs() < 1e-12);
        let p = m.conditional_b_prob(0, 1, &Assortment::from([2])).unwrap();
        assert!((p[2] - 0.5).abs() < 1e-12);
        let p = m.conditional_b_prob(0, 1, &Assortment::from([3])).unwrap();
        assert!((p[3] - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn joint_fixture_value() {
        let t = fixture()
            .joint_choice_prob(&Assortment::from([1]), &Assortment::from([2]))
            .unwrap();
        assert!((t.probs[1][2] - 0.25).abs() < 1e-12);
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_cycles_and_bad_edges() {
        let k = || MnlModel::uniform(1);
        let nodes = vec![CategoryNode::new("A", k()), CategoryNode::new("B", k())];
        let lam = vec![vec![0.5, 0.5]; 2];
        let cyc = vec![Edge::new("A", "B", lam.clone()), Edge::new("B", "A", lam.clone())];
        assert!(CrossCatModel::new(nodes.clone(), cyc).is_err());
        let missing = vec![Edge::new("A", "C", lam.clone())];
        assert!(CrossCatModel::new(nodes.clone(), missing).is_err());
        let bad_row = vec![Edge::new("A", "B", vec![vec![0.5, 0.4], vec![1.0, 0.0]])];
        assert!(CrossCatModel::new(nodes, bad_row).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = fixture();
        let text = serde_json::to_string(&m).unwrap();
        let back: CrossCatModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.topo_order(), &[0, 1]);
    }

    #[test]
    fn declared_size_must_match() {
        let doc = r#"{"nodes":[{"id":"A","n":2,"kernel":{"type":"mnl","weights":[1.0]}}],"edges":[]}"#;
        assert!(serde_json::from_str::<CrossCatModel>(doc).is_err());
    }
}
