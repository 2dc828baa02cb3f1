//! Random instance generators and slow reference computations shared by the integration tests.
#![allow(dead_code)]

use crosscat::{Assortment, CategoryNode, CrossCatModel, Edge, McModel, MnlModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A within-category model described by plain vectors.
#[derive(Clone, Debug)]
pub enum RefKernel {
    Mnl(Vec<f64>),
    Mc { arrival: Vec<f64>, transition: Vec<Vec<f64>> },
}

pub fn random_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| (rng.random::<f64>() * 4.0 - 2.0).exp()).collect()
}

/// Row-stochastic rows over `cols` options; about one entry in five is zeroed.
pub fn random_rows<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            let mut r: Vec<f64> = (0..cols)
                .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
                .collect();
            if r.iter().sum::<f64>() == 0.0 {
                r[0] = 1.0;
            }
            let t: f64 = r.iter().sum();
            r.iter().map(|x| x / t).collect()
        })
        .collect()
}

pub fn random_mc<R: Rng>(n: usize, rng: &mut R) -> RefKernel {
    let arrival = random_rows(1, n + 1, rng).remove(0);
    let mut transition = vec![vec![0.0; n + 1]; n + 1];
    transition[0][0] = 1.0;
    for i in 1..=n {
        let mut row: Vec<f64> = (0..=n).map(|k| if k == i { 0.0 } else { rng.random::<f64>() }).collect();
        row[0] += 0.05;
        let t: f64 = row.iter().sum();
        transition[i] = row.iter().map(|x| x / t).collect();
    }
    RefKernel::Mc { arrival, transition }
}

pub fn random_kernel<R: Rng>(n: usize, rng: &mut R) -> RefKernel {
    if rng.random_bool(0.5) {
        RefKernel::Mnl(random_weights(n, rng))
    } else {
        random_mc(n, rng)
    }
}

/// Prices for options `0..=n`; some products are given a negative price.
pub fn random_prices<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..n).map(|_| {
            if rng.random_bool(0.1) {
                -rng.random::<f64>()
            } else {
                0.5 + 9.5 * rng.random::<f64>()
            }
        }))
        .collect()
}

/// Absorption probabilities by propagating the unabsorbed mass step by step.
pub fn absorb_ref(arrival: &[f64], transition: &[Vec<f64>], s: &Assortment) -> Vec<f64> {
    let n1 = arrival.len();
    let stop = |k: usize| k == 0 || s.contains(k);
    let mut out = vec![0.0; n1];
    let mut mass = vec![0.0; n1];
    for k in 0..n1 {
        if stop(k) {
            out[k] += arrival[k];
        } else {
            mass[k] = arrival[k];
        }
    }
    for _ in 0..1_000_000 {
        if mass.iter().sum::<f64>() < 1e-16 {
            break;
        }
        let mut next = vec![0.0; n1];
        for k in 0..n1 {
            if mass[k] > 0.0 {
                for (j, &p) in transition[k].iter().enumerate() {
                    if stop(j) {
                        out[j] += mass[k] * p;
                    } else {
                        next[j] += mass[k] * p;
                    }
                }
            }
        }
        mass = next;
    }
    out
}

pub fn mnl_ref(weights: &[f64], s: &Assortment) -> Vec<f64> {
    let mut p = vec![0.0; weights.len() + 1];
    let denom = 1.0 + s.iter().map(|j| weights[j - 1]).sum::<f64>();
    p[0] = 1.0 / denom;
    for j in s.iter() {
        p[j] = weights[j - 1] / denom;
    }
    p
}

impl RefKernel {
    pub fn n(&self) -> usize {
        match self {
            RefKernel::Mnl(w) => w.len(),
            RefKernel::Mc { arrival, .. } => arrival.len() - 1,
        }
    }

    pub fn first(&self, s: &Assortment) -> Vec<f64> {
        match self {
            RefKernel::Mnl(w) => mnl_ref(w, s),
            RefKernel::Mc { arrival, transition } => absorb_ref(arrival, transition, s),
        }
    }

    /// Final choice distribution of a customer initially attracted according to `attr`.
    pub fn substitute(&self, attr: &[f64], s: &Assortment) -> Vec<f64> {
        match self {
            RefKernel::Mnl(w) => {
                let base = mnl_ref(w, s);
                let lost: f64 = (1..attr.len()).filter(|&m| !s.contains(m)).map(|m| attr[m]).sum();
                (0..attr.len())
                    .map(|j| {
                        let own = if j == 0 || s.contains(j) { attr[j] } else { 0.0 };
                        own + lost * base[j]
                    })
                    .collect()
            }
            RefKernel::Mc { transition, .. } => absorb_ref(attr, transition, s),
        }
    }

    pub fn to_node(&self, id: &str) -> CategoryNode {
        match self {
            RefKernel::Mnl(w) => CategoryNode::new(id, MnlModel::new(w.clone()).unwrap()),
            RefKernel::Mc { arrival, transition } => {
                CategoryNode::new(id, McModel::new(arrival.clone(), transition.clone()).unwrap())
            }
        }
    }
}

/// Category forest given in topological order (parents precede children).
#[derive(Clone, Debug)]
pub struct RefNet {
    pub kernels: Vec<RefKernel>,
    pub parent: Vec<Option<usize>>,
    /// Attraction rows from the parent's options into this category.
    pub lambda: Vec<Vec<Vec<f64>>>,
}

pub fn id(u: usize) -> String {
    format!("C{u}")
}

impl RefNet {
    pub fn random<R: Rng>(parent: Vec<Option<usize>>, sizes: &[usize], kernel: impl Fn(usize, usize, &mut R) -> RefKernel, rng: &mut R) -> Self {
        let kernels: Vec<RefKernel> = sizes.iter().enumerate().map(|(u, &n)| kernel(u, n, rng)).collect();
        let lambda = parent
            .iter()
            .enumerate()
            .map(|(u, p)| match p {
                Some(p) => random_rows(sizes[*p] + 1, sizes[u] + 1, rng),
                None => Vec::new(),
            })
            .collect();
        RefNet { kernels, parent, lambda }
    }

    pub fn to_model(&self) -> CrossCatModel {
        let nodes = self.kernels.iter().enumerate().map(|(u, k)| k.to_node(&id(u))).collect();
        let edges = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(u, p)| p.map(|p| Edge::new(id(p), id(u), self.lambda[u].clone())))
            .collect();
        CrossCatModel::new(nodes, edges).unwrap()
    }

    pub fn marginals(&self, sets: &[Assortment]) -> Vec<Vec<f64>> {
        let mut dist: Vec<Vec<f64>> = Vec::new();
        for (u, k) in self.kernels.iter().enumerate() {
            let d = match self.parent[u] {
                None => k.first(&sets[u]),
                Some(p) => {
                    let mut acc = vec![0.0; k.n() + 1];
                    for (i, &pi) in dist[p].iter().enumerate() {
                        if pi > 0.0 {
                            for (a, x) in acc.iter_mut().zip(k.substitute(&self.lambda[u][i], &sets[u])) {
                                *a += pi * x;
                            }
                        }
                    }
                    acc
                }
            };
            dist.push(d);
        }
        dist
    }

    pub fn revenue(&self, prices: &[Vec<f64>], sets: &[Assortment]) -> f64 {
        self.marginals(sets)
            .iter()
            .zip(prices)
            .map(|(d, r)| d.iter().zip(r).map(|(p, x)| p * x).sum::<f64>())
            .sum()
    }

    /// Best revenue over all assortment combinations, with optional size caps.
    ///
    /// Each category's choice rows depend only on its own set, so they are
    /// tabulated once per subset before the combinations are enumerated.
    pub fn brute_force(&self, prices: &[Vec<f64>], caps: &[Option<usize>]) -> f64 {
        let sizes: Vec<usize> = self.kernels.iter().map(RefKernel::n).collect();
        let tables: Vec<Vec<Vec<Vec<f64>>>> = self
            .kernels
            .iter()
            .enumerate()
            .map(|(u, k)| {
                (0..1u64 << sizes[u])
                    .map(|m| {
                        let s = subset(m, sizes[u]);
                        match self.parent[u] {
                            None => vec![k.first(&s)],
                            Some(_) => self.lambda[u].iter().map(|row| k.substitute(row, &s)).collect(),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut masks = vec![0u64; sizes.len()];
        let mut best = f64::NEG_INFINITY;
        loop {
            let ok = masks
                .iter()
                .zip(caps)
                .all(|(m, c)| c.is_none_or(|c| m.count_ones() as usize <= c));
            if ok {
                let mut dist: Vec<Vec<f64>> = Vec::with_capacity(sizes.len());
                let mut total = 0.0;
                for u in 0..sizes.len() {
                    let rows = &tables[u][masks[u] as usize];
                    let d: Vec<f64> = match self.parent[u] {
                        None => rows[0].clone(),
                        Some(p) => (0..=sizes[u])
                            .map(|j| dist[p].iter().zip(rows).map(|(pi, r)| pi * r[j]).sum())
                            .collect(),
                    };
                    total += d.iter().zip(&prices[u]).map(|(p, r)| p * r).sum::<f64>();
                    dist.push(d);
                }
                best = best.max(total);
            }
            let mut u = 0;
            loop {
                if u == sizes.len() {
                    return best;
                }
                masks[u] += 1;
                if masks[u] < 1 << sizes[u] {
                    break;
                }
                masks[u] = 0;
                u += 1;
            }
        }
    }
}

pub fn subset(mask: u64, n: usize) -> Assortment {
    (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect()
}

pub fn all_subsets(n: usize) -> impl Iterator<Item = Assortment> {
    (0..1u64 << n).map(move |m| subset(m, n))
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
