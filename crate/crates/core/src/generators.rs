//! Seeded synthetic instances: Erdős-Rényi, preferential attachment and a
//! two-block stochastic block model, with uniform or per-community Beta
//! opinions. Edge weights are drawn uniformly from (0, 1].

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{self, GRAPH_STREAM, OPINION_STREAM};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraphModel {
    ErdosRenyi { p: f64 },
    PreferentialAttachment { m_attach: usize },
    StochasticBlock { p11: f64, p22: f64, p12: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OpinionModel {
    UniformUnit,
    /// Beta(alpha1, beta1) on the first block, Beta(alpha2, beta2) on the second.
    BetaPerCommunity {
        alpha1: f64,
        beta1: f64,
        alpha2: f64,
        beta2: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub model: GraphModel,
    pub n: usize,
    pub opinions: OpinionModel,
    pub seed: u64,
}

/// A generated graph with its innate opinions.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub opinions: OpinionVector,
    /// Block of each node for the stochastic block model.
    pub communities: Option<Vec<u8>>,
}

impl GeneratorConfig {
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        GeneratorConfig {
            model: GraphModel::ErdosRenyi { p },
            n,
            opinions: OpinionModel::UniformUnit,
            seed,
        }
    }

    pub fn preferential_attachment(n: usize, m_attach: usize, seed: u64) -> Self {
        GeneratorConfig {
            model: GraphModel::PreferentialAttachment { m_attach },
            n,
            opinions: OpinionModel::UniformUnit,
            seed,
        }
    }

    /// Two blocks with `p11 = p22 = 0.7`, `p12 = 0.1` and Beta(5,2) /
    /// Beta(2,5) opinions.
    pub fn polarized_blocks(n: usize, seed: u64) -> Self {
        GeneratorConfig {
            model: GraphModel::StochasticBlock {
                p11: 0.7,
                p22: 0.7,
                p12: 0.1,
            },
            n,
            opinions: OpinionModel::BetaPerCommunity {
                alpha1: 5.0,
                beta1: 2.0,
                alpha2: 2.0,
                beta2: 5.0,
            },
            seed,
        }
    }

    /// Short identifier used as `graph_id` in sweep output.
    pub fn label(&self) -> String {
        let model = match self.model {
            GraphModel::ErdosRenyi { p } => format!("er-p{p}"),
            GraphModel::PreferentialAttachment { m_attach } => format!("pa-m{m_attach}"),
            GraphModel::StochasticBlock { p11, p22, p12 } => format!("sbm-{p11}-{p22}-{p12}"),
        };
        let opinions = match self.opinions {
            OpinionModel::UniformUnit => String::new(),
            OpinionModel::BetaPerCommunity {
                alpha1,
                beta1,
                alpha2,
                beta2,
            } => format!("-beta{alpha1}_{beta1}_{alpha2}_{beta2}"),
        };
        format!("{model}-n{}{opinions}-seed{}", self.n, self.seed)
    }

    /// Graph from stream [`GRAPH_STREAM`], opinions from [`OPINION_STREAM`].
    pub fn generate(&self) -> Result<Instance> {
        let mut graph_rng = rng::stream(self.seed, GRAPH_STREAM);
        let mut opinion_rng = rng::stream(self.seed, OPINION_STREAM);
        let (graph, communities) = match self.model {
            GraphModel::ErdosRenyi { p } => (erdos_renyi(self.n, p, &mut graph_rng)?, None),
            GraphModel::PreferentialAttachment { m_attach } => {
                (preferential_attachment(self.n, m_attach, &mut graph_rng)?, None)
            }
            GraphModel::StochasticBlock { p11, p22, p12 } => {
                let (g, labels) = stochastic_block(self.n, p11, p22, p12, &mut graph_rng)?;
                (g, Some(labels))
            }
        };
        let opinions = match self.opinions {
            OpinionModel::UniformUnit => opinions_uniform(self.n, &mut opinion_rng),
            OpinionModel::BetaPerCommunity {
                alpha1,
                beta1,
                alpha2,
                beta2,
            } => {
                let labels = communities.clone().unwrap_or_else(|| halves(self.n));
                opinions_beta_communities(&labels, alpha1, beta1, alpha2, beta2, &mut opinion_rng)?
            }
        };
        Ok(Instance {
            graph,
            opinions,
            communities,
        })
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

/// Uniform on (0, 1] as `1 - U`, `U` uniform on [0, 1).
fn edge_weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn halves(n: usize) -> Vec<u8> {
    (0..n).map(|v| u8::from(v >= n / 2)).collect()
}

/// Each unordered pair present independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<WeightedGraph> {
    check_probability("p", p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, edge_weight(rng)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges)
}

/// Preferential attachment seeded with a complete graph on `m_attach + 1`
/// nodes. Each later node links to `m_attach` distinct existing nodes,
/// drawn with probability proportional to their current degree.
pub fn preferential_attachment<R: Rng + ?Sized>(
    n: usize,
    m_attach: usize,
    rng: &mut R,
) -> Result<WeightedGraph> {
    if m_attach == 0 {
        return Err(Error::InvalidParameter("m_attach must be at least 1".into()));
    }
    if n <= m_attach {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must exceed m_attach = {m_attach}"
        )));
    }
    let seed_size = m_attach + 1;
    let mut edges = Vec::new();
    // one entry per edge endpoint, so uniform picks are degree-proportional
    let mut endpoints = Vec::new();
    for u in 0..seed_size {
        for v in u + 1..seed_size {
            edges.push((u, v, edge_weight(rng)));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets = Vec::with_capacity(m_attach);
    for new in seed_size..n {
        targets.clear();
        while targets.len() < m_attach {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new, edge_weight(rng)));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    WeightedGraph::from_edges(n, edges)
}

/// Two equal blocks (`0..n/2` and `n/2..n`). Pairs inside block 1 / block 2
/// connect with `p11` / `p22`, pairs across with `p12`.
pub fn stochastic_block<R: Rng + ?Sized>(
    n: usize,
    p11: f64,
    p22: f64,
    p12: f64,
    rng: &mut R,
) -> Result<(WeightedGraph, Vec<u8>)> {
    check_probability("p11", p11)?;
    check_probability("p22", p22)?;
    check_probability("p12", p12)?;
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "stochastic block model needs a positive even n, got {n}"
        )));
    }
    let labels = halves(n);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = match (labels[u], labels[v]) {
                (0, 0) => p11,
                (1, 1) => p22,
                _ => p12,
            };
            if rng.random_bool(p) {
                edges.push((u, v, edge_weight(rng)));
            }
        }
    }
    Ok((WeightedGraph::from_edges(n, edges)?, labels))
}

pub fn opinions_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OpinionVector {
    OpinionVector::from_raw((0..n).map(|_| rng.random::<f64>()).collect())
}

/// Beta(alpha1, beta1) draws for label 0, Beta(alpha2, beta2) for label 1.
pub fn opinions_beta_communities<R: Rng + ?Sized>(
    labels: &[u8],
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    rng: &mut R,
) -> Result<OpinionVector> {
    let beta = |a: f64, b: f64| {
        Beta::new(a, b)
            .map_err(|e| Error::InvalidParameter(format!("Beta({a}, {b}): {e}")))
    };
    let first = beta(alpha1, beta1)?;
    let second = beta(alpha2, beta2)?;
    let values = labels
        .iter()
        .map(|&label| if label == 0 { first.sample(rng) } else { second.sample(rng) })
        .collect();
    OpinionVector::new(values)
}
