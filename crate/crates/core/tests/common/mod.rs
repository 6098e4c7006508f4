//! Slow reference implementations used to check the library.
//!
//! Nothing here touches the library's numerics: equilibria come from a
//! hand-written LU solve of `(I + L) z = s` and objectives are summed
//! straight from their definitions.

#![allow(dead_code)]

use netdisrupt::generators::{GeneratorConfig, GraphModel, OpinionModel};
use netdisrupt::{ObjectiveKind, ObjectiveSpec, OpinionVector, WeightedGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// LU factorization with partial pivoting of `I + L`.
pub struct LuOracle {
    n: usize,
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl LuOracle {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.node_count();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for e in g.edges() {
            a[e.u][e.u] += e.weight;
            a[e.v][e.v] += e.weight;
            a[e.u][e.v] -= e.weight;
            a[e.v][e.u] -= e.weight;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            perm.swap(col, pivot);
            let (upper, lower) = a.split_at_mut(col + 1);
            let pivot_row = &upper[col];
            for row in lower {
                let factor = row[col] / pivot_row[col];
                row[col] = factor;
                for c in col + 1..n {
                    row[c] -= factor * pivot_row[c];
                }
            }
        }
        LuOracle { n, lu: a, perm }
    }

    pub fn solve(&self, s: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| s[p]).collect();
        for r in 0..n {
            for c in 0..r {
                y[r] -= self.lu[r][c] * y[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                y[r] -= self.lu[r][c] * y[c];
            }
            y[r] /= self.lu[r][r];
        }
        y
    }
}

pub fn equilibrium(g: &WeightedGraph, s: &[f64]) -> Vec<f64> {
    LuOracle::new(g).solve(s)
}

pub fn disagreement(g: &WeightedGraph, z: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.weight * (z[e.u] - z[e.v]).powi(2))
        .sum()
}

pub fn polarization(z: &[f64]) -> f64 {
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    z.iter().map(|v| (v - mean).powi(2)).sum()
}

pub fn objective(g: &WeightedGraph, z: &[f64], spec: &ObjectiveSpec) -> f64 {
    match spec.kind {
        ObjectiveKind::Disagreement => disagreement(g, z),
        ObjectiveKind::Polarization => polarization(z),
        ObjectiveKind::WeightedSum => {
            let scale = g.node_count() as f64 / g.edge_count() as f64;
            polarization(z) + spec.lambda * scale * disagreement(g, z)
        }
    }
}

fn tie(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

pub struct NaiveGreedy {
    pub moves: Vec<(usize, f64)>,
    pub values: Vec<f64>,
}

/// Greedy that re-solves the equilibrium for every candidate move.
/// Ties go to the lowest node, then to opinion 0; zero-gain moves are
/// accepted and a strict decrease stops the search.
pub fn naive_greedy(g: &WeightedGraph, s: &[f64], k: usize, spec: &ObjectiveSpec) -> NaiveGreedy {
    let lu = LuOracle::new(g);
    let value_of = |s: &[f64]| objective(g, &lu.solve(s), spec);
    let n = s.len();
    let mut current = s.to_vec();
    let mut taken = vec![false; n];
    let mut value = value_of(&current);
    let mut out = NaiveGreedy {
        moves: Vec::new(),
        values: vec![value],
    };
    for _ in 0..k {
        let mut candidates = Vec::new();
        for j in (0..n).filter(|&j| !taken[j]) {
            for a in [0.0, 1.0] {
                let old = current[j];
                current[j] = a;
                candidates.push((j, a, value_of(&current)));
                current[j] = old;
            }
        }
        let best = candidates
            .iter()
            .map(|c| c.2)
            .fold(f64::NEG_INFINITY, f64::max);
        if candidates.is_empty() || best < value - tie(value) {
            break;
        }
        let &(j, a, v) = candidates
            .iter()
            .find(|c| c.2 >= best - tie(best))
            .unwrap();
        current[j] = a;
        taken[j] = true;
        value = v;
        out.moves.push((j, a));
        out.values.push(v);
    }
    out
}

/// Best value over every set of at most `k` takeovers, each to 0 or 1.
pub fn naive_brute_value(g: &WeightedGraph, s: &[f64], k: usize, spec: &ObjectiveSpec) -> f64 {
    let lu = LuOracle::new(g);
    let n = s.len();
    let mut best = objective(g, &lu.solve(s), spec);
    for subset in 1u32..(1 << n) {
        let nodes: Vec<usize> = (0..n).filter(|&i| subset & (1 << i) != 0).collect();
        if nodes.len() > k {
            continue;
        }
        for mask in 0u32..(1 << nodes.len()) {
            let mut t = s.to_vec();
            for (p, &i) in nodes.iter().enumerate() {
                t[i] = f64::from((mask >> p) & 1);
            }
            best = best.max(objective(g, &lu.solve(&t), spec));
        }
    }
    best
}

/// Random graph on `n` nodes with a Hamiltonian path, so no node is
/// isolated, plus extra edges with probability `p`. Weights in (0, 1].
pub fn connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for w in order.windows(2) {
        let (u, v) = (w[0].min(w[1]), w[0].max(w[1]));
        present.insert((u, v));
        edges.push((u, v, 1.0 - rng.random::<f64>()));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present.contains(&(u, v)) && rng.random::<f64>() < p {
                edges.push((u, v, 1.0 - rng.random::<f64>()));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

pub fn uniform_opinions<R: Rng>(rng: &mut R, n: usize) -> OpinionVector {
    OpinionVector::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap()
}

pub fn objective_by_index(i: usize) -> ObjectiveSpec {
    match i % 3 {
        0 => ObjectiveSpec::disagreement(),
        1 => ObjectiveSpec::polarization(),
        _ => ObjectiveSpec::weighted_sum(1.0).unwrap(),
    }
}

/// One of the three generator families, cycled by `i`. Block models get
/// `n` rounded up to even.
pub fn generated(i: usize, n: usize, seed: u64) -> GeneratorConfig {
    match i % 3 {
        0 => GeneratorConfig::erdos_renyi(n, 0.1 + 0.05 * (i % 5) as f64, seed),
        1 => GeneratorConfig::preferential_attachment(n, 1 + i % 4, seed),
        _ => GeneratorConfig {
            model: GraphModel::StochasticBlock {
                p11: 0.5,
                p22: 0.4,
                p12: 0.05,
            },
            n: n + n % 2,
            opinions: OpinionModel::BetaPerCommunity {
                alpha1: 5.0,
                beta1: 2.0,
                alpha2: 2.0,
                beta2: 5.0,
            },
            seed,
        },
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
