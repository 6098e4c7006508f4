//! Budgeted takeover strategies.
//!
//! Every strategy works on an [`Adversary`], which binds a graph, its
//! influence matrix and an objective into a quadratic form `f(s) = sᵀ A s`.
//! The strategies keep `A s'` up to date so that scoring "set node `j` to
//! `a`" costs O(1) and committing a takeover costs O(n).

mod brute;
mod plan;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use brute::{enumeration_size, ENUMERATION_LIMIT};
pub use plan::{apply_takeovers, DisruptionPlan, Takeover};

use crate::dynamics::{InfluenceMatrix, OpinionVector};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::WeightedGraph;
use crate::objectives::{ObjectiveSpec, QuadraticObjective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicKind {
    Greedy,
    MeanOpinion,
    MeanOpinionRandomized,
    MaxDegree,
    MaxWeightedDegree,
    Random,
    /// Exhaustive search; not part of sweeps by default.
    BruteForce,
}

impl HeuristicKind {
    /// The six strategies compared in budget sweeps.
    pub const SWEEP: [HeuristicKind; 6] = [
        HeuristicKind::Greedy,
        HeuristicKind::MeanOpinion,
        HeuristicKind::MeanOpinionRandomized,
        HeuristicKind::MaxDegree,
        HeuristicKind::MaxWeightedDegree,
        HeuristicKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Greedy => "greedy",
            HeuristicKind::MeanOpinion => "mean-opinion",
            HeuristicKind::MeanOpinionRandomized => "mean-opinion-randomized",
            HeuristicKind::MaxDegree => "max-degree",
            HeuristicKind::MaxWeightedDegree => "max-weighted-degree",
            HeuristicKind::Random => "random",
            HeuristicKind::BruteForce => "brute-force",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            HeuristicKind::MeanOpinionRandomized | HeuristicKind::Random
        )
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        HeuristicKind::SWEEP
            .into_iter()
            .chain([HeuristicKind::BruteForce])
            .find(|h| h.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown heuristic '{s}'")))
    }
}

/// How Mean Opinion picks its next node relative to the current mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanOpinionRule {
    /// Nearest to the mean ("centrists").
    #[default]
    Closest,
    /// Farthest from the mean.
    Farthest,
}

impl FromStr for MeanOpinionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "closest" => Ok(MeanOpinionRule::Closest),
            "farthest" => Ok(MeanOpinionRule::Farthest),
            other => Err(Error::Config(format!("unknown mean-opinion rule '{other}'"))),
        }
    }
}

impl fmt::Display for MeanOpinionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeanOpinionRule::Closest => "closest",
            MeanOpinionRule::Farthest => "farthest",
        })
    }
}

/// Relative slack under which two objective values count as tied.
pub(crate) fn tie_tolerance(value: f64) -> f64 {
    1e-12 * value.abs().max(1.0)
}

/// Innate opinions `s'` together with `A s'` and `f(s')`.
struct Incremental<'q> {
    objective: &'q QuadraticObjective,
    s: Vec<f64>,
    grad: Vec<f64>,
    value: f64,
}

impl<'q> Incremental<'q> {
    fn new(objective: &'q QuadraticObjective, s: &OpinionVector) -> Self {
        let s = s.as_slice().to_vec();
        let grad = objective.gradient(&s);
        let value = grad.iter().zip(&s).map(|(a, b)| a * b).sum();
        Incremental {
            objective,
            s,
            grad,
            value,
        }
    }

    fn candidate(&self, j: usize, a: f64) -> f64 {
        let d = a - self.s[j];
        self.value + 2.0 * d * self.grad[j] + d * d * self.objective.diagonal(j)
    }

    /// Best extreme for node `j`; 0 wins ties.
    fn best_extreme(&self, j: usize) -> (f64, f64) {
        let low = self.candidate(j, 0.0);
        let high = self.candidate(j, 1.0);
        if high > low + tie_tolerance(low) {
            (high, 1.0)
        } else {
            (low, 0.0)
        }
    }

    fn commit(&mut self, j: usize, a: f64) {
        let d = a - self.s[j];
        self.value = self.candidate(j, a);
        if d != 0.0 {
            for (g, c) in self.grad.iter_mut().zip(self.objective.column(j)) {
                *g += d * c;
            }
        }
        self.s[j] = a;
    }

    fn into_opinions(self) -> OpinionVector {
        OpinionVector::from_raw(self.s)
    }
}

/// Graph plus bound objective; entry point for every strategy.
pub struct Adversary<'a> {
    graph: &'a WeightedGraph,
    objective: QuadraticObjective,
    exec: Exec,
    mean_rule: MeanOpinionRule,
}

impl<'a> Adversary<'a> {
    pub fn new(inf: &InfluenceMatrix, graph: &'a WeightedGraph, spec: ObjectiveSpec) -> Result<Self> {
        Ok(Adversary {
            graph,
            objective: QuadraticObjective::new(inf, graph, spec)?,
            exec: inf.exec(),
            mean_rule: MeanOpinionRule::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_mean_opinion_rule(mut self, rule: MeanOpinionRule) -> Self {
        self.mean_rule = rule;
        self
    }

    pub fn objective(&self) -> &QuadraticObjective {
        &self.objective
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.graph
    }

    /// `f(s)` through the cached quadratic form.
    pub fn value(&self, s: &OpinionVector) -> Result<f64> {
        self.check(s, 0)?;
        Ok(self.objective.value(s.as_slice()))
    }

    fn check(&self, s: &OpinionVector, k: usize) -> Result<()> {
        let n = self.graph.node_count();
        s.check_len(n)?;
        if k > n {
            return Err(Error::Budget { k, n });
        }
        Ok(())
    }

    /// Dispatches to the strategy named by `kind`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        kind: HeuristicKind,
        s: &OpinionVector,
        k: usize,
        rng: &mut R,
    ) -> Result<DisruptionPlan> {
        match kind {
            HeuristicKind::Greedy => self.greedy(s, k),
            HeuristicKind::MeanOpinion => self.mean_opinion(s, k, None::<&mut R>),
            HeuristicKind::MeanOpinionRandomized => self.mean_opinion(s, k, Some(rng)),
            HeuristicKind::MaxDegree => self.max_degree(s, k, false),
            HeuristicKind::MaxWeightedDegree => self.max_degree(s, k, true),
            HeuristicKind::Random => self.random(s, k, rng),
            HeuristicKind::BruteForce => self.brute_force(s, k),
        }
    }

    /// Greedy takeovers: each round commits the (node, extreme) pair with
    /// the highest resulting objective. Ties go to the lowest node id, then
    /// to opinion 0. Stops early only if the best move lowers the objective.
    pub fn greedy(&self, s: &OpinionVector, k: usize) -> Result<DisruptionPlan> {
        self.check(s, k)?;
        let isolated = self.graph.isolated_nodes();
        if let Some(&first) = isolated.first() {
            return Err(Error::IsolatedVertices {
                count: isolated.len(),
                first,
            });
        }
        let n = self.graph.node_count();
        let mut state = Incremental::new(&self.objective, s);
        let mut plan = DisruptionPlan::empty(HeuristicKind::Greedy, s, state.value);
        let mut taken = vec![false; n];

        for _ in 0..k {
            let scores = {
                let state = &state;
                let taken = &taken;
                self.exec.map_chunked(n, 256, move |j| {
                    (!taken[j]).then(|| state.best_extreme(j))
                })
            };
            let Some(best) = scores.iter().flatten().map(|&(v, _)| v).reduce(f64::max) else {
                break;
            };
            let threshold = best - tie_tolerance(best);
            let (node, (value, opinion)) = scores
                .iter()
                .enumerate()
                .find_map(|(j, c)| c.filter(|&(v, _)| v >= threshold).map(|c| (j, c)))
                .expect("the maximum is attained");
            if value < state.value - tie_tolerance(state.value) {
                plan.stopped_early = true;
                break;
            }
            state.commit(node, opinion);
            taken[node] = true;
            plan.takeovers.push(Takeover { node, opinion });
            plan.trajectory.push(state.value);
        }
        plan.modified = state.into_opinions();
        Ok(plan)
    }

    /// Mean Opinion: take the untouched node whose current innate opinion
    /// is nearest (or, with [`MeanOpinionRule::Farthest`], farthest from)
    /// the current mean. The extreme is the better of 0/1, or a fair coin
    /// when `rng` is given.
    pub fn mean_opinion<R: Rng + ?Sized>(
        &self,
        s: &OpinionVector,
        k: usize,
        mut rng: Option<&mut R>,
    ) -> Result<DisruptionPlan> {
        self.check(s, k)?;
        let n = self.graph.node_count();
        let kind = if rng.is_some() {
            HeuristicKind::MeanOpinionRandomized
        } else {
            HeuristicKind::MeanOpinion
        };
        let mut state = Incremental::new(&self.objective, s);
        let mut plan = DisruptionPlan::empty(kind, s, state.value);
        let mut taken = vec![false; n];
        for _ in 0..k {
            let mean = state.s.iter().sum::<f64>() / n as f64;
            let distance = |j: usize| (state.s[j] - mean).abs();
            let free = (0..n).filter(|&j| !taken[j]);
            let node = match self.mean_rule {
                MeanOpinionRule::Closest => {
                    let best = free.clone().map(distance).fold(f64::INFINITY, f64::min);
                    free.into_iter().find(|&j| distance(j) <= best + 1e-12)
                }
                MeanOpinionRule::Farthest => {
                    let best = free.clone().map(distance).fold(f64::NEG_INFINITY, f64::max);
                    free.into_iter().find(|&j| distance(j) >= best - 1e-12)
                }
            }
            .expect("k <= n leaves a free node");
            let opinion = match rng.as_deref_mut() {
                Some(r) => coin(r),
                None => state.best_extreme(node).1,
            };
            state.commit(node, opinion);
            taken[node] = true;
            plan.takeovers.push(Takeover { node, opinion });
            plan.trajectory.push(state.value);
        }
        plan.modified = state.into_opinions();
        Ok(plan)
    }

    /// Max Degree: take untouched nodes in order of decreasing degree
    /// (neighbor count, or total edge weight when `weighted`), lowest id
    /// first on ties, each set to its better extreme.
    pub fn max_degree(&self, s: &OpinionVector, k: usize, weighted: bool) -> Result<DisruptionPlan> {
        self.check(s, k)?;
        let degrees = self.graph.degrees();
        let mut order: Vec<usize> = (0..self.graph.node_count()).collect();
        if weighted {
            order.sort_by(|&a, &b| degrees.weighted[b].total_cmp(&degrees.weighted[a]).then(a.cmp(&b)));
        } else {
            order.sort_by(|&a, &b| degrees.unweighted[b].cmp(&degrees.unweighted[a]).then(a.cmp(&b)));
        }
        let kind = if weighted {
            HeuristicKind::MaxWeightedDegree
        } else {
            HeuristicKind::MaxDegree
        };
        let mut state = Incremental::new(&self.objective, s);
        let mut plan = DisruptionPlan::empty(kind, s, state.value);
        for &node in &order[..k] {
            let opinion = state.best_extreme(node).1;
            state.commit(node, opinion);
            plan.takeovers.push(Takeover { node, opinion });
            plan.trajectory.push(state.value);
        }
        plan.modified = state.into_opinions();
        Ok(plan)
    }

    /// Random baseline: uniform untouched node, fair-coin extreme.
    pub fn random<R: Rng + ?Sized>(&self, s: &OpinionVector, k: usize, rng: &mut R) -> Result<DisruptionPlan> {
        self.check(s, k)?;
        let mut free: Vec<usize> = (0..self.graph.node_count()).collect();
        let mut state = Incremental::new(&self.objective, s);
        let mut plan = DisruptionPlan::empty(HeuristicKind::Random, s, state.value);
        for _ in 0..k {
            let node = free.swap_remove(rng.random_range(0..free.len()));
            let opinion = coin(rng);
            state.commit(node, opinion);
            plan.takeovers.push(Takeover { node, opinion });
            plan.trajectory.push(state.value);
        }
        plan.modified = state.into_opinions();
        Ok(plan)
    }
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        0.0
    }
}

pub fn greedy(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    k: usize,
    spec: &ObjectiveSpec,
) -> Result<DisruptionPlan> {
    Adversary::new(inf, g, *spec)?.greedy(s, k)
}

/// Mean Opinion; the randomized variant draws the extreme from `rng`.
pub fn mean_opinion<R: Rng + ?Sized>(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    k: usize,
    spec: &ObjectiveSpec,
    randomized: bool,
    rng: &mut R,
) -> Result<DisruptionPlan> {
    let adversary = Adversary::new(inf, g, *spec)?;
    if randomized {
        adversary.mean_opinion(s, k, Some(rng))
    } else {
        adversary.mean_opinion(s, k, None::<&mut R>)
    }
}

pub fn max_degree(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    k: usize,
    spec: &ObjectiveSpec,
    weighted: bool,
) -> Result<DisruptionPlan> {
    Adversary::new(inf, g, *spec)?.max_degree(s, k, weighted)
}

pub fn random_heuristic<R: Rng + ?Sized>(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    k: usize,
    spec: &ObjectiveSpec,
    rng: &mut R,
) -> Result<DisruptionPlan> {
    Adversary::new(inf, g, *spec)?.random(s, k, rng)
}

pub fn brute_force_optimal(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    k: usize,
    spec: &ObjectiveSpec,
) -> Result<DisruptionPlan> {
    Adversary::new(inf, g, *spec)?.brute_force(s, k)
}
