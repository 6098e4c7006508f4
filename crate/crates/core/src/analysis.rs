//! Executable checks of the structural guarantees on any takeover plan.
//!
//! For a budget of `k` takeovers the equilibrium moves by at most `k` in
//! L1, polarization grows by at most `3k`, and disagreement grows by at most
//! `8 · d_max · k` where `d_max` is the maximum weighted degree.

use serde::{Deserialize, Serialize};

use crate::adversary::{apply_takeovers, DisruptionPlan};
use crate::dynamics::{InfluenceMatrix, OpinionVector};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::objectives::{disagreement, polarization};

pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `P' ≤ P + 3k`
    Polarization,
    /// `D' ≤ D + 8 d_max k`
    Disagreement,
    /// `‖z' - z‖₁ ≤ k`
    L1Shift,
    /// `‖s' - s‖₀ ≤ k`
    Budget,
    /// every assigned opinion is 0 or 1; `after` counts violations
    Extremes,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Polarization => "polarization",
            BoundKind::Disagreement => "disagreement",
            BoundKind::L1Shift => "l1-shift",
            BoundKind::Budget => "budget",
            BoundKind::Extremes => "extremes",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub before: f64,
    pub after: f64,
    pub k: usize,
    pub d_max: Option<f64>,
    /// Allowed increase `after - before`.
    pub bound: f64,
    /// `bound - (after - before)`.
    pub slack: f64,
    pub pass: bool,
}

impl BoundReport {
    fn new(kind: BoundKind, before: f64, after: f64, k: usize, d_max: Option<f64>, bound: f64) -> Self {
        let slack = bound - (after - before);
        BoundReport {
            kind,
            before,
            after,
            k,
            d_max,
            bound,
            slack,
            pass: slack >= -BOUND_TOLERANCE,
        }
    }
}

pub fn check_polarization_bound(p_before: f64, p_after: f64, k: usize) -> BoundReport {
    BoundReport::new(BoundKind::Polarization, p_before, p_after, k, None, 3.0 * k as f64)
}

pub fn check_disagreement_bound(d_before: f64, d_after: f64, k: usize, d_max: f64) -> BoundReport {
    BoundReport::new(
        BoundKind::Disagreement,
        d_before,
        d_after,
        k,
        Some(d_max),
        8.0 * d_max * k as f64,
    )
}

pub fn check_l1_shift(z_before: &OpinionVector, z_after: &OpinionVector, k: usize) -> Result<BoundReport> {
    z_after.check_len(z_before.len())?;
    let shift: f64 = z_before
        .iter()
        .zip(z_after.iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(BoundReport::new(BoundKind::L1Shift, 0.0, shift, k, None, k as f64))
}

/// Every check for a plan against instance `(g, s)`. `k` is the number of
/// takeovers in the plan.
pub fn audit_plan(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    plan: &DisruptionPlan,
) -> Result<Vec<BoundReport>> {
    s.check_len(g.node_count())?;
    if plan.original != *s {
        return Err(Error::InconsistentPlan(
            "original opinions differ from the instance".into(),
        ));
    }
    let modified = apply_takeovers(s, &plan.takeovers)?;
    if modified != plan.modified {
        return Err(Error::InconsistentPlan(
            "modified opinions do not follow from the takeovers".into(),
        ));
    }
    let mut nodes: Vec<usize> = plan.takeovers.iter().map(|t| t.node).collect();
    nodes.sort_unstable();
    if nodes.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InconsistentPlan("a node is taken over twice".into()));
    }
    let z = inf.equilibrium(s)?;
    let z_new = inf.equilibrium(&modified)?;
    let k = plan.takeovers.len();
    audit_equilibria(g, s, &modified, &z, &z_new, k, plan)
}

/// Audit from already computed equilibria. Used by sweeps, which update
/// `z'` incrementally along a plan.
pub(crate) fn audit_equilibria(
    g: &WeightedGraph,
    s: &OpinionVector,
    modified: &OpinionVector,
    z: &OpinionVector,
    z_new: &OpinionVector,
    k: usize,
    plan: &DisruptionPlan,
) -> Result<Vec<BoundReport>> {
    let d_max = g.degrees().max_weighted;
    let changed = s.iter().zip(modified.iter()).filter(|(a, b)| a != b).count();
    let non_extreme = plan.takeovers[..k]
        .iter()
        .filter(|t| t.opinion != 0.0 && t.opinion != 1.0)
        .count();
    Ok(vec![
        check_polarization_bound(polarization(z), polarization(z_new), k),
        check_disagreement_bound(disagreement(g, z)?, disagreement(g, z_new)?, k, d_max),
        check_l1_shift(z, z_new, k)?,
        BoundReport::new(BoundKind::Budget, 0.0, changed as f64, k, None, k as f64),
        BoundReport::new(BoundKind::Extremes, 0.0, non_extreme as f64, k, None, 0.0),
    ])
}
