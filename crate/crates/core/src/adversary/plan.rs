use serde::{Deserialize, Serialize};

use super::HeuristicKind;
use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};

/// One node taken over and the opinion written into it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Takeover {
    pub node: usize,
    pub opinion: f64,
}

/// Ordered takeovers plus the objective value after each of them.
///
/// `trajectory[i]` is the objective after the first `i` takeovers, so
/// `trajectory[0]` is the undisturbed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisruptionPlan {
    pub heuristic: HeuristicKind,
    pub takeovers: Vec<Takeover>,
    pub original: OpinionVector,
    pub modified: OpinionVector,
    pub trajectory: Vec<f64>,
    pub stopped_early: bool,
}

impl DisruptionPlan {
    pub fn empty(heuristic: HeuristicKind, s: &OpinionVector, value: f64) -> Self {
        DisruptionPlan {
            heuristic,
            takeovers: Vec::new(),
            original: s.clone(),
            modified: s.clone(),
            trajectory: vec![value],
            stopped_early: false,
        }
    }

    pub fn len(&self) -> usize {
        self.takeovers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.takeovers.is_empty()
    }

    /// `‖s' - s‖₀`.
    pub fn changed_count(&self) -> usize {
        self.original
            .iter()
            .zip(self.modified.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn initial_value(&self) -> f64 {
        self.trajectory[0]
    }

    pub fn final_value(&self) -> f64 {
        *self.trajectory.last().expect("trajectory is never empty")
    }

    /// Objective with budget `k`. Past the end of the plan (greedy stopped
    /// early, or `k` beyond the computed budget) the last value holds.
    pub fn value_at(&self, k: usize) -> f64 {
        self.trajectory[k.min(self.trajectory.len() - 1)]
    }

    /// The plan restricted to its first `k` takeovers.
    pub fn prefix(&self, k: usize) -> DisruptionPlan {
        let k = k.min(self.takeovers.len());
        let takeovers = self.takeovers[..k].to_vec();
        let modified = apply_takeovers(&self.original, &takeovers)
            .expect("takeovers of a valid plan stay in range");
        DisruptionPlan {
            heuristic: self.heuristic,
            takeovers,
            original: self.original.clone(),
            modified,
            trajectory: self.trajectory[..=k.min(self.trajectory.len() - 1)].to_vec(),
            stopped_early: self.stopped_early && k == self.takeovers.len(),
        }
    }
}

/// Writes the takeovers into a copy of `s`.
pub fn apply_takeovers(s: &OpinionVector, takeovers: &[Takeover]) -> Result<OpinionVector> {
    let mut values = s.as_slice().to_vec();
    let n = values.len();
    for t in takeovers {
        if t.node >= n {
            return Err(Error::NodeOutOfRange { node: t.node, n });
        }
        values[t.node] = t.opinion;
    }
    OpinionVector::new(values)
}
