//! Disagreement, polarization and their weighted sum.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{InfluenceMatrix, OpinionVector};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Disagreement,
    Polarization,
    WeightedSum,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [
        ObjectiveKind::Disagreement,
        ObjectiveKind::Polarization,
        ObjectiveKind::WeightedSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Disagreement => "disagreement",
            ObjectiveKind::Polarization => "polarization",
            ObjectiveKind::WeightedSum => "weighted-sum",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disagreement" | "d" => Ok(ObjectiveKind::Disagreement),
            "polarization" | "p" => Ok(ObjectiveKind::Polarization),
            "weighted-sum" | "weighted_sum" | "ws" => Ok(ObjectiveKind::WeightedSum),
            other => Err(Error::Config(format!("unknown objective '{other}'"))),
        }
    }
}

/// Which objective to maximize. `lambda` only matters for the weighted sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub lambda: f64,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be a finite nonnegative number, got {lambda}"
            )));
        }
        Ok(ObjectiveSpec { kind, lambda })
    }

    pub fn disagreement() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::Disagreement,
            lambda: DEFAULT_LAMBDA,
        }
    }

    pub fn polarization() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::Polarization,
            lambda: DEFAULT_LAMBDA,
        }
    }

    pub fn weighted_sum(lambda: f64) -> Result<Self> {
        Self::new(ObjectiveKind::WeightedSum, lambda)
    }

    /// `n/m`, the factor applied to disagreement in the weighted sum.
    pub fn disagreement_scale(&self, g: &WeightedGraph) -> Result<f64> {
        if g.edge_count() == 0 {
            return Err(Error::NoEdges);
        }
        Ok(g.node_count() as f64 / g.edge_count() as f64)
    }

    /// Objective value at equilibrium opinions `z`.
    pub fn evaluate(&self, g: &WeightedGraph, z: &OpinionVector) -> Result<f64> {
        match self.kind {
            ObjectiveKind::Disagreement => disagreement(g, z),
            ObjectiveKind::Polarization => {
                z.check_len(g.node_count())?;
                Ok(polarization(z))
            }
            ObjectiveKind::WeightedSum => weighted_sum(g, z, self.lambda),
        }
    }
}

/// `Σ_{(u,v) ∈ E} w_uv (z_u - z_v)²`, each unordered edge once.
pub fn disagreement(g: &WeightedGraph, z: &OpinionVector) -> Result<f64> {
    z.check_len(g.node_count())?;
    Ok(g.edges()
        .iter()
        .map(|e| {
            let d = z[e.u] - z[e.v];
            e.weight * d * d
        })
        .sum())
}

/// `Σ_v (z_v - z̄)²`, i.e. `n` times the variance.
pub fn polarization(z: &OpinionVector) -> f64 {
    let mean = z.mean();
    z.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// `P(z) + λ (n/m) D(z)`.
pub fn weighted_sum(g: &WeightedGraph, z: &OpinionVector, lambda: f64) -> Result<f64> {
    let spec = ObjectiveSpec::weighted_sum(lambda)?;
    let scale = spec.disagreement_scale(g)?;
    Ok(polarization(z) + lambda * scale * disagreement(g, z)?)
}

/// Objective of the equilibrium reached from innate opinions `s`.
pub fn objective_of_innate(
    inf: &InfluenceMatrix,
    g: &WeightedGraph,
    s: &OpinionVector,
    spec: &ObjectiveSpec,
) -> Result<f64> {
    spec.evaluate(g, &inf.equilibrium(s)?)
}

/// An objective written as a quadratic form in the innate opinions,
/// `f(s) = sᵀ A s`.
///
/// Changing one coordinate by `δ` moves the value by `2δ (A s)_j + δ² A_jj`,
/// which is what makes candidate evaluation O(1) once `A s` is known.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    spec: ObjectiveSpec,
    form: Arc<DMatrix<f64>>,
}

impl QuadraticObjective {
    pub fn new(inf: &InfluenceMatrix, g: &WeightedGraph, spec: ObjectiveSpec) -> Result<Self> {
        if inf.n() != g.node_count() {
            return Err(Error::LengthMismatch {
                expected: g.node_count(),
                found: inf.n(),
            });
        }
        let form = match spec.kind {
            ObjectiveKind::Disagreement => inf.disagreement_form(),
            ObjectiveKind::Polarization => inf.polarization_form(),
            ObjectiveKind::WeightedSum => {
                let coef = spec.lambda * spec.disagreement_scale(g)?;
                let d = inf.disagreement_form();
                Arc::new(inf.polarization_form().as_ref() + d.as_ref() * coef)
            }
        };
        Ok(QuadraticObjective { spec, form })
    }

    pub fn spec(&self) -> ObjectiveSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.form.nrows()
    }

    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }

    pub fn diagonal(&self, j: usize) -> f64 {
        self.form[(j, j)]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.form.as_slice()[j * n..(j + 1) * n]
    }

    /// `A s`.
    pub fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let g = self.form.as_ref() * DVector::from_column_slice(s);
        g.as_slice().to_vec()
    }

    pub fn value(&self, s: &[f64]) -> f64 {
        let g = self.gradient(s);
        g.iter().zip(s).map(|(a, b)| a * b).sum()
    }
}
