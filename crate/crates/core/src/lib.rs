//! Adversarial disruption of opinion dynamics on weighted graphs.
//!
//! Innate opinions `s ∈ [0,1]^n` settle at the equilibrium
//! `z = (I + L)^{-1} s` of the Friedkin-Johnsen model. An adversary that
//! takes over `k` nodes rewrites their innate opinions to maximise
//! disagreement, polarization or a weighted mix of both at the new
//! equilibrium.
//!
//! ```
//! use netdisrupt::{greedy, InfluenceMatrix, ObjectiveSpec, OpinionVector, WeightedGraph};
//!
//! let g = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
//! let inf = InfluenceMatrix::new(&g).unwrap();
//! let s = OpinionVector::new(vec![0.5, 0.5]).unwrap();
//! let plan = greedy(&inf, &g, &s, 2, &ObjectiveSpec::disagreement()).unwrap();
//! assert!((plan.final_value() - 1.0 / 9.0).abs() < 1e-12);
//! ```

pub mod adversary;
pub mod analysis;
pub mod dataio;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod objectives;
pub mod rng;

pub use adversary::{
    apply_takeovers, brute_force_optimal, greedy, max_degree, mean_opinion, random_heuristic,
    Adversary, DisruptionPlan, HeuristicKind, MeanOpinionRule, Takeover,
};
pub use analysis::{audit_plan, BoundKind, BoundReport};
pub use dynamics::{equilibrium, influence, iterate_dynamics, InfluenceMatrix, OpinionVector};
pub use error::{Error, Result};
pub use exec::Exec;
pub use experiment::{run_sweep, table_report, SweepConfig, SweepRow};
pub use generators::{GeneratorConfig, GraphModel, OpinionModel};
pub use graph::{laplacian, WeightedGraph};
pub use objectives::{disagreement, polarization, weighted_sum, ObjectiveKind, ObjectiveSpec};
