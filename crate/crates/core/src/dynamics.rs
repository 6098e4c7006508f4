//! Friedkin-Johnsen opinion dynamics.
//!
//! Innate opinions `s` settle at the equilibrium `z = (I + L)^{-1} s`. The
//! inverse `M = (I + L)^{-1}` is symmetric, entrywise nonnegative and has
//! unit row sums, so equilibria stay in `[0, 1]` and keep the mean of `s`.

use std::ops::Index;
use std::sync::{Arc, OnceLock};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::WeightedGraph;

/// Opinions of every node, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OpinionOutOfRange { index, value });
        }
        Ok(OpinionVector(values))
    }

    /// Wraps values without range checks. Used for computed equilibria,
    /// which may sit a rounding error outside `[0, 1]`.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        OpinionVector(values)
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    /// Copy with coordinate `j` replaced by `value`.
    pub fn with(&self, j: usize, value: f64) -> Result<Self> {
        if j >= self.len() {
            return Err(Error::NodeOutOfRange {
                node: j,
                n: self.len(),
            });
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OpinionOutOfRange { index: j, value });
        }
        let mut v = self.0.clone();
        v[j] = value;
        Ok(OpinionVector(v))
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for OpinionVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for OpinionVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn factorize(g: &WeightedGraph) -> Result<Cholesky<f64, Dyn>> {
    let n = g.node_count();
    let system = DMatrix::identity(n, n) + g.laplacian();
    Cholesky::new(system).ok_or(Error::NotPositiveDefinite)
}

/// Cholesky factorization of `I + L`, reused across right-hand sides.
///
/// Cheaper than [`InfluenceMatrix`] when only a handful of equilibria are
/// needed.
pub struct EquilibriumSolver {
    n: usize,
    factor: Cholesky<f64, Dyn>,
}

impl EquilibriumSolver {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Ok(EquilibriumSolver {
            n: g.node_count(),
            factor: factorize(g)?,
        })
    }

    pub fn solve(&self, s: &[f64]) -> Result<OpinionVector> {
        if s.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: s.len(),
            });
        }
        let z = self.factor.solve(&DVector::from_column_slice(s));
        Ok(OpinionVector::from_raw(z.as_slice().to_vec()))
    }
}

/// Direct equilibrium solve without materializing the inverse.
pub fn solve_equilibrium(g: &WeightedGraph, s: &OpinionVector) -> Result<OpinionVector> {
    EquilibriumSolver::new(g)?.solve(s.as_slice())
}

/// `M = (I + L)^{-1}` with lazily built quadratic-form matrices.
///
/// * disagreement form `A_D = M L M`, so that `D(z) = sᵀ A_D s`;
/// * polarization form `A_P = (C M)ᵀ (C M)` with `C = I - 11ᵀ/n`, so that
///   `P(z) = sᵀ A_P s`.
///
/// Both are computed from `M²` using `L = M⁻¹ - I` and `M1 = 1`:
/// `A_D = M - M²` and `A_P = M² - 11ᵀ/n`.
pub struct InfluenceMatrix {
    matrix: DMatrix<f64>,
    exec: Exec,
    square: OnceLock<Arc<DMatrix<f64>>>,
    disagreement: OnceLock<Arc<DMatrix<f64>>>,
    polarization: OnceLock<Arc<DMatrix<f64>>>,
}

impl std::fmt::Debug for InfluenceMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InfluenceMatrix")
            .field("n", &self.n())
            .finish_non_exhaustive()
    }
}

impl InfluenceMatrix {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Self::with_exec(g, Exec::default())
    }

    pub fn with_exec(g: &WeightedGraph, exec: Exec) -> Result<Self> {
        let inverse = factorize(g)?.inverse();
        // symmetrize away rounding asymmetry
        let matrix = (&inverse + inverse.transpose()) * 0.5;
        Ok(InfluenceMatrix {
            matrix,
            exec,
            square: OnceLock::new(),
            disagreement: OnceLock::new(),
            polarization: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// Column `j` of `M`: the equilibrium response to a unit change of `s_j`.
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.matrix.as_slice()[j * n..(j + 1) * n]
    }

    pub fn equilibrium(&self, s: &OpinionVector) -> Result<OpinionVector> {
        s.check_len(self.n())?;
        let z = &self.matrix * DVector::from_column_slice(s.as_slice());
        Ok(OpinionVector::from_raw(z.as_slice().to_vec()))
    }

    /// Equilibrium after shifting `s_j` by `delta`, from the current
    /// equilibrium `z` in O(n): `z' = z + delta · M[:, j]`.
    pub fn apply_single_change(
        &self,
        s: &OpinionVector,
        z: &OpinionVector,
        j: usize,
        delta: f64,
    ) -> Result<OpinionVector> {
        let n = self.n();
        s.check_len(n)?;
        z.check_len(n)?;
        if j >= n {
            return Err(Error::NodeOutOfRange { node: j, n });
        }
        let shifted = s[j] + delta;
        if !(0.0..=1.0).contains(&shifted) {
            return Err(Error::OpinionOutOfRange {
                index: j,
                value: shifted,
            });
        }
        let col = self.column(j);
        Ok(OpinionVector::from_raw(
            z.iter().zip(col).map(|(zi, mi)| zi + delta * mi).collect(),
        ))
    }

    fn square(&self) -> &Arc<DMatrix<f64>> {
        self.square
            .get_or_init(|| Arc::new(symmetric_square(&self.matrix, self.exec)))
    }

    pub fn disagreement_form(&self) -> Arc<DMatrix<f64>> {
        self.disagreement
            .get_or_init(|| Arc::new(&self.matrix - self.square().as_ref()))
            .clone()
    }

    pub fn polarization_form(&self) -> Arc<DMatrix<f64>> {
        self.polarization
            .get_or_init(|| {
                let n = self.n();
                let shift = 1.0 / n as f64;
                Arc::new(self.square().map(|x| x - shift))
            })
            .clone()
    }
}

/// `M · M` for symmetric `M`; column blocks are multiplied in parallel.
fn symmetric_square(m: &DMatrix<f64>, exec: Exec) -> DMatrix<f64> {
    const BLOCK: usize = 64;
    let n = m.nrows();
    if !exec.is_parallel() || n <= BLOCK {
        return m * m;
    }
    let blocks = n.div_ceil(BLOCK);
    let parts = exec.map(blocks, |b| {
        let start = b * BLOCK;
        let width = BLOCK.min(n - start);
        m * m.columns(start, width)
    });
    let mut out = DMatrix::zeros(n, n);
    for (b, part) in parts.into_iter().enumerate() {
        out.columns_mut(b * BLOCK, part.ncols()).copy_from(&part);
    }
    out
}

/// See [`InfluenceMatrix::new`].
pub fn influence(g: &WeightedGraph) -> Result<InfluenceMatrix> {
    InfluenceMatrix::new(g)
}

/// See [`InfluenceMatrix::equilibrium`].
pub fn equilibrium(inf: &InfluenceMatrix, s: &OpinionVector) -> Result<OpinionVector> {
    inf.equilibrium(s)
}

/// See [`InfluenceMatrix::apply_single_change`].
pub fn apply_single_change(
    inf: &InfluenceMatrix,
    s: &OpinionVector,
    z: &OpinionVector,
    j: usize,
    delta: f64,
) -> Result<OpinionVector> {
    inf.apply_single_change(s, z, j, delta)
}

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

pub fn default_max_steps(n: usize) -> usize {
    10 * n + 1000
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsOutcome {
    pub opinions: OpinionVector,
    pub steps: usize,
    pub converged: bool,
}

/// Runs the synchronous update
/// `z_i ← (s_i + Σ_j w_ij z_j) / (1 + Σ_j w_ij)` from `z = s`.
///
/// The update is a contraction in the max norm with factor
/// `ρ = d_max / (1 + d_max)`, so the distance to the fixed point is at most
/// `ρ/(1-ρ)` times the last step. Iteration stops once that bound drops
/// below `tol`, or after `max_steps` updates with `converged = false`.
pub fn iterate_dynamics(
    g: &WeightedGraph,
    s: &OpinionVector,
    tol: f64,
    max_steps: usize,
) -> Result<DynamicsOutcome> {
    let n = g.node_count();
    s.check_len(n)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    let degrees = g.degrees();
    let rho = degrees.max_weighted / (1.0 + degrees.max_weighted);
    let step_threshold = if rho == 0.0 {
        f64::INFINITY
    } else {
        tol * (1.0 - rho) / rho
    };

    let mut z = s.as_slice().to_vec();
    let mut next = vec![0.0; n];
    for step in 1..=max_steps {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let pull: f64 = g.neighbors(i).iter().map(|&(j, w)| w * z[j]).sum();
            next[i] = (s[i] + pull) / (1.0 + degrees.weighted[i]);
            change = change.max((next[i] - z[i]).abs());
        }
        std::mem::swap(&mut z, &mut next);
        if change < step_threshold {
            return Ok(DynamicsOutcome {
                opinions: OpinionVector::from_raw(z),
                steps: step,
                converged: true,
            });
        }
    }
    Ok(DynamicsOutcome {
        opinions: OpinionVector::from_raw(z),
        steps: max_steps,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_edge() -> WeightedGraph {
        WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    fn ov(v: &[f64]) -> OpinionVector {
        OpinionVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn opinion_vector_range() {
        assert!(OpinionVector::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(matches!(
            OpinionVector::new(vec![0.2, 1.1]),
            Err(Error::OpinionOutOfRange { index: 1, .. })
        ));
        assert!(OpinionVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn single_edge_influence() {
        // inverse of [[2, -1], [-1, 2]] is [[2, 1], [1, 2]] / 3
        let inf = InfluenceMatrix::new(&single_edge()).unwrap();
        let m = inf.matrix();
        assert_abs_diff_eq!(m[(0, 0)], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_graph_influence_is_identity() {
        let inf = InfluenceMatrix::new(&WeightedGraph::empty(3)).unwrap();
        assert_eq!(inf.matrix(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn single_edge_equilibria() {
        let inf = InfluenceMatrix::new(&single_edge()).unwrap();
        let z = inf.equilibrium(&ov(&[0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(z[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 2.0 / 3.0, epsilon = 1e-15);
        let z = inf.equilibrium(&ov(&[0.0, 0.5])).unwrap();
        assert_abs_diff_eq!(z[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 1.0 / 3.0, epsilon = 1e-15);

        let direct = solve_equilibrium(&single_edge(), &ov(&[0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(direct[0], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_opinions_are_fixed() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 0.3), (1, 2, 0.9), (2, 3, 0.5), (0, 3, 1.0)])
            .unwrap();
        let inf = InfluenceMatrix::new(&g).unwrap();
        let z = inf.equilibrium(&OpinionVector::constant(4, 0.37).unwrap()).unwrap();
        for v in z.iter() {
            assert_abs_diff_eq!(*v, 0.37, epsilon = 1e-12);
        }
    }

    #[test]
    fn equilibrium_length_mismatch() {
        let inf = InfluenceMatrix::new(&single_edge()).unwrap();
        assert!(matches!(
            inf.equilibrium(&ov(&[0.5])),
            Err(Error::LengthMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn iterate_empty_graph_is_immediate() {
        let s = ov(&[0.1, 0.9, 0.4]);
        let out = iterate_dynamics(&WeightedGraph::empty(3), &s, 1e-10, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.steps, 1);
        assert_eq!(out.opinions, s);
    }

    #[test]
    fn iterate_single_edge() {
        let out = iterate_dynamics(&single_edge(), &ov(&[0.0, 1.0]), 1e-10, 1000).unwrap();
        assert!(out.converged);
        assert_abs_diff_eq!(out.opinions[0], 1.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(out.opinions[1], 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn iterate_flags_non_convergence() {
        let out = iterate_dynamics(&single_edge(), &ov(&[0.0, 1.0]), 1e-14, 2).unwrap();
        assert!(!out.converged);
        assert_eq!(out.steps, 2);
        assert!(iterate_dynamics(&single_edge(), &ov(&[0.0, 1.0]), 0.0, 2).is_err());
        assert!(iterate_dynamics(&single_edge(), &ov(&[0.0, 1.0]), 1e-3, 0).is_err());
    }

    #[test]
    fn single_change_matches_example() {
        let inf = InfluenceMatrix::new(&single_edge()).unwrap();
        let s = ov(&[0.5, 0.5]);
        let z = inf.equilibrium(&s).unwrap();
        let same = inf.apply_single_change(&s, &z, 0, 0.0).unwrap();
        assert_eq!(same, z);
        let moved = inf.apply_single_change(&s, &z, 0, -0.5).unwrap();
        assert_abs_diff_eq!(moved[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(moved[1], 1.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(
            inf.apply_single_change(&s, &z, 1, 0.6),
            Err(Error::OpinionOutOfRange { index: 1, .. })
        ));
    }

    #[test]
    fn forms_match_direct_products() {
        let g = WeightedGraph::from_edges(
            5,
            [(0, 1, 0.3), (1, 2, 0.9), (2, 3, 0.5), (3, 4, 1.0), (0, 4, 0.2), (1, 3, 0.7)],
        )
        .unwrap();
        for exec in [Exec::Sequential, Exec::Parallel] {
            let inf = InfluenceMatrix::with_exec(&g, exec).unwrap();
            let m = inf.matrix();
            let direct_d = m * g.laplacian() * m;
            let c = DMatrix::identity(5, 5) - DMatrix::from_element(5, 5, 0.2);
            let cm = &c * m;
            let direct_p = cm.transpose() * &cm;
            assert!((inf.disagreement_form().as_ref() - direct_d).amax() < 1e-12);
            assert!((inf.polarization_form().as_ref() - direct_p).amax() < 1e-12);
        }
    }

    #[test]
    fn blocked_square_matches_plain_product() {
        let n = 150;
        let m = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let plain = &m * &m;
        let blocked = symmetric_square(&m, Exec::Parallel);
        assert!((plain - blocked).amax() < 1e-12);
    }
}
