//! Exhaustive search over takeover sets.
//!
//! Only extreme opinions are tried: the objectives are convex in each
//! innate opinion, so an optimal change always lands on 0 or 1.

use super::{tie_tolerance, Adversary, DisruptionPlan, HeuristicKind, Incremental, Takeover};
use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};

/// Largest `C(n, k) · 2^k` the exhaustive search accepts.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// `C(n, k) · 2^k`, as a float to avoid overflow.
pub fn enumeration_size(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k_small = k.min(n - k);
    let mut binom = 1.0f64;
    for i in 0..k_small {
        binom = binom * (n - i) as f64 / (i + 1) as f64;
    }
    binom.round() * 2f64.powi(k as i32)
}

/// Calls `visit` on every increasing `r`-subset of `start..n`, in
/// lexicographic order, until it returns `false`.
fn for_each_combination(start: usize, n: usize, r: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if r == 0 {
        return visit(&[]);
    }
    if start + r > n {
        return true;
    }
    let mut idx: Vec<usize> = (start..start + r).collect();
    loop {
        if !visit(&idx) {
            return false;
        }
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return true;
        }
        i -= 1;
        idx[i] += 1;
        for t in i + 1..r {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Assignment `mask` gives the first node the most significant bit, so
/// increasing masks are lexicographic in the opinions.
fn opinion_of(mask: u64, position: usize, size: usize) -> f64 {
    ((mask >> (size - 1 - position)) & 1) as f64
}

impl Adversary<'_> {
    /// Optimal takeover plan with at most `k` changes.
    ///
    /// Candidates are visited by number of takeovers, then node set in
    /// lexicographic order, then opinions in lexicographic order; the first
    /// candidate within tie tolerance of the optimum is returned.
    pub fn brute_force(&self, s: &OpinionVector, k: usize) -> Result<DisruptionPlan> {
        self.check(s, k)?;
        let n = self.graph.node_count();
        let count = enumeration_size(n, k);
        if count > ENUMERATION_LIMIT {
            return Err(Error::EnumerationTooLarge {
                count,
                limit: ENUMERATION_LIMIT,
            });
        }
        let base = s.as_slice();
        let grad = self.objective.gradient(base);
        let f0: f64 = grad.iter().zip(base).map(|(a, b)| a * b).sum();
        let form = self.objective.form();

        let evaluate = |nodes: &[usize], mask: u64| -> f64 {
            let c = nodes.len();
            let mut value = f0;
            for (p, &i) in nodes.iter().enumerate() {
                let di = opinion_of(mask, p, c) - base[i];
                if di == 0.0 {
                    continue;
                }
                value += 2.0 * di * grad[i];
                for (q, &j) in nodes.iter().enumerate() {
                    let dj = opinion_of(mask, q, c) - base[j];
                    value += di * dj * form[(i, j)];
                }
            }
            value
        };

        // work units: (size, first node), in enumeration order
        let units: Vec<(usize, usize)> = (1..=k).flat_map(|c| (0..n).map(move |i0| (c, i0))).collect();
        let visit_unit = |&(c, i0): &(usize, usize), f: &mut dyn FnMut(&[usize], u64) -> bool| {
            let mut nodes = Vec::with_capacity(c);
            for_each_combination(i0 + 1, n, c - 1, &mut |rest| {
                nodes.clear();
                nodes.push(i0);
                nodes.extend_from_slice(rest);
                (0..1u64 << c).all(|mask| f(&nodes, mask))
            });
        };

        let best = self
            .exec
            .map_slice(&units, |unit| {
                let mut best = f64::NEG_INFINITY;
                visit_unit(unit, &mut |nodes, mask| {
                    best = best.max(evaluate(nodes, mask));
                    true
                });
                best
            })
            .into_iter()
            .fold(f0, f64::max);

        let threshold = best - tie_tolerance(best);
        let winner: Option<(Vec<usize>, u64)> = if f0 >= threshold {
            Some((Vec::new(), 0))
        } else {
            self.exec
                .map_slice(&units, |unit| {
                    let mut hit = None;
                    visit_unit(unit, &mut |nodes, mask| {
                        if evaluate(nodes, mask) >= threshold {
                            hit = Some((nodes.to_vec(), mask));
                            false
                        } else {
                            true
                        }
                    });
                    hit
                })
                .into_iter()
                .flatten()
                .next()
        };
        let (nodes, mask) = winner.expect("the optimum is attained by some candidate");

        let mut state = Incremental::new(&self.objective, s);
        let mut plan = DisruptionPlan::empty(HeuristicKind::BruteForce, s, state.value);
        for (p, &node) in nodes.iter().enumerate() {
            let opinion = opinion_of(mask, p, nodes.len());
            state.commit(node, opinion);
            plan.takeovers.push(Takeover { node, opinion });
            plan.trajectory.push(state.value);
        }
        plan.modified = state.into_opinions();
        Ok(plan)
    }
}
