mod common;

use std::collections::BTreeSet;

use netdisrupt::analysis::{check_disagreement_bound, check_l1_shift, check_polarization_bound};
use netdisrupt::dataio::{self, PlanRecord};
use netdisrupt::experiment::SweepRow;
use netdisrupt::{
    greedy, laplacian, Adversary, HeuristicKind, InfluenceMatrix, ObjectiveKind, ObjectiveSpec,
    OpinionVector, WeightedGraph,
};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.01f64..=1.0), 0..=3 * n).prop_map(move |raw| {
            let mut seen = BTreeSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
                .collect();
            WeightedGraph::from_edges(n, edges).unwrap()
        })
    })
}

/// Graph, opinions and up to `max_k` distinct takeovers with arbitrary values.
fn instance_strategy(
    max_n: usize,
    max_k: usize,
) -> impl Strategy<Value = (WeightedGraph, Vec<f64>, Vec<(usize, f64)>)> {
    graph_strategy(max_n).prop_flat_map(move |g| {
        let n = g.node_count();
        (
            Just(g),
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec((0..n, 0.0f64..=1.0), 0..=max_k),
        )
            .prop_map(|(g, s, raw)| {
                let mut seen = BTreeSet::new();
                let takeovers = raw.into_iter().filter(|(j, _)| seen.insert(*j)).collect();
                (g, s, takeovers)
            })
    })
}

fn spec_strategy() -> impl Strategy<Value = ObjectiveSpec> {
    prop_oneof![
        Just(ObjectiveSpec::disagreement()),
        Just(ObjectiveSpec::polarization()),
        (0.1f64..5.0).prop_map(|l| ObjectiveSpec::weighted_sum(l).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_rows_sum_to_zero(g in graph_strategy(25)) {
        let l = laplacian(&g);
        let degrees = g.degrees();
        for i in 0..g.node_count() {
            let row: f64 = l.row(i).iter().sum();
            prop_assert!(row.abs() < 1e-12);
            prop_assert!((l[(i, i)] - degrees.weighted[i]).abs() < 1e-12);
            for j in 0..g.node_count() {
                prop_assert_eq!(l[(i, j)], l[(j, i)]);
            }
        }
    }

    #[test]
    fn degree_sum_is_twice_total_weight(g in graph_strategy(30)) {
        let degrees = g.degrees();
        let sum: f64 = degrees.weighted.iter().sum();
        prop_assert!((sum - 2.0 * g.total_weight()).abs() < 1e-9);
        let count: usize = degrees.unweighted.iter().sum();
        prop_assert_eq!(count, 2 * g.edge_count());
    }

    #[test]
    fn equilibrium_is_linear_and_mean_preserving(
        (g, s, _) in instance_strategy(20, 0),
        t_seed in any::<u64>(),
        alpha in 0.0f64..=1.0,
    ) {
        let n = g.node_count();
        let mut rng = common::rng(t_seed);
        let t = common::uniform_opinions(&mut rng, n);
        let s = OpinionVector::new(s).unwrap();
        let inf = InfluenceMatrix::new(&g).unwrap();
        let zs = inf.equilibrium(&s).unwrap();
        let zt = inf.equilibrium(&t).unwrap();
        let mix = OpinionVector::new(
            s.iter().zip(t.iter()).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect(),
        ).unwrap();
        let zm = inf.equilibrium(&mix).unwrap();
        for i in 0..n {
            prop_assert!((zm[i] - (alpha * zs[i] + (1.0 - alpha) * zt[i])).abs() < 1e-10);
        }
        prop_assert!((zs.mean() - s.mean()).abs() < 1e-10);
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(zs.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }

    #[test]
    fn single_change_matches_full_solve(
        (g, s, takeovers) in instance_strategy(20, 1),
    ) {
        prop_assume!(!takeovers.is_empty());
        let (j, a) = takeovers[0];
        let s = OpinionVector::new(s).unwrap();
        let inf = InfluenceMatrix::new(&g).unwrap();
        let z = inf.equilibrium(&s).unwrap();
        let fast = inf.apply_single_change(&s, &z, j, a - s[j]).unwrap();
        let slow = common::equilibrium(&g, s.with(j, a).unwrap().as_slice());
        prop_assert!(common::max_abs_diff(fast.as_slice(), &slow) < 1e-10);
    }

    #[test]
    fn takeovers_respect_bounds((g, s, takeovers) in instance_strategy(25, 10)) {
        let k = takeovers.len();
        let mut t = s.clone();
        for &(j, a) in &takeovers {
            t[j] = a;
        }
        let z = common::equilibrium(&g, &s);
        let z_new = common::equilibrium(&g, &t);
        let zv = OpinionVector::new(z.iter().map(|v| v.clamp(0.0, 1.0)).collect()).unwrap();
        let zn = OpinionVector::new(z_new.iter().map(|v| v.clamp(0.0, 1.0)).collect()).unwrap();
        prop_assert!(check_l1_shift(&zv, &zn, k).unwrap().pass);
        prop_assert!(check_polarization_bound(common::polarization(&z), common::polarization(&z_new), k).pass);
        let d_max = g.degrees().max_weighted;
        prop_assert!(check_disagreement_bound(
            common::disagreement(&g, &z),
            common::disagreement(&g, &z_new),
            k,
            d_max,
        ).pass);
    }

    #[test]
    fn objective_is_convex_in_each_coordinate(
        (g, s, takeovers) in instance_strategy(15, 1),
        spec in spec_strategy(),
    ) {
        prop_assume!(g.edge_count() > 0 && !takeovers.is_empty());
        let j = takeovers[0].0;
        let inf = InfluenceMatrix::new(&g).unwrap();
        let adversary = Adversary::new(&inf, &g, spec).unwrap();
        let s = OpinionVector::new(s).unwrap();
        let f = |t: f64| adversary.value(&s.with(j, t).unwrap()).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| f(i as f64 / 10.0)).collect();
        let tol = 1e-10 * grid.iter().cloned().fold(1.0, f64::max);
        for w in grid.windows(3) {
            prop_assert!(w[1] <= 0.5 * (w[0] + w[2]) + tol);
        }
        let edge_max = grid[0].max(grid[10]);
        prop_assert!(grid.iter().all(|&v| v <= edge_max + tol));
    }

    #[test]
    fn greedy_is_monotone_and_prefix_consistent(
        (g, s, _) in instance_strategy(15, 0),
        spec in spec_strategy(),
        k in 0usize..8,
    ) {
        let (g, s, _) = g.remove_isolated(&OpinionVector::new(s).unwrap()).unwrap_or_else(
            |_| (WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap(), OpinionVector::constant(2, 0.5).unwrap(), vec![]),
        );
        let k = k.min(g.node_count());
        let inf = InfluenceMatrix::new(&g).unwrap();
        let full = greedy(&inf, &g, &s, k, &spec).unwrap();
        for w in full.trajectory.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
        }
        prop_assert!(full.takeovers.iter().all(|t| t.opinion == 0.0 || t.opinion == 1.0));
        if k > 0 {
            let shorter = greedy(&inf, &g, &s, k - 1, &spec).unwrap();
            prop_assert_eq!(&shorter.takeovers[..], &full.takeovers[..shorter.len().min(full.len())]);
        }
    }

    #[test]
    fn heuristics_take_distinct_nodes(
        (g, s, _) in instance_strategy(20, 0),
        k in 0usize..20,
        seed in any::<u64>(),
    ) {
        prop_assume!(g.edge_count() > 0);
        let s = OpinionVector::new(s).unwrap();
        let k = k.min(g.node_count());
        let inf = InfluenceMatrix::new(&g).unwrap();
        let adversary = Adversary::new(&inf, &g, ObjectiveSpec::polarization()).unwrap();
        for kind in HeuristicKind::SWEEP.into_iter().filter(|&h| h != HeuristicKind::Greedy) {
            let plan = adversary.run(kind, &s, k, &mut common::rng(seed)).unwrap();
            prop_assert_eq!(plan.len(), k);
            let nodes: BTreeSet<usize> = plan.takeovers.iter().map(|t| t.node).collect();
            prop_assert_eq!(nodes.len(), k);
            prop_assert!(plan.takeovers.iter().all(|t| t.opinion == 0.0 || t.opinion == 1.0));
            prop_assert_eq!(plan.trajectory.len(), k + 1);
        }
    }

    #[test]
    fn graph_and_opinions_round_trip((g, s, _) in instance_strategy(20, 0)) {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("g.edges");
        let opinions = dir.path().join("g.opinions");
        dataio::write_edgelist(&g, std::fs::File::create(&edges).unwrap()).unwrap();
        dataio::write_opinions(&OpinionVector::new(s.clone()).unwrap(), std::fs::File::create(&opinions).unwrap()).unwrap();
        let data = dataio::Dataset::load("rt", &edges, &opinions, true).unwrap();
        prop_assert_eq!(data.graph.node_count(), g.node_count());
        prop_assert_eq!(data.graph.edge_count(), g.edge_count());
        for e in g.edges() {
            let (u, v) = (data.ids.get(&e.u.to_string()).unwrap(), data.ids.get(&e.v.to_string()).unwrap());
            prop_assert_eq!(data.graph.weight(u, v), e.weight);
        }
        for (i, &value) in s.iter().enumerate() {
            prop_assert_eq!(data.opinions[data.ids.get(&i.to_string()).unwrap()], value);
        }
    }

    #[test]
    fn sweep_rows_round_trip(values in prop::collection::vec((any::<f64>(), 0usize..1000, any::<u64>()), 0..30)) {
        let rows: Vec<SweepRow> = values
            .iter()
            .enumerate()
            .map(|(i, &(value, k, seed))| SweepRow {
                heuristic: HeuristicKind::SWEEP[i % 6],
                objective: ObjectiveKind::ALL[i % 3],
                lambda: 0.5 + i as f64,
                k,
                value: if value.is_finite() { value } else { 0.0 },
                seed,
                graph_id: format!("g,{i}"),
            })
            .collect();
        let mut buf = Vec::new();
        dataio::write_sweep_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(dataio::read_sweep_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn plans_round_trip((g, s, _) in instance_strategy(12, 0), k in 0usize..6, seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        let s = OpinionVector::new(s).unwrap();
        let k = k.min(g.node_count());
        let inf = InfluenceMatrix::new(&g).unwrap();
        let spec = ObjectiveSpec::polarization();
        let plan = Adversary::new(&inf, &g, spec).unwrap().run(HeuristicKind::Random, &s, k, &mut common::rng(seed)).unwrap();
        let records = vec![PlanRecord { graph_id: "g".into(), seed, objective: spec, plan }];
        let mut buf = Vec::new();
        dataio::write_plans(&records, &mut buf).unwrap();
        prop_assert_eq!(dataio::read_plans(&buf[..]).unwrap(), records);
    }
}
