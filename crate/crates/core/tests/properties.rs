use proptest::prelude::*;

use cflow::blocking::{blocking_flow, maximal_disjoint_paths, Augmentation};
use cflow::eligibility::{Direction, EligibleArc, EligibleGraph};
use cflow::grid::Grid;
use cflow::instances::{
    random_conserving_flow, random_grid_potentials, random_linear, random_quadratic, rng,
    InstanceParams,
};
use cflow::network::{parse_network, serialize_network, EdgeId, VertexId};
use cflow::solver::{scaling_flow, simple_flow, solve, Algorithm, NoTrace, SolveOptions};
use cflow::verify::{expand_multiedges, reduced_cost_identity};

/// Layered arc lists: vertex 0 is the source, 1 the sink, the rest sit on
/// `layers` intermediate levels.
fn layered_arcs(unit: bool) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (1usize..4, 1usize..4).prop_flat_map(move |(layers, width)| {
        let n = 2 + layers * width;
        let level = move |v: usize| match v {
            0 => 0,
            1 => layers + 1,
            _ => 1 + (v - 2) / width,
        };
        let pair = (0..n, 0..n).prop_filter("forward in level", move |&(u, v)| {
            level(v) == level(u) + 1
        });
        let cap = if unit { Just(1.0).boxed() } else { (1u32..6).prop_map(f64::from).boxed() };
        (Just(n), prop::collection::vec((pair, cap), 1..30))
            .prop_map(|(n, arcs)| (n, arcs.into_iter().map(|((u, v), c)| (u, v, c)).collect()))
    })
}

fn graph(n: usize, arcs: &[(usize, usize, f64)]) -> EligibleGraph {
    let mut adjacency = vec![Vec::new(); n];
    let arcs: Vec<EligibleArc> = arcs
        .iter()
        .enumerate()
        .map(|(i, &(u, v, c))| {
            adjacency[u].push(i);
            EligibleArc {
                edge: EdgeId(i),
                direction: Direction::Forward,
                from: VertexId(u),
                to: VertexId(v),
                capacity: c,
            }
        })
        .collect();
    let mut g = EligibleGraph {
        arcs,
        adjacency,
        reachable: Vec::new(),
        source: VertexId(0),
        sink: VertexId(1),
    };
    let caps: Vec<f64> = g.arcs.iter().map(|a| a.capacity).collect();
    g.reachable = g.reachable_with(&caps, 0.0);
    g
}

fn assert_blocking(g: &EligibleGraph, aug: &Augmentation) -> Result<(), TestCaseError> {
    for (a, arc) in g.arcs.iter().enumerate() {
        prop_assert!(aug.pushed[a] >= 0.0 && aug.pushed[a] <= arc.capacity + 1e-12);
    }
    for v in 2..g.vertex_count() {
        prop_assert!(aug.excess(g, VertexId(v)).abs() <= 1e-9);
    }
    prop_assert!((aug.excess(g, g.source) - aug.value).abs() <= 1e-9);
    let after = g.reachable_with(&aug.remaining(g), 1e-12);
    prop_assert!(!after[g.sink.0], "sink still reachable after augmentation");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn blocking_flow_blocks((n, arcs) in layered_arcs(false)) {
        let g = graph(n, &arcs);
        let aug = blocking_flow(&g, 1e-12);
        assert_blocking(&g, &aug)?;
    }

    #[test]
    fn disjoint_paths_block_unit_graphs((n, arcs) in layered_arcs(true)) {
        let g = graph(n, &arcs);
        let aug = maximal_disjoint_paths(&g);
        assert_blocking(&g, &aug)?;
        for p in &aug.paths {
            prop_assert_eq!(p.amount, 1.0);
        }
        prop_assert!(aug.pushed.iter().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn augmenting_paths_start_at_source((n, arcs) in layered_arcs(false)) {
        let g = graph(n, &arcs);
        let aug = blocking_flow(&g, 1e-12);
        for p in &aug.paths {
            prop_assert_eq!(g.arcs[p.arcs[0]].from, g.source);
            prop_assert_eq!(g.arcs[*p.arcs.last().unwrap()].to, g.sink);
            for w in p.arcs.windows(2) {
                prop_assert_eq!(g.arcs[w[0]].to, g.arcs[w[1]].from);
            }
        }
        let total: f64 = aug.paths.iter().map(|p| p.amount).sum();
        prop_assert!((total - aug.value).abs() <= 1e-9);
    }

    #[test]
    fn expansion_brackets_gradient(
        start in 2.0f64..64.0,
        drop in 0.0f64..1.0,
        cap in 1u32..8,
        unit_log in 0i32..4,
    ) {
        let c = f64::from(cap);
        let end = 1.0 + drop * (start - 1.0);
        let b = (start - end) / (2.0 * c);
        let text = format!("net 2 1\ne s t {c} quad {start} {b}\n");
        let net = parse_network(&text).unwrap();
        let unit = 0.5f64.powi(unit_log);
        let x = expand_multiedges(&net, unit).unwrap();
        let total: f64 = x.parallels[0].iter().map(|p| p.capacity).sum();
        prop_assert!((total - c).abs() <= 1e-9);
        let wf = &net.edges()[0].weight;
        for i in 0..50 {
            let at = c * (f64::from(i) + 0.5) / 50.0;
            let step = x.step_gradient(EdgeId(0), at);
            let true_gradient = wf.gradient(at).unwrap();
            prop_assert!(step <= true_gradient + 1e-6, "{} > {}", step, true_gradient);
            prop_assert!(step >= true_gradient - unit - 1e-6);
        }
        let weights: Vec<f64> = x.parallels[0].iter().map(|p| p.weight).collect();
        prop_assert!(weights.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn identity_holds(seed in any::<u64>()) {
        let net = random_linear(seed, &InstanceParams::signed());
        let (w_min, w_max) = net.gradient_band();
        let grid = Grid::scaling(w_min, w_max, 1.0 / 32.0).unwrap();
        let mut r = rng(seed);
        let flow = random_conserving_flow(&mut r, &net);
        let p = random_grid_potentials(&mut r, &net, &grid);
        let (plain, reduced) = reduced_cost_identity(&net, &grid, &flow, &p).unwrap();
        prop_assert_eq!(plain, reduced);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_runs_are_feasible_and_audited(seed in any::<u64>()) {
        let net = random_linear(seed, &InstanceParams::signed());
        let r = scaling_flow(&net, 1.0 / 16.0).unwrap();
        prop_assert!(r.audit.is_clean(), "{:?}", r.audit.first_violation());
        let tol = net.flow_tolerance();
        for e in net.edge_ids() {
            let x = r.flow[e.0];
            prop_assert!(x >= -tol && x <= net.edge(e).capacity + tol);
        }
        prop_assert!(r.state.potential(net.source()).units() == 0);
    }

    #[test]
    fn simple_runs_are_integral(seed in any::<u64>()) {
        let net = random_linear(seed, &InstanceParams::unit());
        let r = simple_flow(&net, 1.0 / 8.0).unwrap();
        prop_assert!(r.audit.is_clean());
        prop_assert!(r.flow.iter().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>()) {
        let net = random_quadratic(seed, &InstanceParams::default());
        let opts = SolveOptions::default();
        let a = solve(&net, Algorithm::Concave, 1.0 / 16.0, &opts, &mut NoTrace).unwrap();
        let b = solve(&net, Algorithm::Concave, 1.0 / 16.0, &opts, &mut NoTrace).unwrap();
        prop_assert_eq!(a.flow, b.flow);
        prop_assert_eq!(a.potentials, b.potentials);
        prop_assert_eq!(a.scale_iterations, b.scale_iterations);
    }

    #[test]
    fn text_format_roundtrips(seed in any::<u64>()) {
        let net = random_linear(seed, &InstanceParams::signed());
        let text = serialize_network(&net).unwrap();
        let again = parse_network(&text).unwrap();
        prop_assert_eq!(serialize_network(&again).unwrap(), text);
        prop_assert_eq!(again.edge_count(), net.edge_count());
        for (a, b) in net.edges().iter().zip(again.edges()) {
            prop_assert_eq!(a.capacity, b.capacity);
            prop_assert_eq!(a.weight.linear_weight(), b.weight.linear_weight());
        }
    }
}
