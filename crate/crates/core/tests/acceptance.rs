//! Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Duration;

use cflow::grid::Grid;
use cflow::instances::{
    random_conserving_flow, random_grid_potentials, random_linear, random_pwl_grid,
    random_quadratic, rng, InstanceParams,
};
use cflow::network::{pad_gradients, Network};
use cflow::reductions::{mincost_with_reward, Entity};
use cflow::solver::{concave_flow, scaling_flow, simple_flow, SolveResult};
use cflow::verify::{
    brute_force_opt, certify_with, exact_linear_opt, expand_multiedges, reduced_cost_identity,
    Check, OracleCaps, ReferenceKind, Status,
};

/// Relative slack on every `≥` comparison against an oracle value.
const REL_SLACK: f64 = 1e-9;
/// Wall-clock budget per solve.
const TIME_LIMIT: Duration = Duration::from_secs(1);
/// Expected median of `objective / optimum` on linear instances.
const MEDIAN_RATIO: f64 = 0.99;
const LINEAR_EPS: [f64; 2] = [1.0 / 16.0, 1.0 / 32.0];
const LINEAR_SEEDS: u64 = 200;
const UNIT_SEEDS: u64 = 200;
const UNIT_EPS: f64 = 1.0 / 16.0;
const PWL_SEEDS: u64 = 50;
const QUAD_SEEDS: u64 = 100;
const SIGNED_SEEDS: u64 = 100;
const MINCOST_SEEDS: u64 = 50;
const PADDING_SEEDS: u64 = 50;
const IDENTITY_PAIRS: u64 = 100;
const TINY_SEEDS: u64 = 600;
const BRUTE_FORCE_LIMIT: u64 = 50_000_000;
/// The below-step expansion of a quadratic instance has up to
/// `m·w_max/(ε·w_min)` parallel edges, beyond the default oracle cap.
const EXPANSION_ORACLE_CAPS: OracleCaps = OracleCaps {
    max_edges: 1_000_000,
    max_total_capacity: 100_000.0,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    match failures.first() {
        None => Outcome {
            pass: true,
            detail: summary,
        },
        Some(first) => Outcome {
            pass: false,
            detail: format!("{summary}; {} failures, first: {first}", failures.len()),
        },
    }
}

fn at_least(value: f64, threshold: f64, scale: f64) -> bool {
    value >= threshold - REL_SLACK * scale.abs().max(1.0)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn ratio(value: f64, opt: f64) -> f64 {
    if opt == 0.0 {
        if value >= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        value / opt
    }
}

fn audit_failure(tag: &str, r: &SolveResult) -> Option<String> {
    r.audit
        .first_violation()
        .map(|v| format!("{tag}: {:?} violated ({} total)", v.check, r.audit.violations()))
}

struct LinearRun {
    seed: u64,
    eps: f64,
    net: Network,
    result: SolveResult,
}

fn linear_runs() -> Vec<LinearRun> {
    let mut runs = Vec::new();
    for &eps in &LINEAR_EPS {
        for seed in 0..LINEAR_SEEDS {
            let net = random_linear(seed, &InstanceParams::default());
            let result = scaling_flow(&net, eps).expect("scaling run");
            runs.push(LinearRun {
                seed,
                eps,
                net,
                result,
            });
        }
    }
    runs
}

fn unit_runs() -> Vec<(u64, Network, SolveResult)> {
    (0..UNIT_SEEDS)
        .map(|seed| {
            let net = random_linear(1000 + seed, &InstanceParams::unit());
            let result = simple_flow(&net, UNIT_EPS).expect("simple run");
            (seed, net, result)
        })
        .collect()
}

fn criterion_1(runs: &[LinearRun]) -> Outcome {
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    let mut slowest = Duration::ZERO;
    for run in runs {
        let opt = exact_linear_opt(&run.net).expect("oracle").value;
        let threshold = (1.0 - 8.0 * run.eps) * opt;
        if !at_least(run.result.objective, threshold, opt) {
            failures.push(format!(
                "seed {} eps {}: objective {} < {}",
                run.seed, run.eps, run.result.objective, threshold
            ));
        }
        if run.result.elapsed > TIME_LIMIT {
            failures.push(format!(
                "seed {} eps {}: took {:?}",
                run.seed, run.eps, run.result.elapsed
            ));
        }
        slowest = slowest.max(run.result.elapsed);
        ratios.push(ratio(run.result.objective, opt));
    }
    let med = median(ratios.clone());
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if med < MEDIAN_RATIO {
        failures.push(format!("median ratio {med} < {MEDIAN_RATIO}"));
    }
    outcome(
        &failures,
        format!(
            "{} runs, min ratio {min:.4}, median ratio {med:.4}, slowest {slowest:?}",
            runs.len()
        ),
    )
}

fn criterion_2(runs: &[(u64, Network, SolveResult)]) -> Outcome {
    let mut failures = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for (seed, net, r) in runs {
        let opt = exact_linear_opt(net).expect("oracle").value;
        let threshold = (1.0 - UNIT_EPS) * opt;
        if !at_least(r.objective, threshold, opt) {
            failures.push(format!("seed {seed}: objective {} < {threshold}", r.objective));
        }
        min_ratio = min_ratio.min(ratio(r.objective, opt));
    }
    outcome(
        &failures,
        format!("{} unit-capacity runs, min ratio {min_ratio:.4}", runs.len()),
    )
}

fn criterion_3(linear: &[LinearRun], unit: &[(u64, Network, SolveResult)]) -> Outcome {
    let checks = [
        Check::A1,
        Check::A2,
        Check::B1,
        Check::B2,
        Check::Conservation,
        Check::Capacity,
        Check::SourcePotential,
        Check::GridMembership,
    ];
    let mut failures = Vec::new();
    let mut evaluated = 0u64;
    let results = linear
        .iter()
        .map(|r| (format!("scaling seed {} eps {}", r.seed, r.eps), &r.result))
        .chain(unit.iter().map(|(s, _, r)| (format!("simple seed {s}"), r)));
    for (tag, r) in results {
        for &c in &checks {
            let count = r.audit.count(c);
            evaluated += count.passed + count.failed;
        }
        if let Some(f) = audit_failure(&tag, r) {
            failures.push(f);
        }
    }
    if evaluated == 0 {
        failures.push("no invariant was evaluated".to_string());
    }
    outcome(
        &failures,
        format!(
            "{} audited runs, {evaluated} invariant evaluations",
            linear.len() + unit.len()
        ),
    )
}

fn criterion_4(runs: &[LinearRun]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst_excess: i64 = i64::MIN;
    let mut final_scale_over = 0;
    let mut other_scales_over = 0;
    for run in runs {
        let grid = &run.result.grid;
        let (w_min, w_max) = run.net.gradient_band();
        let log_ratio = (w_max / w_min).log2().ceil() as usize;
        let rescales = run.result.scale_iterations.len() - 1;
        if rescales != log_ratio {
            failures.push(format!(
                "seed {}: {rescales} scale changes, log2 ratio {log_ratio}",
                run.seed
            ));
        }
        let depth = run.net.depth() as f64;
        let budget = depth / (2.0 * grid.eps()) + 2.0 * depth + 1.0;
        let last = run.result.scale_iterations.len() - 1;
        for (scale, &n) in run.result.scale_iterations.iter().enumerate() {
            let excess = n as i64 - budget as i64;
            worst_excess = worst_excess.max(excess);
            if n as f64 > budget {
                if scale == last {
                    final_scale_over += 1;
                } else {
                    other_scales_over += 1;
                }
                failures.push(format!(
                    "seed {} eps {} scale {scale}/{last}: {n} iterations > budget {budget}",
                    run.seed, run.eps
                ));
            }
        }
    }
    outcome(
        &failures,
        format!(
            "{} runs, worst iterations over budget {worst_excess}, over budget on final scale {final_scale_over}, on other scales {other_scales_over}",
            runs.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let eps = 1.0 / 16.0;
    let mut failures = Vec::new();
    let mut worst_obj = 0.0f64;
    let mut worst_edge = 0.0f64;
    for seed in 0..PWL_SEEDS {
        let net = random_pwl_grid(2000 + seed, &InstanceParams::default());
        let concave = concave_flow(&net, eps).expect("concave run");
        let expanded = expand_multiedges(&net, concave.grid.unit()).expect("expansion");
        let linear = scaling_flow(&expanded.network, eps).expect("scaling run on expansion");
        let tol = net.flow_tolerance();
        let obj_gap = (concave.objective - linear.objective).abs();
        let obj_tol = tol * net.edge_count() as f64 * concave.grid.w_max();
        worst_obj = worst_obj.max(obj_gap);
        if obj_gap > obj_tol {
            failures.push(format!(
                "seed {seed}: objectives {} vs {}",
                concave.objective, linear.objective
            ));
        }
        let totals = expanded.collapse(&linear.flow);
        for (e, (&a, &b)) in concave.flow.iter().zip(&totals).enumerate() {
            worst_edge = worst_edge.max((a - b).abs());
            if (a - b).abs() > tol {
                failures.push(format!("seed {seed} edge {e}: flow {a} vs {b}"));
            }
        }
    }
    outcome(
        &failures,
        format!(
            "{PWL_SEEDS} instances, max objective gap {worst_obj:e}, max edge gap {worst_edge:e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut count = 0;
    for &eps in &LINEAR_EPS {
        for seed in 0..QUAD_SEEDS {
            let net = random_quadratic(3000 + seed, &InstanceParams::default());
            let r = match concave_flow(&net, eps) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("seed {seed}: {e}"));
                    continue;
                }
            };
            let cert = certify_with(&r, &net, eps, &EXPANSION_ORACLE_CAPS);
            count += 1;
            if cert.reference_kind != ReferenceKind::ExpansionLowerBound {
                failures.push(format!("seed {seed}: unexpected reference kind"));
            }
            match (&cert.status, cert.reference) {
                (Status::Pass, Some(lb)) => min_ratio = min_ratio.min(ratio(r.objective, lb)),
                (status, _) => failures.push(format!("seed {seed} eps {eps}: {status:?}")),
            }
            if let Some(f) = audit_failure(&format!("seed {seed}"), &r) {
                failures.push(f);
            }
        }
    }
    outcome(
        &failures,
        format!("{count} quadratic runs, min ratio to expansion optimum {min_ratio:.4}"),
    )
}

fn criterion_7() -> Outcome {
    let eps = 1.0 / 16.0;
    let mut failures = Vec::new();
    for seed in 0..SIGNED_SEEDS {
        let net = random_linear(4000 + seed, &InstanceParams::signed());
        let r = scaling_flow(&net, eps).expect("signed run");
        let opt = exact_linear_opt(&net).expect("oracle");
        let (mut pos, mut neg) = (0.0, 0.0);
        for e in net.edge_ids() {
            let w = net.edge(e).weight.linear_weight().unwrap();
            if w > 0.0 {
                pos += w * opt.flow[e.0];
            } else {
                neg += w * opt.flow[e.0];
            }
        }
        let threshold = (1.0 - 8.0 * eps) * pos + (1.0 + 8.0 * eps) * neg;
        if !at_least(r.objective, threshold, pos - neg) {
            failures.push(format!("signed seed {seed}: {} < {threshold}", r.objective));
        }
    }

    // Additive bound for the min-cost reduction. The scaling run
    // is a (1 − 8ε) approximation, so the bound is applied with 8ε.
    let mut worst_margin = f64::INFINITY;
    for seed in 0..MINCOST_SEEDS {
        let costs = random_linear(5000 + seed, &InstanceParams::default());
        let mut pick = rng(5000 + seed);
        let reward = {
            use rand::Rng;
            pick.gen_range(1..=64 * costs.depth()) as f64
        };
        let map = mincost_with_reward(&costs, reward).expect("reduction");
        let r = scaling_flow(&map.network, eps).expect("mincost run");
        let opt = exact_linear_opt(&map.network).expect("oracle");
        let reward_edge = map.edge_of(Entity::Reward).expect("reward edge");
        let f_star = opt.flow[reward_edge.0];
        let cost = map.objective(&r.flow);
        let cost_star = map.objective(&opt.flow);
        let e = 8.0 * eps;
        let bound = (1.0 + e) * cost_star + 2.0 * e * reward * f_star;
        worst_margin = worst_margin.min(bound - cost);
        if cost > bound + REL_SLACK * (reward * f_star).max(1.0) {
            failures.push(format!("mincost seed {seed}: cost {cost} > {bound}"));
        }
    }
    outcome(
        &failures,
        format!(
            "{SIGNED_SEEDS} signed runs, {MINCOST_SEEDS} min-cost runs, smallest additive margin {worst_margin:.4}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let eps = 1.0 / 16.0;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..PADDING_SEEDS {
        let net = if seed % 2 == 0 {
            random_linear(6000 + seed, &InstanceParams::default())
        } else {
            random_pwl_grid(6000 + seed, &InstanceParams::default())
        };
        let (padded, report) = pad_gradients(&net, eps).expect("padding");
        let opt = exact_linear_opt(&net).expect("oracle").value;
        let padded_opt = exact_linear_opt(&padded).expect("padded oracle").value;
        let slack = REL_SLACK * opt.abs().max(1.0);
        if padded_opt < opt - slack || padded_opt > (1.0 + eps) * opt + slack {
            failures.push(format!("seed {seed}: padded {padded_opt} vs {opt}"));
        }
        worst = worst.max(padded_opt / opt - 1.0);
        if report.ratio() > report.ratio_bound {
            failures.push(format!(
                "seed {seed}: ratio {} > bound {}",
                report.ratio(),
                report.ratio_bound
            ));
        }
    }
    outcome(
        &failures,
        format!("{PADDING_SEEDS} instances, largest relative increase {worst:e}"),
    )
}

fn criterion_9() -> Outcome {
    let classes: [(&str, InstanceParams); 3] = [
        ("linear", InstanceParams::default()),
        ("unit", InstanceParams::unit()),
        ("signed", InstanceParams::signed()),
    ];
    let mut failures = Vec::new();
    for (name, params) in classes {
        for i in 0..IDENTITY_PAIRS {
            let net = random_linear(7000 + i, &params);
            let (w_min, w_max) = net.gradient_band();
            let grid = Grid::scaling(w_min, w_max, 1.0 / 16.0).expect("grid");
            let mut r = rng(7000 + i);
            let flow = random_conserving_flow(&mut r, &net);
            let potentials = random_grid_potentials(&mut r, &net, &grid);
            let (plain, reduced) =
                reduced_cost_identity(&net, &grid, &flow, &potentials).expect("identity inputs");
            if plain != reduced {
                failures.push(format!("{name} pair {i}: {plain} != {reduced}"));
            }
        }
    }
    outcome(
        &failures,
        format!("{} flow/potential pairs", 3 * IDENTITY_PAIRS),
    )
}

fn criterion_10() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 0..TINY_SEEDS {
        let mut params = InstanceParams::tiny();
        if seed % 3 == 2 {
            params.negative_fraction = 0.3;
        }
        let net = random_linear(8000 + seed, &params);
        if net.edge_count() > 8 || net.total_capacity() > 8.0 {
            continue;
        }
        let oracle = exact_linear_opt(&net).expect("oracle");
        let Some(brute) = brute_force_opt(&net, BRUTE_FORCE_LIMIT) else {
            failures.push(format!("seed {seed}: enumeration refused"));
            continue;
        };
        checked += 1;
        if oracle.value != brute.value {
            failures.push(format!("seed {seed}: oracle {} vs brute {}", oracle.value, brute.value));
        }
    }
    if checked < 500 {
        failures.push(format!("only {checked} instances within m ≤ 8, Σc ≤ 8"));
    }
    outcome(&failures, format!("{checked} exhaustive comparisons"))
}

fn main() -> ExitCode {
    let linear = linear_runs();
    let unit = unit_runs();
    let criteria: Vec<(u32, &str, Outcome)> = vec![
        (1, "scaling (1 - 8eps) approximation", criterion_1(&linear)),
        (2, "simple variant (1 - eps) approximation", criterion_2(&unit)),
        (3, "invariant audits", criterion_3(&linear, &unit)),
        (4, "iteration budget per scale", criterion_4(&linear)),
        (5, "concave equals scaling on the expansion", criterion_5()),
        (6, "concave (1 - 9eps) guarantee", criterion_6()),
        (7, "negative weights and min-cost bound", criterion_7()),
        (8, "gradient padding", criterion_8()),
        (9, "reduced-cost identity", criterion_9()),
        (10, "oracle against brute force", criterion_10()),
    ];
    let mut failed = 0;
    for (n, name, o) in &criteria {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}: {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
