use rand::Rng;

use cflow::instances::rng;
use cflow::reductions::{
    assignment_to_network, chained_matching_to_network, schedule_from_flow,
    scheduling_to_network, AssignmentPair, AuxWeight, Job,
};
use cflow::solver::scaling_flow;
use cflow::verify::exact_linear_opt;

const AUX: AuxWeight = AuxWeight::Auto { eps: 1.0 / 16.0 };

/// Best matching by trying every subset of pairs.
fn best_matching(nl: usize, nr: usize, pairs: &[(usize, usize, f64)]) -> f64 {
    let mut best = 0.0f64;
    for mask in 0u32..(1 << pairs.len()) {
        let mut left = vec![false; nl];
        let mut right = vec![false; nr];
        let mut value = 0.0;
        let mut ok = true;
        for (i, &(l, r, w)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ok &= !left[l] && !right[r];
                left[l] = true;
                right[r] = true;
                value += w;
            }
        }
        if ok {
            best = best.max(value);
        }
    }
    best
}

#[test]
fn assignment_matches_enumeration() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let (nl, nr) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let mut pairs = Vec::new();
        for l in 0..nl {
            for rr in 0..nr {
                if r.gen_bool(0.6) {
                    pairs.push((l, rr, r.gen_range(1..=20) as f64));
                }
            }
        }
        if pairs.is_empty() {
            pairs.push((0, 0, 1.0));
        }
        let spec: Vec<AssignmentPair> = pairs
            .iter()
            .map(|&(l, rr, w)| AssignmentPair::linear(l, rr, w))
            .collect();
        let map = assignment_to_network(&vec![1.0; nl], &vec![1.0; nr], &spec, AUX).unwrap();
        assert_eq!(map.depth(), 3);
        let opt = exact_linear_opt(&map.network).unwrap();
        let value = map.objective(&opt.flow);
        let want = best_matching(nl, nr, &pairs);
        assert!(
            (value - want).abs() <= map.aux_slack,
            "seed {seed}: {value} vs {want}"
        );
        // The network optimum is the application value plus auxiliary weight.
        assert!(opt.value >= value - 1e-9 && opt.value <= value + map.aux_slack + 1e-9);
        // A solver run maps back to a feasible matching.
        let run = scaling_flow(&map.network, 1.0 / 16.0).unwrap();
        assert!(map.objective(&run.flow) <= want + 1e-9);
    }
}

fn best_tuples(xy: &[(usize, usize, f64)], yz: &[(usize, usize, f64)]) -> f64 {
    let tuples: Vec<(usize, usize, usize, f64)> = xy
        .iter()
        .flat_map(|&(x, y, a)| {
            yz.iter()
                .filter(move |&&(y2, _, _)| y2 == y)
                .map(move |&(_, z, b)| (x, y, z, a + b))
        })
        .collect();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << tuples.len()) {
        let mut used = std::collections::HashSet::new();
        let mut value = 0.0;
        let mut ok = true;
        for (i, &(x, y, z, w)) in tuples.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ok &= used.insert((0, x)) && used.insert((1, y)) && used.insert((2, z));
                value += w;
            }
        }
        if ok {
            best = best.max(value);
        }
    }
    best
}

#[test]
fn chained_matching_matches_enumeration() {
    for seed in 0..150 {
        let mut r = rng(100 + seed);
        let n = (r.gen_range(1..=3), r.gen_range(1..=3), r.gen_range(1..=3));
        let xy: Vec<(usize, usize, f64)> = (0..r.gen_range(1..=4))
            .map(|_| (r.gen_range(0..n.0), r.gen_range(0..n.1), r.gen_range(1..=9) as f64))
            .collect();
        let yz: Vec<(usize, usize, f64)> = (0..r.gen_range(1..=4))
            .map(|_| (r.gen_range(0..n.1), r.gen_range(0..n.2), r.gen_range(1..=9) as f64))
            .collect();
        let tuples = xy
            .iter()
            .filter(|a| yz.iter().any(|b| b.0 == a.1))
            .count();
        if tuples == 0 || tuples > 12 {
            continue;
        }
        let Ok(map) = chained_matching_to_network(n, &xy, &yz, AUX) else {
            continue;
        };
        assert_eq!(map.depth(), 5);
        let opt = exact_linear_opt(&map.network).unwrap();
        let value = map.objective(&opt.flow);
        let want = best_tuples(&xy, &yz);
        assert!(
            (value - want).abs() <= map.aux_slack,
            "seed {seed}: {value} vs {want}"
        );
    }
}

fn best_schedule(jobs: &[Job], caps: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for mask in 0u32..(1 << jobs.len()) {
        let mut load = vec![0.0; caps.len()];
        let mut gain = 0.0;
        for (i, j) in jobs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for d in j.start..=j.end {
                    load[d - 1] += 1.0;
                }
                gain += j.gain;
            }
        }
        if load.iter().zip(caps).all(|(l, c)| l <= c) {
            best = best.max(gain);
        }
    }
    best
}

#[test]
fn scheduling_matches_enumeration() {
    for seed in 0..200 {
        let mut r = rng(500 + seed);
        let days = r.gen_range(1..=4);
        let caps: Vec<f64> = (0..days).map(|_| r.gen_range(1..=2) as f64).collect();
        let jobs: Vec<Job> = (0..r.gen_range(1..=6))
            .map(|_| {
                let start = r.gen_range(1..=days);
                Job {
                    start,
                    end: r.gen_range(start..=days),
                    gain: r.gen_range(1..=9) as f64,
                }
            })
            .collect();
        let map = scheduling_to_network(&jobs, &caps, AUX).unwrap();
        assert!(map.depth() as usize <= days + 3);
        let opt = exact_linear_opt(&map.network).unwrap();
        let schedule = schedule_from_flow(&map, &jobs, &caps, &opt.flow);
        let want = best_schedule(&jobs, &caps);
        assert_eq!(schedule.gain, want, "seed {seed}");
        let mut load = vec![0.0; days];
        for &j in &schedule.jobs {
            for d in jobs[j].start..=jobs[j].end {
                load[d - 1] += 1.0;
            }
        }
        assert!(load.iter().zip(&caps).all(|(l, c)| l <= c));
    }
}
