//! Seeded random instances.
//!
//! Every generator is a pure function of its seed, so a failing case can be
//! replayed from the seed alone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, GridScalar};
use crate::network::{Network, NetworkBuilder, VertexId};
use crate::weights::{PiecewiseLinear, WeightFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceParams {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_depth: u32,
    /// Inclusive range of integer weight magnitudes.
    pub weights: (u32, u32),
    pub max_capacity: u32,
    /// Cap on the sum of capacities; every edge still gets at least 1.
    pub max_total_capacity: u32,
    pub unit_capacities: bool,
    /// Probability that a weight is negated (signed networks only).
    pub negative_fraction: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            max_vertices: 40,
            max_edges: 120,
            max_depth: 8,
            weights: (1, 64),
            max_capacity: 8,
            max_total_capacity: u32::MAX,
            unit_capacities: false,
            negative_fraction: 0.0,
        }
    }
}

impl InstanceParams {
    pub fn unit() -> Self {
        InstanceParams {
            unit_capacities: true,
            ..Self::default()
        }
    }

    pub fn signed() -> Self {
        InstanceParams {
            negative_fraction: 0.3,
            ..Self::default()
        }
    }

    /// At most 8 edges and total capacity at most 8.
    pub fn tiny() -> Self {
        InstanceParams {
            max_vertices: 5,
            max_edges: 8,
            max_depth: 3,
            weights: (1, 16),
            max_capacity: 3,
            max_total_capacity: 8,
            unit_capacities: false,
            negative_fraction: 0.0,
        }
    }
}

/// Layered DAG topology: `(tail, head)` pairs over vertex names.
struct Topology {
    names: Vec<String>,
    edges: Vec<(usize, usize)>,
}

/// Vertex 0 is `s`, vertex 1 is `t`. A chain through every layer fixes the
/// depth; each extra vertex gets an entry and an exit edge so nothing is
/// pruned.
fn topology(rng: &mut ChaCha8Rng, p: &InstanceParams) -> Topology {
    let depth = rng.gen_range(1..=p.max_depth.max(1)) as usize;
    let max_internal = p.max_vertices.saturating_sub(2);
    let internal = if depth == 1 || max_internal < depth - 1 {
        if depth == 1 {
            rng.gen_range(0..=max_internal.min(3))
        } else {
            max_internal
        }
    } else {
        rng.gen_range(depth - 1..=max_internal)
    };
    let depth = if depth > 1 && internal < depth - 1 {
        internal + 1
    } else {
        depth
    };
    let mut names = vec!["s".to_string(), "t".to_string()];
    let mut layer = vec![0usize, depth];
    for i in 0..internal {
        names.push(format!("v{i}"));
        layer.push(if depth == 1 {
            // Single-layer networks get side vertices on a virtual middle.
            0
        } else if i < depth - 1 {
            i + 1
        } else {
            rng.gen_range(1..depth)
        });
    }
    let n = names.len();
    let mut edges = Vec::new();
    if depth == 1 {
        edges.push((0, 1));
        // Extra vertices hang between s and t.
        for v in 2..n {
            edges.push((0, v));
            edges.push((v, 1));
        }
    } else {
        let mut prev = 0;
        for v in 2..(2 + depth - 1) {
            edges.push((prev, v));
            prev = v;
        }
        edges.push((prev, 1));
        for v in (2 + depth - 1)..n {
            let below: Vec<usize> = (0..n).filter(|&u| layer[u] < layer[v]).collect();
            let above: Vec<usize> = (0..n).filter(|&u| layer[u] > layer[v]).collect();
            edges.push((*below.choose(rng).unwrap(), v));
            edges.push((v, *above.choose(rng).unwrap()));
        }
    }
    let layer_of = |v: usize| if depth == 1 && v >= 2 { 0 } else { layer[v] };
    let target = rng.gen_range(edges.len().min(p.max_edges)..=p.max_edges.max(edges.len()));
    let mut guard = 0;
    while edges.len() < target && guard < 10 * p.max_edges {
        guard += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let ok = if depth == 1 {
            (u == 0 && v != 0) || (v == 1 && u != 1)
        } else {
            layer_of(u) < layer_of(v)
        };
        if ok && u != v {
            edges.push((u, v));
        }
    }
    edges.truncate(p.max_edges.max(1));
    Topology { names, edges }
}

fn capacity(rng: &mut ChaCha8Rng, p: &InstanceParams) -> f64 {
    if p.unit_capacities {
        1.0
    } else {
        rng.gen_range(1..=p.max_capacity.max(1)) as f64
    }
}

/// Capacities for `m` edges within the total budget.
fn capacities(rng: &mut ChaCha8Rng, p: &InstanceParams, m: usize) -> Vec<f64> {
    let mut left = p.max_total_capacity as u64;
    (0..m)
        .map(|i| {
            let c = capacity(rng, p) as u64;
            let reserve = (m - i - 1) as u64;
            let c = c.min(left.saturating_sub(reserve)).max(1);
            left = left.saturating_sub(c);
            c as f64
        })
        .collect()
}

fn weight(rng: &mut ChaCha8Rng, p: &InstanceParams) -> f64 {
    let w = rng.gen_range(p.weights.0..=p.weights.1) as f64;
    if p.negative_fraction > 0.0 && rng.gen_bool(p.negative_fraction) {
        -w
    } else {
        w
    }
}

fn assemble(
    topo: &Topology,
    signed: bool,
    mut edge: impl FnMut(usize) -> (f64, WeightFunction),
) -> Network {
    let mut b = NetworkBuilder::new().signed(signed);
    for name in &topo.names {
        b.vertex(name);
    }
    for (i, &(u, v)) in topo.edges.iter().enumerate() {
        let (cap, wf) = edge(i);
        b.edge(&topo.names[u], &topo.names[v], cap, wf);
    }
    b.build().expect("generated topology is a valid DAG")
}

/// Linear weights, integer magnitudes, integer capacities.
pub fn random_linear(seed: u64, p: &InstanceParams) -> Network {
    let mut rng = rng(seed);
    let topo = topology(&mut rng, p);
    let signed = p.negative_fraction > 0.0;
    let caps = capacities(&mut rng, p, topo.edges.len());
    let specs: Vec<(f64, f64)> = caps
        .into_iter()
        .map(|c| (c, weight(&mut rng, p)))
        .collect();
    assemble(&topo, signed, |i| {
        let (c, w) = specs[i];
        (c, WeightFunction::linear(w, c))
    })
}

/// Piecewise-linear edges with integer breakpoints and integer gradients
/// in `[1, 64]`, declared band `[1, 64]`. With `ε` a power of two the
/// gradients lie on every scaling grid.
pub fn random_pwl_grid(seed: u64, p: &InstanceParams) -> Network {
    let mut rng = rng(seed);
    let topo = topology(&mut rng, p);
    let (lo, hi) = (p.weights.0.max(1), p.weights.1.max(p.weights.0.max(1)));
    let specs: Vec<(f64, WeightFunction)> = topo
        .edges
        .iter()
        .map(|_| {
            let c = rng.gen_range(1..=p.max_capacity.max(1));
            let pieces = rng.gen_range(1..=c.min(4)) as usize;
            let mut cuts: Vec<u32> = (1..c).collect();
            cuts.shuffle(&mut rng);
            let mut bps: Vec<u32> = cuts.into_iter().take(pieces - 1).collect();
            bps.push(c);
            bps.sort_unstable();
            let mut grads: Vec<u32> = Vec::new();
            while grads.len() < pieces {
                let g = rng.gen_range(lo..=hi);
                if !grads.contains(&g) {
                    grads.push(g);
                }
                if (hi - lo + 1) < pieces as u32 {
                    break;
                }
            }
            grads.sort_unstable_by(|a, b| b.cmp(a));
            let bps: Vec<f64> = bps.into_iter().take(grads.len()).map(f64::from).collect();
            let mut bps = bps;
            *bps.last_mut().unwrap() = c as f64;
            let pwl = PiecewiseLinear::new(bps, grads.into_iter().map(f64::from).collect())
                .expect("strictly monotone by construction");
            (c as f64, WeightFunction::piecewise_linear(pwl))
        })
        .collect();
    let mut b = NetworkBuilder::new().bounds(lo as f64, hi as f64);
    for name in &topo.names {
        b.vertex(name);
    }
    for (i, &(u, v)) in topo.edges.iter().enumerate() {
        let (c, wf) = specs[i].clone();
        b.edge(&topo.names[u], &topo.names[v], c, wf);
    }
    b.build().expect("generated topology is a valid DAG")
}

/// Quadratic edges `f(x) = a·x − b·x²` with gradients inside `[1, 64]`.
pub fn random_quadratic(seed: u64, p: &InstanceParams) -> Network {
    let mut rng = rng(seed);
    let topo = topology(&mut rng, p);
    let specs: Vec<(f64, f64, f64)> = topo
        .edges
        .iter()
        .map(|_| {
            let c = capacity(&mut rng, p);
            let end = rng.gen_range(1.0..16.0);
            let start = rng.gen_range(end..64.0);
            // w(0) = a = start, w(c) = a − 2bc = end.
            let b = (start - end) / (2.0 * c);
            (c, start, b)
        })
        .collect();
    assemble(&topo, false, |i| {
        let (c, a, b) = specs[i];
        (c, WeightFunction::quadratic(a, b, c).expect("non-negative curvature"))
    })
}

/// Random integral conserving flow built from `s→t` walks; capacities are
/// not respected.
pub fn random_conserving_flow(rng: &mut ChaCha8Rng, net: &Network) -> Vec<f64> {
    let mut flow = vec![0.0; net.edge_count()];
    let walks = rng.gen_range(0..6);
    for _ in 0..walks {
        let amount = rng.gen_range(1..=4) as f64;
        let mut v = net.source();
        while v != net.sink() {
            let out = net.out_edges(v);
            let e = *out.choose(rng).expect("every kept vertex reaches t");
            flow[e.0] += amount;
            v = net.edge(e).head;
        }
    }
    flow
}

/// Random potentials on the grid's finest step with `p_s = p_t`.
pub fn random_grid_potentials(rng: &mut ChaCha8Rng, net: &Network, grid: &Grid) -> Vec<GridScalar> {
    let span = grid.w_max_units().units().max(1) * 8;
    let mut p: Vec<GridScalar> = net
        .vertices()
        .map(|_| GridScalar(rng.gen_range(-span..=span)))
        .collect();
    p[net.sink().0] = p[net.source().0];
    p
}

/// Uniformly random vertex other than the terminals, if any.
pub fn random_internal_vertex(rng: &mut ChaCha8Rng, net: &Network) -> Option<VertexId> {
    let internal: Vec<VertexId> = net
        .vertices()
        .filter(|&v| v != net.source() && v != net.sink())
        .collect();
    internal.choose(rng).copied()
}
