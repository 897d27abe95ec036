//! Exact optimum for piecewise-linear instances.
//!
//! Parallel edges between the same pair of vertices are merged into one
//! group whose segments are sorted by weight. The oracle repeatedly sends
//! flow along a maximum-weight `s→t` path of the residual graph, where a
//! group offers its best unfilled segment forward and the negation of its
//! worst filled segment backward, and stops once no path has positive
//! weight. Starting from a DAG, the residual graph never has a
//! positive-weight cycle, so Bellman-Ford finds each path exactly.

use std::collections::{BTreeMap, VecDeque};
use std::env;

use thiserror::Error;

use crate::network::{EdgeId, Network};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCaps {
    pub max_edges: usize,
    pub max_total_capacity: f64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_edges: 5_000,
            max_total_capacity: 100_000.0,
        }
    }
}

/// Environment variable holding `<max_edges>,<max_total_capacity>`.
pub const ORACLE_CAP_VAR: &str = "CFLOW_ORACLE_CAP";

impl OracleCaps {
    /// Defaults, overridden by `CFLOW_ORACLE_CAP` when it is set.
    pub fn from_env() -> Result<OracleCaps, OracleError> {
        match env::var(ORACLE_CAP_VAR) {
            Ok(text) => OracleCaps::parse(&text),
            Err(_) => Ok(OracleCaps::default()),
        }
    }

    pub fn parse(text: &str) -> Result<OracleCaps, OracleError> {
        let bad = || OracleError::BadCapSpec(text.to_string());
        let (m, c) = text.split_once(',').ok_or_else(bad)?;
        let max_edges = m.trim().parse().map_err(|_| bad())?;
        let max_total_capacity: f64 = c.trim().parse().map_err(|_| bad())?;
        if !(max_total_capacity >= 0.0) {
            return Err(bad());
        }
        Ok(OracleCaps {
            max_edges,
            max_total_capacity,
        })
    }

    pub fn admits(&self, net: &Network) -> bool {
        net.edge_count() <= self.max_edges && net.total_capacity() <= self.max_total_capacity
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("uncertified: oracle cap (m = {edges}, total capacity = {capacity})")]
    CapExceeded { edges: usize, capacity: f64 },
    #[error("edge {0}: oracle needs piecewise-linear weights")]
    NotPiecewiseLinear(usize),
    #[error("invalid {ORACLE_CAP_VAR} value `{0}`")]
    BadCapSpec(String),
    #[error("oracle did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub value: f64,
    pub flow: Vec<f64>,
}

impl OracleSolution {
    /// `(Σ_{w>0} w_e·x_e, Σ_{w<0} w_e·x_e)` using the linear weights.
    pub fn split_by_sign(&self, net: &Network) -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for e in net.edge_ids() {
            let w = net.edge(e).weight.linear_weight().unwrap_or(0.0);
            let term = w * self.flow[e.0];
            if w > 0.0 {
                pos += term;
            } else {
                neg += term;
            }
        }
        (pos, neg)
    }
}

struct Segment {
    edge: EdgeId,
    weight: f64,
    capacity: f64,
    filled: f64,
}

/// Parallel segments between one vertex pair. Flow always occupies a
/// prefix: `segments[..full]` are saturated, `segments[full]` may be
/// partial, the rest are empty.
struct Group {
    tail: usize,
    head: usize,
    segments: Vec<Segment>,
    full: usize,
}

impl Group {
    /// First segment that is not full.
    fn forward(&self) -> Option<usize> {
        (self.full < self.segments.len()).then_some(self.full)
    }

    /// Last segment carrying flow.
    fn backward(&self) -> Option<usize> {
        match self.segments.get(self.full) {
            Some(seg) if seg.filled > 0.0 => Some(self.full),
            _ => self.full.checked_sub(1),
        }
    }

    fn push(&mut self, amount: f64) {
        let k = self.full;
        let seg = &mut self.segments[k];
        if seg.capacity - seg.filled <= amount {
            seg.filled = seg.capacity;
            self.full += 1;
        } else {
            seg.filled += amount;
        }
    }

    fn pull(&mut self, amount: f64) {
        let k = self.backward().expect("pull from a group with flow");
        let seg = &mut self.segments[k];
        seg.filled = if seg.filled <= amount {
            0.0
        } else {
            seg.filled - amount
        };
        if k < self.full {
            self.full = k;
        }
    }
}

pub fn exact_linear_opt(net: &Network) -> Result<OracleSolution, OracleError> {
    exact_linear_opt_capped(net, &OracleCaps::default())
}

pub fn exact_linear_opt_capped(
    net: &Network,
    caps: &OracleCaps,
) -> Result<OracleSolution, OracleError> {
    if !caps.admits(net) {
        return Err(OracleError::CapExceeded {
            edges: net.edge_count(),
            capacity: net.total_capacity(),
        });
    }
    let mut by_pair: BTreeMap<(usize, usize), Vec<Segment>> = BTreeMap::new();
    for e in net.edge_ids() {
        let edge = net.edge(e);
        let segs = edge
            .weight
            .segments()
            .ok_or(OracleError::NotPiecewiseLinear(edge.input_index))?;
        let list = by_pair.entry((edge.tail.0, edge.head.0)).or_default();
        for (len, weight) in segs {
            if len > 0.0 {
                list.push(Segment {
                    edge: e,
                    weight,
                    capacity: len,
                    filled: 0.0,
                });
            }
        }
    }
    let mut groups: Vec<Group> = by_pair
        .into_iter()
        .map(|((tail, head), mut segments)| {
            // Stable: segments of one edge keep their (decreasing) order.
            segments.sort_by(|a, b| b.weight.total_cmp(&a.weight));
            Group {
                tail,
                head,
                segments,
                full: 0,
            }
        })
        .collect();

    let n = net.vertex_count();
    let s = net.source().0;
    let t = net.sink().0;
    let max_w = groups
        .iter()
        .flat_map(|g| g.segments.iter().map(|s| s.weight.abs()))
        .fold(0.0, f64::max);
    let eps_w = 1e-12 * max_w.max(1.0);
    let max_rounds = 4 * net.edge_count() * (net.total_capacity().ceil() as usize + 1) + 16;

    for _ in 0..max_rounds {
        // Residual arcs: (from, to, group, forward?, weight).
        let mut arcs: Vec<(usize, usize, usize, bool, f64)> = Vec::new();
        for (gi, g) in groups.iter().enumerate() {
            if let Some(k) = g.forward() {
                arcs.push((g.tail, g.head, gi, true, g.segments[k].weight));
            }
            if let Some(k) = g.backward() {
                arcs.push((g.head, g.tail, gi, false, -g.segments[k].weight));
            }
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, a) in arcs.iter().enumerate() {
            out[a.0].push(i);
        }
        // Longest path by queue-based Bellman-Ford.
        let mut dist = vec![f64::NEG_INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut in_queue = vec![false; n];
        let mut relax_count = vec![0usize; n];
        dist[s] = 0.0;
        let mut queue = VecDeque::from([s]);
        in_queue[s] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            for &i in &out[u] {
                let (_, v, _, _, w) = arcs[i];
                if dist[u] + w > dist[v] + eps_w {
                    dist[v] = dist[u] + w;
                    pred[v] = Some(i);
                    relax_count[v] += 1;
                    if relax_count[v] > n + 1 {
                        return Err(OracleError::NoConvergence);
                    }
                    if !in_queue[v] {
                        in_queue[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        if !(dist[t] > eps_w) {
            return Ok(finish(net, &groups));
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let i = pred[v].ok_or(OracleError::NoConvergence)?;
            path.push(i);
            v = arcs[i].0;
            if path.len() > n {
                return Err(OracleError::NoConvergence);
            }
        }
        let amount = path
            .iter()
            .map(|&i| {
                let (_, _, gi, fwd, _) = arcs[i];
                let g = &groups[gi];
                if fwd {
                    let seg = &g.segments[g.forward().unwrap()];
                    seg.capacity - seg.filled
                } else {
                    g.segments[g.backward().unwrap()].filled
                }
            })
            .fold(f64::INFINITY, f64::min);
        for &i in &path {
            let (_, _, gi, fwd, _) = arcs[i];
            if fwd {
                groups[gi].push(amount);
            } else {
                groups[gi].pull(amount);
            }
        }
    }
    Err(OracleError::NoConvergence)
}

fn finish(net: &Network, groups: &[Group]) -> OracleSolution {
    let mut flow = vec![0.0; net.edge_count()];
    let mut value = 0.0;
    for seg in groups.iter().flat_map(|g| &g.segments) {
        flow[seg.edge.0] += seg.filled;
        value += seg.weight * seg.filled;
    }
    OracleSolution { value, flow }
}

/// Best integral flow by enumerating every `x ∈ Π {0..c_e}`. Needs linear
/// weights and integer capacities; returns `None` otherwise or when the
/// search space exceeds `limit` assignments.
pub fn brute_force_opt(net: &Network, limit: u64) -> Option<OracleSolution> {
    let m = net.edge_count();
    let mut caps = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut space: u64 = 1;
    for e in net.edges() {
        if e.capacity.fract() != 0.0 {
            return None;
        }
        caps.push(e.capacity as u64);
        weights.push(e.weight.linear_weight()?);
        space = space.checked_mul(e.capacity as u64 + 1)?;
    }
    if space > limit {
        return None;
    }
    let internal: Vec<_> = net
        .vertices()
        .filter(|&v| v != net.source() && v != net.sink())
        .collect();
    let mut x = vec![0u64; m];
    let mut best = OracleSolution {
        value: 0.0,
        flow: vec![0.0; m],
    };
    loop {
        let conserving = internal.iter().all(|&v| {
            let inflow: u64 = net.in_edges(v).iter().map(|e| x[e.0]).sum();
            let outflow: u64 = net.out_edges(v).iter().map(|e| x[e.0]).sum();
            inflow == outflow
        });
        if conserving {
            let value: f64 = x.iter().zip(&weights).map(|(&xi, w)| xi as f64 * w).sum();
            if value > best.value {
                best = OracleSolution {
                    value,
                    flow: x.iter().map(|&xi| xi as f64).collect(),
                };
            }
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == m {
                return Some(best);
            }
            if x[i] < caps[i] {
                x[i] += 1;
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    #[test]
    fn parallel_edges() {
        let net = parse_network("net 2 2\ne s t 1 lin 8\ne s t 1 lin 2\n").unwrap();
        let sol = exact_linear_opt(&net).unwrap();
        assert_eq!(sol.value, 10.0);
        assert_eq!(brute_force_opt(&net, 1000).unwrap().value, 10.0);
    }

    #[test]
    fn negative_edge_alone() {
        let net = parse_network("net 2 1 signed\ne s t 1 lin -2\n").unwrap();
        let sol = exact_linear_opt(&net).unwrap();
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.flow, vec![0.0]);
    }

    #[test]
    fn diamond() {
        let net = parse_network(
            "net 4 4\ne s a 1 lin 1\ne a t 1 lin 1\ne s b 1 lin 1\ne b t 1 lin 1\n",
        )
        .unwrap();
        assert_eq!(exact_linear_opt(&net).unwrap().value, 4.0);
        assert_eq!(brute_force_opt(&net, 1000).unwrap().value, 4.0);
    }

    #[test]
    fn needs_backward_arcs() {
        // Greedy s→a→b→t (weight 30) must be partly undone to reach 2 paths.
        let net = parse_network(
            "net 4 5\ne s a 1 lin 10\ne a b 1 lin 10\ne b t 1 lin 10\ne s b 1 lin 9\ne a t 1 lin 9\n",
        )
        .unwrap();
        let sol = exact_linear_opt(&net).unwrap();
        assert_eq!(sol.value, brute_force_opt(&net, 10_000).unwrap().value);
        assert_eq!(sol.value, 38.0);
    }

    #[test]
    fn pwl_segments_fill_in_order() {
        let net = parse_network("net 3 2 signed\ne s a 3 pwl 2 1 5 3 -1\ne a t 3 lin 1\n").unwrap();
        let sol = exact_linear_opt(&net).unwrap();
        // First unit gains 6, further units lose.
        assert_eq!(sol.value, 6.0);
        assert_eq!(sol.flow, vec![1.0, 1.0]);
    }

    #[test]
    fn caps_and_env_spec() {
        let net = parse_network("net 2 1\ne s t 10 lin 1\n").unwrap();
        let caps = OracleCaps::parse("5, 4").unwrap();
        let err = exact_linear_opt_capped(&net, &caps).unwrap_err();
        assert!(err.to_string().starts_with("uncertified: oracle cap"));
        assert!(OracleCaps::parse("x").is_err());
    }
}
