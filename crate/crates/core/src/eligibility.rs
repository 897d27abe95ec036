//! Flow/potential state, reduced weights, and the eligible graph.
//!
//! Three rule sets decide which residual arcs may carry flow:
//!
//! * `Simple` (unit capacities): forward iff `x_e = 0` and `w^p_e = δ`,
//!   backward iff `x_e = 1` and `w^p_e = 0`.
//! * `Scaling`: forward iff `x_e < c_e` and `w^p_e ≥ δ_i`, backward iff
//!   `x_e > 0` and `w^p_e ≤ 0`.
//! * `Concave`: the forward capacity is how far `x_e` can rise while the
//!   reduced gradient stays `≥ δ_i`; the backward capacity is how far it can
//!   fall while the reduced gradient stays `≤ 0`.

use std::collections::VecDeque;

use crate::grid::{Grid, GridScalar};
use crate::network::{EdgeId, Network, VertexId};
use crate::weights::WeightFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleSet {
    Simple,
    Scaling,
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

/// Primal flow, dual potentials and scale bookkeeping.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub rules: RuleSet,
    pub grid: Grid,
    pub flow: Vec<f64>,
    pub potential: Vec<GridScalar>,
    /// Current scale index `i`.
    pub scale: u32,
    /// `scale(e)`: last scale with a forward push on `e`.
    pub last_forward: Vec<Option<u32>>,
}

impl FlowState {
    /// `x = 0`, `p_u = w_max·l_u`, scale 0.
    pub fn initial(net: &Network, grid: Grid, rules: RuleSet) -> FlowState {
        let w_max = grid.w_max_units();
        FlowState {
            rules,
            grid,
            flow: vec![0.0; net.edge_count()],
            potential: net
                .vertices()
                .map(|v| w_max * net.level(v) as i64)
                .collect(),
            scale: 0,
            last_forward: vec![None; net.edge_count()],
        }
    }

    pub fn delta(&self) -> GridScalar {
        self.grid.delta(self.scale)
    }

    pub fn potential(&self, v: VertexId) -> GridScalar {
        self.potential[v.0]
    }

    /// `p_u − p_v` for `e = uv`.
    pub fn potential_gap(&self, net: &Network, e: EdgeId) -> GridScalar {
        let edge = net.edge(e);
        self.potential[edge.tail.0] - self.potential[edge.head.0]
    }

    /// Grid reduced weight of a linear edge: `⌊w_e⌋ + p_u − p_v`.
    pub fn reduced_units(&self, net: &Network, e: EdgeId) -> GridScalar {
        let w = net
            .edge(e)
            .weight
            .linear_weight()
            .expect("grid reduced weight needs a linear edge");
        self.grid.floor(w) + self.potential_gap(net, e)
    }

    /// Reduced right-gradient `w_e(x_e) + p_u − p_v` in weight units.
    pub fn reduced_gradient(&self, net: &Network, e: EdgeId) -> f64 {
        let gap = self.grid.to_weight(self.potential_gap(net, e));
        reduced_gradient(&net.edge(e).weight, self.flow[e.0], gap, 0.0)
    }

    /// `δ_{scale(e)}`, falling back to the current step for untouched edges.
    pub fn edge_delta(&self, e: EdgeId) -> GridScalar {
        self.grid.delta(self.last_forward[e.0].unwrap_or(self.scale))
    }
}

/// `w_e(x) + p_u − p_v` with the right-gradient convention.
pub fn reduced_gradient(wf: &WeightFunction, x: f64, p_tail: f64, p_head: f64) -> f64 {
    wf.right_gradient(x.clamp(0.0, wf.domain())) + p_tail - p_head
}

#[derive(Debug, Clone, PartialEq)]
pub struct EligibleArc {
    pub edge: EdgeId,
    pub direction: Direction,
    pub from: VertexId,
    pub to: VertexId,
    pub capacity: f64,
}

/// Eligible residual arcs with positive admissible capacity.
#[derive(Debug, Clone)]
pub struct EligibleGraph {
    pub arcs: Vec<EligibleArc>,
    /// Per vertex: forward arcs in edge order, then backward arcs in
    /// reverse edge order.
    pub adjacency: Vec<Vec<usize>>,
    pub reachable: Vec<bool>,
    pub source: VertexId,
    pub sink: VertexId,
}

impl EligibleGraph {
    pub fn reaches_sink(&self) -> bool {
        self.reachable[self.sink.0]
    }

    pub fn is_reachable(&self, v: VertexId) -> bool {
        self.reachable[v.0]
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Search from `s` over arcs whose remaining capacity exceeds `tol`.
    pub fn reachable_with(&self, remaining: &[f64], tol: f64) -> Vec<bool> {
        let mut seen = vec![false; self.adjacency.len()];
        seen[self.source.0] = true;
        let mut queue = VecDeque::from([self.source.0]);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adjacency[v] {
                let w = self.arcs[a].to.0;
                if remaining[a] > tol && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// Builds the eligible graph for the state's rule set.
pub fn build_eligible_graph(net: &Network, state: &FlowState) -> EligibleGraph {
    let tol = net.flow_tolerance();
    let delta = state.delta();
    let mut forward: Vec<Option<f64>> = vec![None; net.edge_count()];
    let mut backward: Vec<Option<f64>> = vec![None; net.edge_count()];
    for e in net.edge_ids() {
        let edge = net.edge(e);
        let x = state.flow[e.0];
        let c = edge.capacity;
        let (fwd, bwd) = match state.rules {
            RuleSet::Simple => {
                let rw = state.reduced_units(net, e);
                let f = (x <= tol && rw == delta).then_some(c - x);
                let b = (x >= c - tol && rw == GridScalar::ZERO).then_some(x);
                (f, b)
            }
            RuleSet::Scaling => {
                let rw = state.reduced_units(net, e);
                let f = (c - x > tol && rw >= delta).then_some(c - x);
                let b = (x > tol && rw <= GridScalar::ZERO).then_some(x);
                (f, b)
            }
            RuleSet::Concave => {
                let gap = state.grid.to_weight(state.potential_gap(net, e));
                let up = edge
                    .weight
                    .forward_headroom(x, c, state.grid.to_weight(delta) - gap);
                let down = edge.weight.backward_headroom(x, -gap);
                (Some(up), Some(down))
            }
        };
        forward[e.0] = fwd.filter(|&cap| cap > tol);
        backward[e.0] = bwd.filter(|&cap| cap > tol);
    }

    let n = net.vertex_count();
    let mut arcs = Vec::new();
    let mut adjacency = vec![Vec::new(); n];
    for v in net.vertices() {
        for &e in net.out_edges(v) {
            if let Some(cap) = forward[e.0] {
                adjacency[v.0].push(arcs.len());
                arcs.push(EligibleArc {
                    edge: e,
                    direction: Direction::Forward,
                    from: v,
                    to: net.edge(e).head,
                    capacity: cap,
                });
            }
        }
        for &e in net.in_edges(v).iter().rev() {
            if let Some(cap) = backward[e.0] {
                adjacency[v.0].push(arcs.len());
                arcs.push(EligibleArc {
                    edge: e,
                    direction: Direction::Backward,
                    from: v,
                    to: net.edge(e).tail,
                    capacity: cap,
                });
            }
        }
    }
    let mut graph = EligibleGraph {
        arcs,
        adjacency,
        reachable: Vec::new(),
        source: net.source(),
        sink: net.sink(),
    };
    let caps: Vec<f64> = graph.arcs.iter().map(|a| a.capacity).collect();
    graph.reachable = graph.reachable_with(&caps, 0.0);
    graph
}
