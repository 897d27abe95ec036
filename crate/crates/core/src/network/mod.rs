//! Validated small-depth networks.
//!
//! A [`Network`] is built from a [`NetworkBuilder`]: the builder collects
//! named vertices and edges, and [`NetworkBuilder::build`] checks
//! acyclicity, prunes every vertex that is not on some `s → t` path, and
//! computes longest-path levels. Networks are immutable afterwards.

mod padding;
mod text;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::weights::{WeightError, WeightFunction};

pub use padding::{pad_gradients, PaddingReport};
pub use text::{parse_network, serialize_network, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("source and sink must differ")]
    SourceIsSink,
    #[error("cycle detected: {}", format_cycle(.0))]
    Cycle(Vec<(String, String)>),
    #[error("empty network: no s-t path")]
    Empty,
    #[error("edge {tail}->{head}: capacity must be positive and finite, got {capacity}")]
    BadCapacity {
        tail: String,
        head: String,
        capacity: f64,
    },
    #[error("edge {tail}->{head}: {source}")]
    Weight {
        tail: String,
        head: String,
        source: WeightError,
    },
    #[error("edge {tail}->{head}: negative weight requires signed mode")]
    NegativeWeight { tail: String, head: String },
    #[error("edge {tail}->{head}: gradient range [{lo}, {hi}] outside declared bounds [{w_min}, {w_max}]")]
    OutsideBounds {
        tail: String,
        head: String,
        lo: f64,
        hi: f64,
        w_min: f64,
        w_max: f64,
    },
    #[error("declared bounds [{0}, {1}] are invalid")]
    InvalidBounds(f64, f64),
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
}

fn format_cycle(edges: &[(String, String)]) -> String {
    let parts: Vec<String> = edges.iter().map(|(u, v)| format!("{u}->{v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub capacity: f64,
    pub weight: WeightFunction,
    /// Position of the edge in the builder's edge list.
    pub input_index: usize,
}

/// Declared `[w_min, w_max]` gradient band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBounds {
    pub w_min: f64,
    pub w_max: f64,
}

/// Raw network description. Vertex `s` and `t` exist from the start.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, f64, WeightFunction)>,
    source: String,
    sink: String,
    signed: bool,
    bounds: Option<GradientBounds>,
}

impl Default for NetworkBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::with_terminals("s", "t")
    }

    pub fn with_terminals(source: &str, sink: &str) -> Self {
        let mut b = Self {
            names: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            source: source.to_string(),
            sink: sink.to_string(),
            signed: false,
            bounds: None,
        };
        b.vertex(source);
        b.vertex(sink);
        b
    }

    pub fn signed(mut self, signed: bool) -> Self {
        self.signed = signed;
        self
    }

    pub fn set_signed(&mut self, signed: bool) {
        self.signed = signed;
    }

    pub fn set_bounds(&mut self, bounds: Option<GradientBounds>) {
        self.bounds = bounds;
    }

    pub fn bounds(mut self, w_min: f64, w_max: f64) -> Self {
        self.bounds = Some(GradientBounds { w_min, w_max });
        self
    }

    /// Index of a named vertex, creating it on first use.
    pub fn vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adds an edge and returns its input index.
    pub fn edge(&mut self, tail: &str, head: &str, capacity: f64, weight: WeightFunction) -> usize {
        let u = self.vertex(tail);
        let v = self.vertex(head);
        self.edges.push((u, v, capacity, weight));
        self.edges.len() - 1
    }

    pub fn linear_edge(&mut self, tail: &str, head: &str, capacity: f64, weight: f64) -> usize {
        self.edge(tail, head, capacity, WeightFunction::linear(weight, capacity))
    }

    /// Validate, prune and level the description.
    pub fn build(self) -> Result<Network, NetworkError> {
        validate_and_level(self)
    }
}

/// An immutable, validated DAG with longest-path levels.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    source: VertexId,
    sink: VertexId,
    edges: Vec<Edge>,
    levels: Vec<u32>,
    depth: u32,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    signed: bool,
    bounds: Option<GradientBounds>,
    by_input: HashMap<usize, EdgeId>,
}

impl Network {
    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.names.len()).map(VertexId)
    }

    /// Edge built from the given builder input index, if it survived pruning.
    pub fn edge_by_input(&self, input_index: usize) -> Option<EdgeId> {
        self.by_input.get(&input_index).copied()
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v.0]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v.0]
    }

    /// Edge count of a longest `s → v` path.
    pub fn level(&self, v: VertexId) -> u32 {
        self.levels[v.0]
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// `l_v − l_u` for `e = uv`.
    pub fn edge_span(&self, e: EdgeId) -> u32 {
        let edge = &self.edges[e.0];
        self.levels[edge.head.0] - self.levels[edge.tail.0]
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn declared_bounds(&self) -> Option<GradientBounds> {
        self.bounds
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.capacity).sum()
    }

    pub fn max_capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.capacity).fold(0.0, f64::max)
    }

    /// Flow tolerance `1e-9 · max_e c_e`.
    pub fn flow_tolerance(&self) -> f64 {
        1e-9 * self.max_capacity().max(1.0)
    }

    pub fn all_linear(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_linear())
    }

    pub fn unit_capacities(&self) -> bool {
        self.edges.iter().all(|e| e.capacity == 1.0)
    }

    /// Observed gradient band: `(min_e w_e(c_e), max_e w_e(0))`, using
    /// absolute values in signed mode.
    pub fn gradient_band(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in &self.edges {
            let (a, b) = e.weight.gradient_range();
            if self.signed {
                let (a, b) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
                lo = lo.min(a);
                hi = hi.max(b);
            } else {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        (lo, hi)
    }

    /// A builder reproducing this network (same names, edge order).
    pub fn to_builder(&self) -> NetworkBuilder {
        let mut b = NetworkBuilder::with_terminals(self.name(self.source), self.name(self.sink));
        for name in &self.names {
            b.vertex(name);
        }
        b.signed = self.signed;
        b.bounds = self.bounds;
        for e in &self.edges {
            b.edges
                .push((e.tail.0, e.head.0, e.capacity, e.weight.clone()));
        }
        b
    }

    /// Same topology with every edge's weight function replaced.
    pub fn with_weights(
        &self,
        mut f: impl FnMut(EdgeId, &Edge) -> WeightFunction,
    ) -> Result<Network, NetworkError> {
        let mut b = self.to_builder();
        for (i, e) in self.edges.iter().enumerate() {
            b.edges[i].3 = f(EdgeId(i), e);
        }
        b.build()
    }
}

/// Checks a raw description and produces a leveled network.
pub fn validate_and_level(b: NetworkBuilder) -> Result<Network, NetworkError> {
    let n = b.names.len();
    let s = b.index[&b.source];
    let t = b.index[&b.sink];
    if s == t {
        return Err(NetworkError::SourceIsSink);
    }
    if let Some(GradientBounds { w_min, w_max }) = b.bounds {
        if !(w_min.is_finite() && w_max.is_finite()) || w_min <= 0.0 || w_min > w_max {
            return Err(NetworkError::InvalidBounds(w_min, w_max));
        }
    }
    let name = |i: usize| b.names[i].clone();
    for (u, v, cap, wf) in &b.edges {
        if u == v {
            return Err(NetworkError::SelfLoop(name(*u)));
        }
        if !(cap.is_finite() && *cap > 0.0) {
            return Err(NetworkError::BadCapacity {
                tail: name(*u),
                head: name(*v),
                capacity: *cap,
            });
        }
        let (lo, hi) = wf.gradient_range();
        if !b.signed && (lo < 0.0 || hi < 0.0) {
            return Err(NetworkError::NegativeWeight {
                tail: name(*u),
                head: name(*v),
            });
        }
        if let Some(bounds) = b.bounds {
            let (lo, hi) = if b.signed {
                (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()))
            } else {
                (lo, hi)
            };
            let slack = 1e-12 * bounds.w_max;
            if lo < bounds.w_min - slack || hi > bounds.w_max + slack {
                return Err(NetworkError::OutsideBounds {
                    tail: name(*u),
                    head: name(*v),
                    lo,
                    hi,
                    w_min: bounds.w_min,
                    w_max: bounds.w_max,
                });
            }
        }
    }

    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (u, _, _, _)) in b.edges.iter().enumerate() {
        out[*u].push(i);
    }
    if let Some(cycle) = find_cycle(n, &b.edges, &out) {
        return Err(NetworkError::Cycle(
            cycle
                .into_iter()
                .map(|i| (name(b.edges[i].0), name(b.edges[i].1)))
                .collect(),
        ));
    }

    // Keep vertices reachable from s that also reach t.
    let mut fwd = vec![false; n];
    let mut queue = VecDeque::from([s]);
    fwd[s] = true;
    while let Some(u) = queue.pop_front() {
        for &i in &out[u] {
            let v = b.edges[i].1;
            if !fwd[v] {
                fwd[v] = true;
                queue.push_back(v);
            }
        }
    }
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (_, v, _, _)) in b.edges.iter().enumerate() {
        inc[*v].push(i);
    }
    let mut bwd = vec![false; n];
    let mut queue = VecDeque::from([t]);
    bwd[t] = true;
    while let Some(v) = queue.pop_front() {
        for &i in &inc[v] {
            let u = b.edges[i].0;
            if !bwd[u] {
                bwd[u] = true;
                queue.push_back(u);
            }
        }
    }
    if !fwd[t] {
        return Err(NetworkError::Empty);
    }
    let keep: Vec<bool> = (0..n).map(|v| fwd[v] && bwd[v]).collect();
    let mut remap = vec![usize::MAX; n];
    let mut names = Vec::new();
    for v in 0..n {
        if keep[v] {
            remap[v] = names.len();
            names.push(b.names[v].clone());
        }
    }
    let n2 = names.len();
    let mut edges = Vec::new();
    let mut by_input = HashMap::new();
    for (i, (u, v, cap, wf)) in b.edges.into_iter().enumerate() {
        if keep[u] && keep[v] {
            let weight = wf.with_domain(cap).map_err(|source| NetworkError::Weight {
                tail: names[remap[u]].clone(),
                head: names[remap[v]].clone(),
                source,
            })?;
            by_input.insert(i, EdgeId(edges.len()));
            edges.push(Edge {
                tail: VertexId(remap[u]),
                head: VertexId(remap[v]),
                capacity: cap,
                weight,
                input_index: i,
            });
        }
    }
    let mut out_edges = vec![Vec::new(); n2];
    let mut in_edges = vec![Vec::new(); n2];
    for (i, e) in edges.iter().enumerate() {
        out_edges[e.tail.0].push(EdgeId(i));
        in_edges[e.head.0].push(EdgeId(i));
    }

    // Longest-path levels over a topological order.
    let mut indeg: Vec<usize> = in_edges.iter().map(Vec::len).collect();
    let mut order = Vec::with_capacity(n2);
    let mut queue: VecDeque<usize> = (0..n2).filter(|&v| indeg[v] == 0).collect();
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for e in &out_edges[u] {
            let v = edges[e.0].head.0;
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    let mut levels = vec![0u32; n2];
    for &u in &order {
        for e in &out_edges[u] {
            let v = edges[e.0].head.0;
            levels[v] = levels[v].max(levels[u] + 1);
        }
    }
    let source = VertexId(remap[s]);
    let sink = VertexId(remap[t]);
    debug_assert_eq!(levels[source.0], 0);
    let depth = levels[sink.0];

    Ok(Network {
        names,
        source,
        sink,
        edges,
        levels,
        depth,
        out_edges,
        in_edges,
        signed: b.signed,
        bounds: b.bounds,
        by_input,
    })
}

/// Edge indices of one directed cycle, if any.
fn find_cycle(
    n: usize,
    edges: &[(usize, usize, f64, WeightFunction)],
    out: &[Vec<usize>],
) -> Option<Vec<usize>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut via = vec![usize::MAX; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < out[u].len() {
                let ei = out[u][*next];
                *next += 1;
                let v = edges[ei].1;
                match state[v] {
                    0 => {
                        state[v] = 1;
                        via[v] = ei;
                        stack.push((v, 0));
                    }
                    1 => {
                        let mut cycle = vec![ei];
                        let mut w = u;
                        while w != v {
                            let e = via[w];
                            cycle.push(e);
                            w = edges[e].0;
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_follow_longest_paths() {
        let mut b = NetworkBuilder::new();
        b.linear_edge("s", "a", 1.0, 1.0);
        b.linear_edge("a", "t", 1.0, 1.0);
        b.linear_edge("s", "t", 1.0, 1.0);
        let net = b.build().unwrap();
        let a = net.vertex_by_name("a").unwrap();
        assert_eq!(net.level(net.source()), 0);
        assert_eq!(net.level(a), 1);
        assert_eq!(net.level(net.sink()), 2);
        assert_eq!(net.depth(), 2);
        for e in net.edge_ids() {
            assert!(net.edge_span(e) >= 1);
        }
    }

    #[test]
    fn dead_end_is_empty() {
        let mut b = NetworkBuilder::new();
        b.linear_edge("s", "a", 1.0, 1.0);
        assert_eq!(b.build().unwrap_err(), NetworkError::Empty);
    }

    #[test]
    fn cycle_is_named() {
        let mut b = NetworkBuilder::new();
        b.linear_edge("s", "a", 1.0, 1.0);
        b.linear_edge("a", "b", 1.0, 1.0);
        b.linear_edge("b", "a", 1.0, 1.0);
        b.linear_edge("b", "t", 1.0, 1.0);
        match b.build().unwrap_err() {
            NetworkError::Cycle(edges) => {
                assert_eq!(
                    edges,
                    vec![
                        ("a".to_string(), "b".to_string()),
                        ("b".to_string(), "a".to_string())
                    ]
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn off_path_vertices_are_pruned() {
        let mut b = NetworkBuilder::new();
        b.linear_edge("s", "a", 1.0, 1.0);
        b.linear_edge("a", "t", 1.0, 1.0);
        b.linear_edge("s", "dead", 1.0, 1.0);
        b.linear_edge("orphan", "t", 1.0, 1.0);
        let net = b.build().unwrap();
        assert_eq!(net.vertex_count(), 3);
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.edge_by_input(2), None);
        assert_eq!(net.edge_by_input(1), Some(EdgeId(1)));
    }

    #[test]
    fn rejects_bad_capacity_and_negative_weight() {
        let mut b = NetworkBuilder::new();
        b.linear_edge("s", "t", 0.0, 1.0);
        assert!(matches!(
            b.build(),
            Err(NetworkError::BadCapacity { .. })
        ));
        let mut b = NetworkBuilder::new();
        b.linear_edge("s", "t", 1.0, -1.0);
        assert!(matches!(
            b.build(),
            Err(NetworkError::NegativeWeight { .. })
        ));
        let mut b = NetworkBuilder::new().signed(true);
        b.linear_edge("s", "t", 1.0, -1.0);
        assert!(b.build().is_ok());
    }

    #[test]
    fn declared_bounds_are_enforced() {
        let mut b = NetworkBuilder::new().bounds(2.0, 8.0);
        b.linear_edge("s", "t", 1.0, 9.0);
        assert!(matches!(
            b.build(),
            Err(NetworkError::OutsideBounds { .. })
        ));
    }
}
