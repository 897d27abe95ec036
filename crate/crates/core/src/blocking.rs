//! Augmentation engines on the eligible graph.
//!
//! `maximal_disjoint_paths` sends one unit along a maximal family of
//! arc-disjoint paths. `blocking_flow` runs layered phases (BFS levels plus
//! depth-first pushes with current-arc pointers) until no path with remaining
//! capacity is left. The eligible graph may contain cycles, so one layered
//! phase is not enough in general.

use std::collections::VecDeque;

use crate::eligibility::{Direction, EligibleGraph};
use crate::network::{EdgeId, VertexId};

/// One `s→t` path and the amount sent along it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPush {
    /// Indices into `EligibleGraph::arcs`, in path order.
    pub arcs: Vec<usize>,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    /// Pushed amount per eligible arc, indexed like `EligibleGraph::arcs`.
    pub pushed: Vec<f64>,
    pub paths: Vec<PathPush>,
    pub value: f64,
}

impl Augmentation {
    fn empty(arcs: usize) -> Augmentation {
        Augmentation {
            pushed: vec![0.0; arcs],
            paths: Vec::new(),
            value: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Non-zero pushes keyed by edge and direction.
    pub fn by_edge<'a>(
        &'a self,
        graph: &'a EligibleGraph,
    ) -> impl Iterator<Item = (EdgeId, Direction, f64)> + 'a {
        self.pushed
            .iter()
            .enumerate()
            .filter(|(_, &amt)| amt > 0.0)
            .map(move |(a, &amt)| (graph.arcs[a].edge, graph.arcs[a].direction, amt))
    }

    /// Net outflow minus inflow at `v`.
    pub fn excess(&self, graph: &EligibleGraph, v: VertexId) -> f64 {
        let mut net = 0.0;
        for (a, arc) in graph.arcs.iter().enumerate() {
            if arc.from == v {
                net += self.pushed[a];
            }
            if arc.to == v {
                net -= self.pushed[a];
            }
        }
        net
    }

    /// Remaining arc capacities after this augmentation.
    pub fn remaining(&self, graph: &EligibleGraph) -> Vec<f64> {
        graph
            .arcs
            .iter()
            .zip(&self.pushed)
            .map(|(arc, p)| arc.capacity - p)
            .collect()
    }
}

/// Unit flow on a maximal set of pairwise arc-disjoint `s→t` paths.
pub fn maximal_disjoint_paths(graph: &EligibleGraph) -> Augmentation {
    let n = graph.vertex_count();
    let s = graph.source.0;
    let t = graph.sink.0;
    let mut aug = Augmentation::empty(graph.arcs.len());
    if s == t {
        return aug;
    }
    let mut used = vec![false; graph.arcs.len()];
    // A vertex from which one search failed to reach t stays dead: later
    // searches only have fewer arcs.
    let mut dead = vec![false; n];
    loop {
        let mut visited = vec![false; n];
        let mut cursor = vec![0usize; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut v = s;
        visited[s] = true;
        let found = loop {
            if v == t {
                break true;
            }
            let mut next = None;
            while cursor[v] < graph.adjacency[v].len() {
                let a = graph.adjacency[v][cursor[v]];
                cursor[v] += 1;
                let w = graph.arcs[a].to.0;
                if !used[a] && !visited[w] && !dead[w] {
                    next = Some(a);
                    break;
                }
            }
            match next {
                Some(a) => {
                    stack.push(a);
                    v = graph.arcs[a].to.0;
                    visited[v] = true;
                }
                None => {
                    dead[v] = true;
                    match stack.pop() {
                        Some(a) => v = graph.arcs[a].from.0,
                        None => break false,
                    }
                }
            }
        };
        if !found {
            return aug;
        }
        for &a in &stack {
            used[a] = true;
            aug.pushed[a] = 1.0;
        }
        aug.value += 1.0;
        aug.paths.push(PathPush {
            arcs: stack,
            amount: 1.0,
        });
    }
}

/// Flow in which every `s→t` path of the eligible graph has a saturated arc.
/// Residuals at or below `tol` count as saturated.
pub fn blocking_flow(graph: &EligibleGraph, tol: f64) -> Augmentation {
    const UNSET: u32 = u32::MAX;
    let n = graph.vertex_count();
    let s = graph.source.0;
    let t = graph.sink.0;
    let mut aug = Augmentation::empty(graph.arcs.len());
    if s == t {
        return aug;
    }
    let mut rem: Vec<f64> = graph
        .arcs
        .iter()
        .map(|a| if a.capacity > tol { a.capacity } else { 0.0 })
        .collect();
    let mut level = vec![UNSET; n];
    let mut cursor = vec![0usize; n];
    loop {
        level.iter_mut().for_each(|l| *l = UNSET);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &a in &graph.adjacency[v] {
                let w = graph.arcs[a].to.0;
                if rem[a] > 0.0 && level[w] == UNSET {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if level[t] == UNSET {
            return aug;
        }
        cursor.iter_mut().for_each(|c| *c = 0);
        let mut stack: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let amount = stack.iter().map(|&a| rem[a]).fold(f64::INFINITY, f64::min);
                for &a in &stack {
                    aug.pushed[a] += amount;
                    rem[a] -= amount;
                    if rem[a] <= tol {
                        rem[a] = 0.0;
                    }
                }
                aug.value += amount;
                aug.paths.push(PathPush {
                    arcs: std::mem::take(&mut stack),
                    amount,
                });
                v = s;
                continue;
            }
            let mut advanced = false;
            while cursor[v] < graph.adjacency[v].len() {
                let a = graph.adjacency[v][cursor[v]];
                let w = graph.arcs[a].to.0;
                if rem[a] > 0.0 && level[w] != UNSET && level[w] == level[v] + 1 {
                    stack.push(a);
                    v = w;
                    advanced = true;
                    break;
                }
                cursor[v] += 1;
            }
            if advanced {
                continue;
            }
            if v == s {
                break;
            }
            level[v] = UNSET;
            let a = stack.pop().expect("non-source vertex has an entry arc");
            v = graph.arcs[a].from.0;
            cursor[v] += 1;
        }
    }
}
