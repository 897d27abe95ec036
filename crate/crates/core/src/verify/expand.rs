//! Multiedge expansion of concave edges.
//!
//! An edge with gradient `w_e` is split into parallel linear edges whose
//! weights step down by `δ_T` from `⌊w_e(0)/δ_T⌋·δ_T` to
//! `⌊w_e(c_e)/δ_T⌋·δ_T`. Parallel edge `i` covers `(x_{i−1}, x_i]` with
//! `x_i = sup{x : w_e(x) ≥ w_{e_i}}`, so the step gradient never exceeds
//! `w_e` and never falls more than `δ_T` below it.

use thiserror::Error;

use crate::network::{EdgeId, GradientBounds, Network, NetworkBuilder, NetworkError};
use crate::weights::WeightFunction;

/// Default cap on the total number of parallel edges.
pub const DEFAULT_EXPANSION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpansionError {
    #[error("expansion needs {count} parallel edges, cap is {cap}")]
    TooManyEdges { count: usize, cap: usize },
    #[error("grid unit must be positive, got {0}")]
    Unit(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelEdge {
    /// Edge in the expanded network.
    pub edge: EdgeId,
    pub weight: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone)]
pub struct ExpandedNetwork {
    pub network: Network,
    /// Per original edge, its parallel edges in decreasing weight order.
    pub parallels: Vec<Vec<ParallelEdge>>,
    pub unit: f64,
}

impl ExpandedNetwork {
    /// Sums parallel flows back onto the original edges.
    pub fn collapse(&self, expanded_flow: &[f64]) -> Vec<f64> {
        self.parallels
            .iter()
            .map(|ps| ps.iter().map(|p| expanded_flow[p.edge.0]).sum())
            .collect()
    }

    /// Fills parallel edges in decreasing weight order.
    pub fn well_ordered(&self, original_flow: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.network.edge_count()];
        for (ps, &x) in self.parallels.iter().zip(original_flow) {
            let mut left = x;
            for p in ps {
                let take = left.min(p.capacity).max(0.0);
                out[p.edge.0] = take;
                left -= take;
            }
        }
        out
    }

    /// Whether `expanded_flow` fills each original edge's parallels in
    /// decreasing weight order.
    pub fn is_well_ordered(&self, expanded_flow: &[f64], tol: f64) -> bool {
        self.parallels.iter().all(|ps| {
            ps.windows(2).all(|w| {
                let later = expanded_flow[w[1].edge.0];
                later <= tol || expanded_flow[w[0].edge.0] >= w[0].capacity - tol
            })
        })
    }

    /// Step gradient of original edge `e` at `x`: the weight of the
    /// parallel edge covering `x` (right-continuous, last piece at `c_e`).
    pub fn step_gradient(&self, e: EdgeId, x: f64) -> f64 {
        let ps = &self.parallels[e.0];
        let mut end = 0.0;
        for p in ps {
            end += p.capacity;
            if x < end {
                return p.weight;
            }
        }
        ps.last().map(|p| p.weight).unwrap_or(f64::NAN)
    }

    /// `Σ_e Σ_i w_{e_i}·x̄_{e_i}` for a flow on the expanded network.
    pub fn linear_objective(&self, expanded_flow: &[f64]) -> f64 {
        self.parallels
            .iter()
            .flatten()
            .map(|p| p.weight * expanded_flow[p.edge.0])
            .sum()
    }
}

pub fn expand_multiedges(net: &Network, unit: f64) -> Result<ExpandedNetwork, ExpansionError> {
    expand_multiedges_capped(net, unit, DEFAULT_EXPANSION_CAP)
}

pub fn expand_multiedges_capped(
    net: &Network,
    unit: f64,
    cap: usize,
) -> Result<ExpandedNetwork, ExpansionError> {
    if !(unit > 0.0 && unit.is_finite()) {
        return Err(ExpansionError::Unit(unit));
    }
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::with_capacity(net.edge_count());
    let mut total = 0usize;
    for edge in net.edges() {
        let wf = &edge.weight;
        let c = edge.capacity;
        let hi = (wf.right_gradient(0.0) / unit).floor() as i64;
        let lo = (wf.left_gradient_unchecked(c) / unit).floor() as i64;
        let k = (hi - lo + 1).max(1) as usize;
        total += k;
        if total > cap {
            return Err(ExpansionError::TooManyEdges {
                count: total,
                cap,
            });
        }
        let mut list = Vec::with_capacity(k);
        let mut prev = 0.0;
        for level in (lo..=hi).rev() {
            let w = level as f64 * unit;
            let x = if level == lo {
                c
            } else {
                wf.forward_headroom(0.0, c, w).clamp(prev, c)
            };
            if x > prev {
                list.push((w, x - prev));
            }
            prev = x;
        }
        pieces.push(list);
    }

    let mut b = NetworkBuilder::with_terminals(net.name(net.source()), net.name(net.sink()));
    for v in net.vertices() {
        b.vertex(net.name(v));
    }
    b.set_signed(net.is_signed());
    // Keep the original band so a solve on the expansion uses the same
    // grid; widen it only when rounding drops a weight below `w_min`.
    let mut bounds = net.declared_bounds().unwrap_or_else(|| {
        let (w_min, w_max) = net.gradient_band();
        GradientBounds { w_min, w_max }
    });
    for &(w, _) in pieces.iter().flatten() {
        let w = if net.is_signed() { w.abs() } else { w };
        bounds.w_min = bounds.w_min.min(w);
    }
    b.set_bounds(Some(bounds));
    let mut origin = Vec::new();
    for (e, list) in net.edge_ids().zip(&pieces) {
        let edge = net.edge(e);
        for &(w, c) in list {
            b.edge(
                net.name(edge.tail),
                net.name(edge.head),
                c,
                WeightFunction::linear(w, c),
            );
            origin.push((e, w, c));
        }
    }
    let network = b.build()?;
    let mut parallels = vec![Vec::new(); net.edge_count()];
    for (i, (e, weight, capacity)) in origin.into_iter().enumerate() {
        let edge = network
            .edge_by_input(i)
            .expect("expanded edges are never pruned");
        parallels[e.0].push(ParallelEdge {
            edge,
            weight,
            capacity,
        });
    }
    Ok(ExpandedNetwork {
        network,
        parallels,
        unit,
    })
}
