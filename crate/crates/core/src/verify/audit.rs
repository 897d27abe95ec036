//! Invariant auditing over a flow/potential state.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::eligibility::{FlowState, RuleSet};
use crate::format::num;
use crate::grid::{Grid, GridScalar};
use crate::network::{EdgeId, Network, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// Simple mode: `x_e = 1 ⇒ w^p_e ≥ 0`.
    A1,
    /// Simple mode: `x_e = 0 ⇒ w^p_e ≤ δ`.
    A2,
    /// `x_e > 0 ⇒ w^p_e ≥ −3·l_e·(δ_e − δ_i) − δ_i`.
    B1,
    /// `x_e < c_e ⇒ w^p_e ≤ 2δ_i`.
    B2,
    Capacity,
    Conservation,
    SourcePotential,
    GridMembership,
    /// `t` unreachable right after an augmentation.
    SinkUnreachable,
    /// `p_t` drops by exactly `δ_i` per iteration.
    SinkStep,
    ReducedCostIdentity,
    /// End-of-run `w^p_e ≥ −3·l_e·δ^f_e`. Reported as a flag only.
    FinalLowerBound,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::A1,
        Check::A2,
        Check::B1,
        Check::B2,
        Check::Capacity,
        Check::Conservation,
        Check::SourcePotential,
        Check::GridMembership,
        Check::SinkUnreachable,
        Check::SinkStep,
        Check::ReducedCostIdentity,
        Check::FinalLowerBound,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Check::A1 => "a1",
            Check::A2 => "a2",
            Check::B1 => "b1",
            Check::B2 => "b2",
            Check::Capacity => "capacity",
            Check::Conservation => "conservation",
            Check::SourcePotential => "source_potential",
            Check::GridMembership => "grid_membership",
            Check::SinkUnreachable => "sink_unreachable",
            Check::SinkStep => "sink_step",
            Check::ReducedCostIdentity => "reduced_cost_identity",
            Check::FinalLowerBound => "final_lower_bound",
        }
    }

    /// Flag-only checks never count as violations.
    pub fn is_flag(self) -> bool {
        self == Check::FinalLowerBound
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckCount {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: Check,
    pub edge: Option<EdgeId>,
    pub vertex: Option<VertexId>,
    /// Observed value and the bound it broke, in weight or flow units.
    pub value: f64,
    pub bound: f64,
    pub scale: u32,
    pub iteration: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    counts: BTreeMap<Check, CheckCount>,
    first: Option<Violation>,
    first_flag: Option<Violation>,
    pub flow_tolerance: f64,
    pub gradient_tolerance: f64,
    pub audited_points: u64,
}

/// Where in a run an audit happens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stamp {
    pub scale: u32,
    pub iteration: u64,
}

impl AuditReport {
    pub fn new(flow_tolerance: f64, gradient_tolerance: f64) -> AuditReport {
        AuditReport {
            flow_tolerance,
            gradient_tolerance,
            ..AuditReport::default()
        }
    }

    /// Counts one evaluation of `check`; `detail` describes a failure.
    pub fn record(
        &mut self,
        check: Check,
        ok: bool,
        stamp: Stamp,
        detail: impl FnOnce() -> (Option<EdgeId>, Option<VertexId>, f64, f64),
    ) {
        let c = self.counts.entry(check).or_default();
        if ok {
            c.passed += 1;
            return;
        }
        c.failed += 1;
        let slot = if check.is_flag() {
            &mut self.first_flag
        } else {
            &mut self.first
        };
        if slot.is_none() {
            let (edge, vertex, value, bound) = detail();
            *slot = Some(Violation {
                check,
                edge,
                vertex,
                value,
                bound,
                scale: stamp.scale,
                iteration: stamp.iteration,
            });
        }
    }

    pub fn count(&self, check: Check) -> CheckCount {
        self.counts.get(&check).copied().unwrap_or_default()
    }

    /// Failures of non-flag checks.
    pub fn violations(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(c, _)| !c.is_flag())
            .map(|(_, n)| n.failed)
            .sum()
    }

    pub fn flags(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(c, _)| c.is_flag())
            .map(|(_, n)| n.failed)
            .sum()
    }

    pub fn is_clean(&self) -> bool {
        self.violations() == 0
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.first.as_ref()
    }

    pub fn first_flag(&self) -> Option<&Violation> {
        self.first_flag.as_ref()
    }

    pub fn merge(&mut self, other: &AuditReport) {
        for (check, n) in &other.counts {
            let c = self.counts.entry(*check).or_default();
            c.passed += n.passed;
            c.failed += n.failed;
        }
        if self.first.is_none() {
            self.first = other.first.clone();
        }
        if self.first_flag.is_none() {
            self.first_flag = other.first_flag.clone();
        }
        self.audited_points += other.audited_points;
        self.flow_tolerance = self.flow_tolerance.max(other.flow_tolerance);
        self.gradient_tolerance = self.gradient_tolerance.max(other.gradient_tolerance);
    }

    /// Line-oriented `key: value` block.
    pub fn to_key_value(&self, net: &Network) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "audit.points: {}", self.audited_points);
        let _ = writeln!(out, "audit.violations: {}", self.violations());
        let _ = writeln!(out, "audit.flags: {}", self.flags());
        let _ = writeln!(out, "audit.flow_tolerance: {}", num(self.flow_tolerance));
        let _ = writeln!(
            out,
            "audit.gradient_tolerance: {}",
            num(self.gradient_tolerance)
        );
        for check in Check::ALL {
            if let Some(c) = self.counts.get(&check) {
                let _ = writeln!(
                    out,
                    "audit.{}: passed={} failed={}",
                    check.key(),
                    c.passed,
                    c.failed
                );
            }
        }
        for (label, v) in [("first_violation", &self.first), ("first_flag", &self.first_flag)] {
            if let Some(v) = v {
                let place = match (v.edge, v.vertex) {
                    (Some(e), _) => {
                        let edge = net.edge(e);
                        format!("edge={}->{}", net.name(edge.tail), net.name(edge.head))
                    }
                    (None, Some(u)) => format!("vertex={}", net.name(u)),
                    (None, None) => "global".to_string(),
                };
                let _ = writeln!(
                    out,
                    "audit.{label}: check={} {place} value={} bound={} scale={} iteration={}",
                    v.check.key(),
                    num(v.value),
                    num(v.bound),
                    v.scale,
                    v.iteration
                );
            }
        }
        out
    }
}

/// Slack used for gradient comparisons in concave mode.
pub fn gradient_tolerance(grid: &Grid) -> f64 {
    1e-9 * grid.w_max().max(1.0)
}

/// Evaluates the state's invariant list plus capacity, conservation,
/// `p_s = 0` and grid membership.
pub fn check_invariants(net: &Network, state: &FlowState) -> AuditReport {
    check_invariants_at(net, state, Stamp::default())
}

pub fn check_invariants_at(net: &Network, state: &FlowState, stamp: Stamp) -> AuditReport {
    let tol = net.flow_tolerance();
    let grid = &state.grid;
    let gtol = gradient_tolerance(grid);
    let mut report = AuditReport::new(tol, gtol);
    report.audited_points = 1;
    let delta = state.delta();

    for e in net.edge_ids() {
        let edge = net.edge(e);
        let x = state.flow[e.0];
        let c = edge.capacity;
        report.record(Check::Capacity, x >= -tol && x <= c + tol, stamp, || {
            (Some(e), None, x, c)
        });
        let span = net.edge_span(e) as i64;
        match state.rules {
            RuleSet::Simple => {
                let rw = state.reduced_units(net, e);
                if x > tol {
                    report.record(Check::A1, rw >= GridScalar::ZERO, stamp, || {
                        (Some(e), None, grid.to_weight(rw), 0.0)
                    });
                }
                if x < c - tol {
                    report.record(Check::A2, rw <= delta, stamp, || {
                        (Some(e), None, grid.to_weight(rw), grid.to_weight(delta))
                    });
                }
            }
            RuleSet::Scaling => {
                let rw = state.reduced_units(net, e);
                if x > tol {
                    let de = state.edge_delta(e);
                    let bound = -((de - delta) * (3 * span)) - delta;
                    report.record(Check::B1, rw >= bound, stamp, || {
                        (Some(e), None, grid.to_weight(rw), grid.to_weight(bound))
                    });
                }
                if x < c - tol {
                    let bound = delta * 2;
                    report.record(Check::B2, rw <= bound, stamp, || {
                        (Some(e), None, grid.to_weight(rw), grid.to_weight(bound))
                    });
                }
            }
            RuleSet::Concave => {
                let gap = grid.to_weight(state.potential_gap(net, e));
                let wf = &edge.weight;
                if x > tol {
                    // Lowering x is governed by the left gradient.
                    let g = wf.left_gradient_unchecked((x - tol).clamp(0.0, c)) + gap;
                    let de = state.edge_delta(e);
                    let bound = grid.to_weight(-((de - delta) * (3 * span)) - delta);
                    report.record(Check::B1, g >= bound - gtol, stamp, || {
                        (Some(e), None, g, bound)
                    });
                }
                if x < c - tol {
                    let g = wf.right_gradient((x + tol).clamp(0.0, c)) + gap;
                    let bound = grid.to_weight(delta * 2);
                    report.record(Check::B2, g <= bound + gtol, stamp, || {
                        (Some(e), None, g, bound)
                    });
                }
            }
        }
    }

    for v in net.vertices() {
        if v == net.source() || v == net.sink() {
            continue;
        }
        let inflow: f64 = net.in_edges(v).iter().map(|e| state.flow[e.0]).sum();
        let outflow: f64 = net.out_edges(v).iter().map(|e| state.flow[e.0]).sum();
        let deg = (net.in_edges(v).len() + net.out_edges(v).len()).max(1) as f64;
        report.record(
            Check::Conservation,
            (inflow - outflow).abs() <= tol * deg,
            stamp,
            || (None, Some(v), inflow - outflow, 0.0),
        );
    }

    let ps = state.potential(net.source());
    report.record(Check::SourcePotential, ps == GridScalar::ZERO, stamp, || {
        (None, Some(net.source()), grid.to_weight(ps), 0.0)
    });
    for v in net.vertices() {
        let p = state.potential(v);
        report.record(
            Check::GridMembership,
            p == GridScalar::ZERO || p.is_multiple_of(delta),
            stamp,
            || (None, Some(v), grid.to_weight(p), grid.to_weight(delta)),
        );
    }
    report
}

/// End-of-run check `w^p_e ≥ −3·l_e·δ^f_e − δ_T` on edges with flow.
pub fn check_final_lower_bound(net: &Network, state: &FlowState, report: &mut AuditReport) {
    let tol = net.flow_tolerance();
    let grid = &state.grid;
    let stamp = Stamp {
        scale: state.scale,
        iteration: 0,
    };
    for e in net.edge_ids() {
        if state.flow[e.0] <= tol {
            continue;
        }
        let span = net.edge_span(e) as i64;
        let bound = grid.to_weight(-(state.edge_delta(e) * (3 * span)) - GridScalar(1));
        let value = match state.rules {
            RuleSet::Concave => state.reduced_gradient(net, e),
            _ => grid.to_weight(state.reduced_units(net, e)),
        };
        report.record(
            Check::FinalLowerBound,
            value >= bound - report.gradient_tolerance,
            stamp,
            || (Some(e), None, value, bound),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("flow violates conservation at vertex {0} (excess {1})")]
    Conservation(VertexId, f64),
    #[error("p_s and p_t differ")]
    TerminalPotentials,
    #[error("edge {0} has a non-linear weight")]
    NonLinear(EdgeId),
}

/// Returns `(Σ w_e·x_e, Σ w^p_e·x_e)` using grid-rounded weights.
///
/// Both sums are accumulated as unit counts before the final conversion,
/// so dyadic flows give bit-identical results whenever the identity holds.
pub fn reduced_cost_identity(
    net: &Network,
    grid: &Grid,
    flow: &[f64],
    potentials: &[GridScalar],
) -> Result<(f64, f64), IdentityError> {
    let tol = net.flow_tolerance();
    for v in net.vertices() {
        if v == net.source() || v == net.sink() {
            continue;
        }
        let excess: f64 = net.in_edges(v).iter().map(|e| flow[e.0]).sum::<f64>()
            - net.out_edges(v).iter().map(|e| flow[e.0]).sum::<f64>();
        if excess.abs() > tol {
            return Err(IdentityError::Conservation(v, excess));
        }
    }
    if potentials[net.source().0] != potentials[net.sink().0] {
        return Err(IdentityError::TerminalPotentials);
    }
    let mut plain = 0.0;
    let mut reduced = 0.0;
    for e in net.edge_ids() {
        let edge = net.edge(e);
        let w = edge
            .weight
            .linear_weight()
            .ok_or(IdentityError::NonLinear(e))?;
        let wu = grid.floor(w);
        let rw = wu + potentials[edge.tail.0] - potentials[edge.head.0];
        plain += wu.units() as f64 * flow[e.0];
        reduced += rw.units() as f64 * flow[e.0];
    }
    Ok((plain * grid.unit(), reduced * grid.unit()))
}
