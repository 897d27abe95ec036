//! The primal-dual drivers.
//!
//! All three share one loop. Scale `i` repeats
//! *build eligible graph → augment → rebuild → dual adjust* until `p_t`
//! reaches the scale target, and a dual rescale separates consecutive
//! scales. The simple variant has a single scale with `δ = ε·w_min` and
//! augments along arc-disjoint unit paths; the others use blocking flows.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::blocking::{blocking_flow, maximal_disjoint_paths, Augmentation};
use crate::eligibility::{build_eligible_graph, Direction, EligibleGraph, FlowState, RuleSet};
use crate::format::num;
use crate::grid::{Grid, GridError, GridScalar};
use crate::network::{GradientBounds, Network};
use crate::verify::{
    check_final_lower_bound, check_invariants_at, gradient_tolerance, reduced_cost_identity,
    AuditReport, Check, Stamp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Simple,
    Scaling,
    Concave,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Simple => "simple",
            Algorithm::Scaling => "scaling",
            Algorithm::Concave => "concave",
        }
    }

    pub fn rules(self) -> RuleSet {
        match self {
            Algorithm::Simple => RuleSet::Simple,
            Algorithm::Scaling => RuleSet::Scaling,
            Algorithm::Concave => RuleSet::Concave,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(Algorithm::Simple),
            "scaling" => Ok(Algorithm::Scaling),
            "concave" => Ok(Algorithm::Concave),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// How often invariants are audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AuditMode {
    #[default]
    EveryIteration,
    PerScale,
    Off,
}

impl FromStr for AuditMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "every-iteration" => Ok(AuditMode::EveryIteration),
            "per-scale" => Ok(AuditMode::PerScale),
            "off" => Ok(AuditMode::Off),
            other => Err(format!("unknown audit mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub audit: AuditMode,
    /// Gradient band to use instead of the declared or observed one.
    pub bounds: Option<GradientBounds>,
}

impl SolveOptions {
    pub fn audit(mut self, mode: AuditMode) -> Self {
        self.audit = mode;
        self
    }

    pub fn bounds(mut self, w_min: f64, w_max: f64) -> Self {
        self.bounds = Some(GradientBounds { w_min, w_max });
        self
    }
}

/// One line of the iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub scale: u32,
    pub iteration: u64,
    /// `p_t` after the dual adjustment, in weight units.
    pub p_t: f64,
    pub augmented: f64,
    pub eligible_arcs: usize,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scale={} iteration={} p_t={} augmented={} eligible_arcs={}",
            self.scale,
            self.iteration,
            num(self.p_t),
            num(self.augmented),
            self.eligible_arcs
        )
    }
}

pub trait TraceSink {
    fn record(&mut self, record: &IterationRecord);
}

/// Discards the trace.
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn record(&mut self, _: &IterationRecord) {}
}

impl TraceSink for Vec<IterationRecord> {
    fn record(&mut self, record: &IterationRecord) {
        self.push(record.clone());
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("unit capacities required")]
    UnitCapacities,
    #[error("edge {edge}: linear weights required for the {algorithm} algorithm")]
    NonLinear { edge: usize, algorithm: Algorithm },
    #[error("edge {edge}: gradient {gradient} outside the band [{w_min}, {w_max}]")]
    OutsideBounds {
        edge: usize,
        gradient: f64,
        w_min: f64,
        w_max: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    pub grid: Grid,
    pub flow: Vec<f64>,
    /// `Σ f_e(x_e)` with the unrounded weight functions.
    pub objective: f64,
    /// Final potentials in weight units.
    pub potentials: Vec<f64>,
    /// Iterations per scale, scale 0 first.
    pub scale_iterations: Vec<u64>,
    pub augmented: f64,
    pub audit: AuditReport,
    /// `δ_{scale(e)}` in weight units for edges that ever received forward flow.
    pub delta_f: Vec<Option<f64>>,
    pub elapsed: Duration,
    pub state: FlowState,
}

impl SolveResult {
    pub fn iterations(&self) -> u64 {
        self.scale_iterations.iter().sum()
    }

    /// Dual edge values `y_e = max(0, w^p_e)` at termination.
    pub fn dual_values(&self, net: &Network) -> Vec<f64> {
        net.edge_ids()
            .map(|e| self.state.reduced_gradient(net, e).max(0.0))
            .collect()
    }

    /// Flow value leaving the source.
    pub fn flow_value(&self, net: &Network) -> f64 {
        net.out_edges(net.source())
            .iter()
            .map(|e| self.flow[e.0])
            .sum::<f64>()
            - net
                .in_edges(net.source())
                .iter()
                .map(|e| self.flow[e.0])
                .sum::<f64>()
    }
}

/// Unit-capacity linear instances, single step `δ = ε·w_min`.
pub fn simple_flow(net: &Network, eps: f64) -> Result<SolveResult, SolveError> {
    solve(net, Algorithm::Simple, eps, &SolveOptions::default(), &mut NoTrace)
}

/// Linear instances with general capacities.
pub fn scaling_flow(net: &Network, eps: f64) -> Result<SolveResult, SolveError> {
    solve(net, Algorithm::Scaling, eps, &SolveOptions::default(), &mut NoTrace)
}

/// Concave weight functions through headroom queries.
pub fn concave_flow(net: &Network, eps: f64) -> Result<SolveResult, SolveError> {
    solve(net, Algorithm::Concave, eps, &SolveOptions::default(), &mut NoTrace)
}

/// Checks preconditions and builds the grid for `algorithm`.
pub fn prepare_grid(
    net: &Network,
    algorithm: Algorithm,
    eps: f64,
    options: &SolveOptions,
) -> Result<Grid, SolveError> {
    if algorithm == Algorithm::Simple && !net.unit_capacities() {
        return Err(SolveError::UnitCapacities);
    }
    if algorithm != Algorithm::Concave {
        if let Some(e) = net.edges().iter().find(|e| !e.weight.is_linear()) {
            return Err(SolveError::NonLinear {
                edge: e.input_index,
                algorithm,
            });
        }
    }
    let bounds = options.bounds.or(net.declared_bounds()).unwrap_or_else(|| {
        let (w_min, w_max) = net.gradient_band();
        GradientBounds { w_min, w_max }
    });
    let slack = 1e-12 * bounds.w_max.abs().max(1.0);
    for e in net.edges() {
        let (lo, hi) = e.weight.gradient_range();
        for g in [lo, hi] {
            let g_abs = if net.is_signed() { g.abs() } else { g };
            if g_abs < bounds.w_min - slack || g_abs > bounds.w_max + slack {
                return Err(SolveError::OutsideBounds {
                    edge: e.input_index,
                    gradient: g,
                    w_min: bounds.w_min,
                    w_max: bounds.w_max,
                });
            }
        }
    }
    Ok(match algorithm {
        Algorithm::Simple => Grid::simple(bounds.w_min, bounds.w_max, eps)?,
        _ => Grid::scaling(bounds.w_min, bounds.w_max, eps)?,
    })
}

/// Runs `algorithm` and reports every iteration to `sink`.
pub fn solve(
    net: &Network,
    algorithm: Algorithm,
    eps: f64,
    options: &SolveOptions,
    sink: &mut dyn TraceSink,
) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let grid = prepare_grid(net, algorithm, eps, options)?;
    let tol = net.flow_tolerance();
    let t = net.sink();
    let depth = net.depth();
    let mut state = FlowState::initial(net, grid, algorithm.rules());
    let mut audit = AuditReport::new(tol, gradient_tolerance(&grid));
    let auditing = options.audit != AuditMode::Off;
    if auditing {
        audit.merge(&check_invariants_at(net, &state, Stamp::default()));
    }

    let mut scale_iterations = Vec::new();
    let mut augmented = 0.0;
    let mut iteration = 0u64;
    for scale in 0..=grid.scales() {
        state.scale = scale;
        let delta = state.delta();
        let target = grid.scale_target(scale, depth);
        if !(target == GridScalar::ZERO || target.is_multiple_of(delta)) {
            return Err(SolveError::Internal(format!(
                "scale {scale} target {target} is not a multiple of {delta}"
            )));
        }
        let mut count = 0u64;
        while state.potential(t) > target {
            iteration += 1;
            let stamp = Stamp { scale, iteration };
            let (value, arcs, graph) =
                augment_until_blocked(net, &mut state, algorithm, tol, stamp, &mut audit, auditing)?;
            augmented += value;
            let before = state.potential(t);
            dual_adjust(&mut state, &graph);
            if auditing {
                audit.record(Check::SinkStep, before - state.potential(t) == delta, stamp, || {
                    (None, Some(t), grid.to_weight(before - state.potential(t)), grid.to_weight(delta))
                });
            }
            if options.audit == AuditMode::EveryIteration {
                audit.merge(&check_invariants_at(net, &state, stamp));
            }
            count += 1;
            sink.record(&IterationRecord {
                scale,
                iteration: count,
                p_t: grid.to_weight(state.potential(t)),
                augmented: value,
                eligible_arcs: arcs,
            });
        }
        scale_iterations.push(count);
        if scale < grid.scales() {
            dual_rescale(net, &mut state);
        }
        if auditing {
            audit.merge(&check_invariants_at(
                net,
                &state,
                Stamp {
                    scale: state.scale,
                    iteration,
                },
            ));
        }
    }

    if auditing {
        if algorithm != Algorithm::Simple {
            check_final_lower_bound(net, &state, &mut audit);
        }
        if algorithm != Algorithm::Concave {
            let stamp = Stamp {
                scale: state.scale,
                iteration,
            };
            match reduced_cost_identity(net, &grid, &state.flow, &state.potential) {
                Ok((plain, reduced)) => {
                    audit.record(Check::ReducedCostIdentity, plain == reduced, stamp, || {
                        (None, None, reduced, plain)
                    })
                }
                Err(_) => audit.record(Check::ReducedCostIdentity, false, stamp, || {
                    (None, None, f64::NAN, f64::NAN)
                }),
            }
        }
    }

    let objective = net
        .edge_ids()
        .map(|e| net.edge(e).weight.value_unchecked(state.flow[e.0]))
        .sum();
    let delta_f = state
        .last_forward
        .iter()
        .map(|s| s.map(|j| grid.to_weight(grid.delta(j))))
        .collect();
    Ok(SolveResult {
        algorithm,
        grid,
        flow: state.flow.clone(),
        objective,
        potentials: state.potential.iter().map(|&p| grid.to_weight(p)).collect(),
        scale_iterations,
        augmented,
        audit,
        delta_f,
        elapsed: started.elapsed(),
        state,
    })
}

/// Augments and rebuilds until `t` is unreachable. A second round is
/// recorded as a `SinkUnreachable` violation.
fn augment_until_blocked(
    net: &Network,
    state: &mut FlowState,
    algorithm: Algorithm,
    tol: f64,
    stamp: Stamp,
    audit: &mut AuditReport,
    auditing: bool,
) -> Result<(f64, usize, EligibleGraph), SolveError> {
    let mut graph = build_eligible_graph(net, state);
    let arcs = graph.arcs.len();
    let mut value = 0.0;
    for _ in 0..64 {
        let aug = match algorithm {
            Algorithm::Simple => maximal_disjoint_paths(&graph),
            _ => blocking_flow(&graph, tol),
        };
        apply_augmentation(net, state, &graph, &aug)?;
        value += aug.value;
        let progressed = !aug.is_empty();
        graph = build_eligible_graph(net, state);
        let blocked = !graph.reaches_sink();
        if auditing {
            audit.record(Check::SinkUnreachable, blocked, stamp, || {
                (None, Some(net.sink()), 1.0, 0.0)
            });
        }
        if blocked {
            return Ok((value, arcs, graph));
        }
        if !progressed {
            break;
        }
    }
    Err(SolveError::Internal(
        "sink stays reachable after augmentation".to_string(),
    ))
}

/// `p_u ← p_u − δ_i` for every vertex unreachable from `s`. Returns how
/// many vertices moved.
pub fn dual_adjust(state: &mut FlowState, graph: &EligibleGraph) -> usize {
    let delta = state.delta();
    let mut moved = 0;
    for (v, p) in state.potential.iter_mut().enumerate() {
        if !graph.reachable[v] {
            *p -= delta;
            moved += 1;
        }
    }
    moved
}

/// `p_u ← p_u + δ_i·l_u`, then moves to scale `i + 1`.
pub fn dual_rescale(net: &Network, state: &mut FlowState) {
    let delta = state.delta();
    for v in net.vertices() {
        state.potential[v.0] += delta * net.level(v) as i64;
    }
    state.scale += 1;
}

/// Applies net pushes to `x` and stamps `scale(e)` on forward pushes.
pub fn apply_augmentation(
    net: &Network,
    state: &mut FlowState,
    graph: &EligibleGraph,
    aug: &Augmentation,
) -> Result<(), SolveError> {
    let tol = net.flow_tolerance();
    for (e, direction, amount) in aug.by_edge(graph) {
        match direction {
            Direction::Forward => {
                state.flow[e.0] += amount;
                state.last_forward[e.0] = Some(state.scale);
            }
            Direction::Backward => state.flow[e.0] -= amount,
        }
    }
    for (e, _, _) in aug.by_edge(graph) {
        let c = net.edge(e).capacity;
        let x = &mut state.flow[e.0];
        if *x < -tol || *x > c + tol {
            return Err(SolveError::Internal(format!(
                "edge {} flow {} outside [0, {}]",
                net.edge(e).input_index,
                x,
                c
            )));
        }
        if x.abs() <= tol {
            *x = 0.0;
        } else if (*x - c).abs() <= tol {
            *x = c;
        }
    }
    Ok(())
}
