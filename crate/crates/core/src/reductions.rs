//! Builders that encode applications as small-depth flow networks.
//!
//! Edges that only route flow get a small positive weight (the solvers
//! need `w_min > 0`). Their total contribution is bounded by
//! [`ReductionMap::aux_slack`] and excluded from the application objective.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::format::num;
use crate::network::{EdgeId, Network, NetworkBuilder, NetworkError};
use crate::weights::{WeightError, WeightFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("empty instance: {0}")]
    Empty(&'static str),
    #[error("{what} {index}: capacity must be positive, got {value}")]
    Capacity {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what} {index}: weight must be positive, got {value}")]
    Weight {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what} {index}: reference to missing element {target}")]
    Index {
        what: &'static str,
        index: usize,
        target: usize,
    },
    #[error("job {job}: window [{start}, {end}] outside days 1..={days}")]
    Window {
        job: usize,
        start: usize,
        end: usize,
        days: usize,
    },
    #[error("reward must be positive, got {0}")]
    Reward(f64),
    #[error("source {index}: {source}")]
    SourceFunction { index: usize, source: WeightError },
    #[error("source {0} cannot reach the sink")]
    Unreachable(usize),
    #[error("auxiliary weight must be positive, got {0}")]
    AuxWeight(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Weight given to routing-only edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxWeight {
    /// `ε·w_min/m̂`, with `w_min` the smallest carrier weight and `m̂` the
    /// number of auxiliary edges.
    Auto { eps: f64 },
    Fixed(f64),
}

impl AuxWeight {
    fn resolve(self, w_min: f64, count: usize) -> Result<f64, ReductionError> {
        let w = match self {
            AuxWeight::Auto { eps } => eps * w_min / count.max(1) as f64,
            AuxWeight::Fixed(w) => w,
        };
        if w > 0.0 && w.is_finite() {
            Ok(w)
        } else {
            Err(ReductionError::AuxWeight(w))
        }
    }
}

/// What a network edge stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entity {
    Left(usize),
    Right(usize),
    Pair(usize),
    ElementX(usize),
    ElementY(usize),
    ElementZ(usize),
    XyEdge(usize),
    YzEdge(usize),
    JobIntake(usize),
    JobScheduled(usize),
    JobSkipped(usize),
    Day(usize),
    DayExit(usize),
    Source(usize),
    Interior(usize),
    CostEdge(usize),
    Reward,
}

impl Entity {
    pub fn key(&self) -> String {
        match self {
            Entity::Left(i) => format!("left{i}"),
            Entity::Right(i) => format!("right{i}"),
            Entity::Pair(i) => format!("pair{i}"),
            Entity::ElementX(i) => format!("x{i}"),
            Entity::ElementY(i) => format!("y{i}"),
            Entity::ElementZ(i) => format!("z{i}"),
            Entity::XyEdge(i) => format!("xy{i}"),
            Entity::YzEdge(i) => format!("yz{i}"),
            Entity::JobIntake(i) => format!("job{i}.intake"),
            Entity::JobScheduled(i) => format!("job{i}.scheduled"),
            Entity::JobSkipped(i) => format!("job{i}.skipped"),
            Entity::Day(i) => format!("day{i}"),
            Entity::DayExit(i) => format!("day{i}.exit"),
            Entity::Source(i) => format!("source{i}"),
            Entity::Interior(i) => format!("edge{i}"),
            Entity::CostEdge(i) => format!("edge{i}"),
            Entity::Reward => "reward".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRole {
    pub entity: Entity,
    /// Contributes its weight function to the application objective.
    pub counted: bool,
    /// Carries the auxiliary weight.
    pub auxiliary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveTransform {
    Identity,
    /// Application value is the negated network value (min-cost).
    Negate,
}

#[derive(Debug, Clone)]
pub struct ReductionMap {
    pub network: Network,
    /// Indexed by network `EdgeId`.
    pub roles: Vec<EdgeRole>,
    pub transform: ObjectiveTransform,
    pub aux_weight: f64,
    pub aux_edges: usize,
    /// Upper bound on the auxiliary edges' total contribution.
    pub aux_slack: f64,
    pub notes: Vec<String>,
}

impl ReductionMap {
    /// Application objective of a network flow.
    pub fn objective(&self, flow: &[f64]) -> f64 {
        let total: f64 = self
            .network
            .edge_ids()
            .filter(|e| self.roles[e.0].counted)
            .map(|e| self.network.edge(e).weight.value_unchecked(flow[e.0]))
            .sum();
        match self.transform {
            ObjectiveTransform::Identity => total,
            ObjectiveTransform::Negate => -total,
        }
    }

    /// Network objective of a flow, auxiliary edges included.
    pub fn network_objective(&self, flow: &[f64]) -> f64 {
        self.network
            .edge_ids()
            .map(|e| self.network.edge(e).weight.value_unchecked(flow[e.0]))
            .sum()
    }

    pub fn role(&self, e: EdgeId) -> EdgeRole {
        self.roles[e.0]
    }

    pub fn edge_of(&self, entity: Entity) -> Option<EdgeId> {
        self.roles
            .iter()
            .position(|r| r.entity == entity)
            .map(EdgeId)
    }

    /// Flow on the edge standing for `entity` (zero if it was pruned).
    pub fn flow_of(&self, entity: Entity, flow: &[f64]) -> f64 {
        self.edge_of(entity).map(|e| flow[e.0]).unwrap_or(0.0)
    }

    /// Non-zero flows on non-auxiliary edges.
    pub fn entity_flows(&self, flow: &[f64]) -> Vec<(Entity, f64)> {
        let tol = self.network.flow_tolerance();
        let mut out: Vec<_> = self
            .network
            .edge_ids()
            .filter(|e| !self.roles[e.0].auxiliary && flow[e.0] > tol)
            .map(|e| (self.roles[e.0].entity, flow[e.0]))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn depth(&self) -> u32 {
        self.network.depth()
    }

    pub fn to_key_value(&self, flow: &[f64]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "map.depth: {}", self.depth());
        let _ = writeln!(out, "map.objective: {}", num(self.objective(flow)));
        let _ = writeln!(out, "map.aux_weight: {}", num(self.aux_weight));
        let _ = writeln!(out, "map.aux_edges: {}", self.aux_edges);
        let _ = writeln!(out, "map.aux_slack: {}", num(self.aux_slack));
        for (entity, amount) in self.entity_flows(flow) {
            let _ = writeln!(out, "map.{}: {}", entity.key(), num(amount));
        }
        for note in &self.notes {
            let _ = writeln!(out, "map.note: {note}");
        }
        out
    }
}

/// Collects edges with their roles, then builds the network.
struct Assembly {
    source: String,
    sink: String,
    edges: Vec<(String, String, f64, WeightFunction)>,
    roles: Vec<EdgeRole>,
}

impl Assembly {
    fn new(source: &str, sink: &str) -> Assembly {
        Assembly {
            source: source.to_string(),
            sink: sink.to_string(),
            edges: Vec::new(),
            roles: Vec::new(),
        }
    }

    fn edge(&mut self, u: &str, v: &str, cap: f64, wf: WeightFunction, role: EdgeRole) {
        self.edges.push((u.to_string(), v.to_string(), cap, wf));
        self.roles.push(role);
    }

    fn carrier(&mut self, u: &str, v: &str, cap: f64, wf: WeightFunction, entity: Entity) {
        self.edge(
            u,
            v,
            cap,
            wf,
            EdgeRole {
                entity,
                counted: true,
                auxiliary: false,
            },
        );
    }

    fn aux(&mut self, u: &str, v: &str, cap: f64, entity: Entity) {
        // Weight filled in by `finish`.
        self.edge(
            u,
            v,
            cap,
            WeightFunction::linear(0.0, cap),
            EdgeRole {
                entity,
                counted: false,
                auxiliary: true,
            },
        );
    }

    fn aux_count(&self) -> usize {
        self.roles.iter().filter(|r| r.auxiliary).count()
    }

    fn finish(
        self,
        aux_weight: f64,
        transform: ObjectiveTransform,
        signed: bool,
    ) -> Result<ReductionMap, ReductionError> {
        let mut builder = NetworkBuilder::with_terminals(&self.source, &self.sink);
        builder.set_signed(signed);
        let mut aux_slack = 0.0;
        for ((u, v, cap, wf), role) in self.edges.into_iter().zip(&self.roles) {
            if role.auxiliary {
                aux_slack += aux_weight * cap;
                builder.edge(&u, &v, cap, WeightFunction::linear(aux_weight, cap));
            } else {
                builder.edge(&u, &v, cap, wf);
            }
        }
        let aux_edges = self.roles.iter().filter(|r| r.auxiliary).count();
        let network = builder.build()?;
        let mut by_edge = vec![None; network.edge_count()];
        for (i, role) in self.roles.into_iter().enumerate() {
            if let Some(e) = network.edge_by_input(i) {
                by_edge[e.0] = Some(role);
            }
        }
        Ok(ReductionMap {
            network,
            roles: by_edge
                .into_iter()
                .map(|r| r.expect("every edge has a role"))
                .collect(),
            transform,
            aux_weight,
            aux_edges,
            aux_slack,
            notes: Vec::new(),
        })
    }
}

fn positive(what: &'static str, index: usize, value: f64) -> Result<(), ReductionError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ReductionError::Capacity { what, index, value })
    }
}

fn positive_weight(what: &'static str, index: usize, value: f64) -> Result<(), ReductionError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ReductionError::Weight { what, index, value })
    }
}

fn check_index(what: &'static str, index: usize, target: usize, len: usize) -> Result<(), ReductionError> {
    if target < len {
        Ok(())
    } else {
        Err(ReductionError::Index { what, index, target })
    }
}

/// One admissible pair of a (b-)matching instance.
#[derive(Debug, Clone)]
pub struct AssignmentPair {
    pub left: usize,
    pub right: usize,
    pub capacity: f64,
    pub utility: WeightFunction,
}

impl AssignmentPair {
    /// Unit-capacity pair with a linear weight.
    pub fn linear(left: usize, right: usize, weight: f64) -> AssignmentPair {
        AssignmentPair {
            left,
            right,
            capacity: 1.0,
            utility: WeightFunction::linear(weight, 1.0),
        }
    }
}

/// `s → left → right → t`, with side capacities on the `s` and `t` edges.
pub fn assignment_to_network(
    left_caps: &[f64],
    right_caps: &[f64],
    pairs: &[AssignmentPair],
    aux: AuxWeight,
) -> Result<ReductionMap, ReductionError> {
    if pairs.is_empty() {
        return Err(ReductionError::Empty("no pairs"));
    }
    for (i, &c) in left_caps.iter().enumerate() {
        positive("left", i, c)?;
    }
    for (i, &c) in right_caps.iter().enumerate() {
        positive("right", i, c)?;
    }
    let mut w_min = f64::INFINITY;
    for (i, p) in pairs.iter().enumerate() {
        check_index("pair", i, p.left, left_caps.len())?;
        check_index("pair", i, p.right, right_caps.len())?;
        positive("pair", i, p.capacity)?;
        let (lo, _) = p.utility.gradient_range();
        positive_weight("pair", i, lo)?;
        w_min = w_min.min(lo);
    }
    let mut asm = Assembly::new("s", "t");
    for (i, &c) in left_caps.iter().enumerate() {
        asm.aux("s", &format!("l{i}"), c, Entity::Left(i));
    }
    for (i, p) in pairs.iter().enumerate() {
        let wf = p
            .utility
            .clone()
            .with_domain(p.capacity)
            .map_err(|source| ReductionError::SourceFunction { index: i, source })?;
        asm.carrier(
            &format!("l{}", p.left),
            &format!("r{}", p.right),
            p.capacity,
            wf,
            Entity::Pair(i),
        );
    }
    for (i, &c) in right_caps.iter().enumerate() {
        asm.aux(&format!("r{i}"), "t", c, Entity::Right(i));
    }
    let w = aux.resolve(w_min, asm.aux_count())?;
    asm.finish(w, ObjectiveTransform::Identity, false)
}

/// Tuples `(x, y, z)` with `xy ∈ E_XY`, `yz ∈ E_YZ`, each element used at
/// most once; a tuple is worth the sum of its two edge weights.
///
/// Layout: `s → x → y_in → y_out → z → t`. Only `y` needs an explicit
/// in/out split; the unit `s → x` and `z → t` edges bound `x` and `z`.
pub fn chained_matching_to_network(
    sizes: (usize, usize, usize),
    xy: &[(usize, usize, f64)],
    yz: &[(usize, usize, f64)],
    aux: AuxWeight,
) -> Result<ReductionMap, ReductionError> {
    if xy.is_empty() || yz.is_empty() {
        return Err(ReductionError::Empty("no tuples"));
    }
    let (nx, ny, nz) = sizes;
    let mut w_min = f64::INFINITY;
    for (i, &(x, y, w)) in xy.iter().enumerate() {
        check_index("xy edge", i, x, nx)?;
        check_index("xy edge", i, y, ny)?;
        positive_weight("xy edge", i, w)?;
        w_min = w_min.min(w);
    }
    for (i, &(y, z, w)) in yz.iter().enumerate() {
        check_index("yz edge", i, y, ny)?;
        check_index("yz edge", i, z, nz)?;
        positive_weight("yz edge", i, w)?;
        w_min = w_min.min(w);
    }
    let mut asm = Assembly::new("s", "t");
    for i in 0..nx {
        asm.aux("s", &format!("x{i}"), 1.0, Entity::ElementX(i));
    }
    for (i, &(x, y, w)) in xy.iter().enumerate() {
        asm.carrier(
            &format!("x{x}"),
            &format!("y{y}_in"),
            1.0,
            WeightFunction::linear(w, 1.0),
            Entity::XyEdge(i),
        );
    }
    for i in 0..ny {
        asm.aux(&format!("y{i}_in"), &format!("y{i}_out"), 1.0, Entity::ElementY(i));
    }
    for (i, &(y, z, w)) in yz.iter().enumerate() {
        asm.carrier(
            &format!("y{y}_out"),
            &format!("z{z}"),
            1.0,
            WeightFunction::linear(w, 1.0),
            Entity::YzEdge(i),
        );
    }
    for i in 0..nz {
        asm.aux(&format!("z{i}"), "t", 1.0, Entity::ElementZ(i));
    }
    let w = aux.resolve(w_min, asm.aux_count())?;
    asm.finish(w, ObjectiveTransform::Identity, false)
}

/// A job occupying days `start..=end` (1-based) and worth `gain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub start: usize,
    pub end: usize,
    pub gain: f64,
}

/// Days form a path `d_1 → … → d_{n+1}` whose edge `d_i → d_{i+1}` has
/// capacity `u_i`. Job `j` takes one unit from `s`, then either enters the
/// path at `d_{start}` (earning its gain) or skips straight to `d_{end+1}`.
/// `d_k → t` has capacity equal to the number of jobs with `end + 1 = k`.
///
/// Those exit capacities only pin down the path load when every job sends
/// its unit, so each intake edge `s → j` carries a participation weight
/// larger than all gains combined. The application objective ignores it.
pub fn scheduling_to_network(
    jobs: &[Job],
    day_caps: &[f64],
    aux: AuxWeight,
) -> Result<ReductionMap, ReductionError> {
    if jobs.is_empty() {
        return Err(ReductionError::Empty("no jobs"));
    }
    let days = day_caps.len();
    for (i, &c) in day_caps.iter().enumerate() {
        positive("day", i + 1, c)?;
    }
    let mut w_min = f64::INFINITY;
    for (j, job) in jobs.iter().enumerate() {
        if job.start < 1 || job.start > job.end || job.end > days {
            return Err(ReductionError::Window {
                job: j,
                start: job.start,
                end: job.end,
                days,
            });
        }
        positive_weight("job", j, job.gain)?;
        w_min = w_min.min(job.gain);
    }
    let participation = 1.0 + jobs.iter().map(|j| j.gain).sum::<f64>();
    let day = |k: usize| format!("d{k}");
    let mut asm = Assembly::new("s", "t");
    for (j, job) in jobs.iter().enumerate() {
        asm.edge(
            "s",
            &format!("j{j}"),
            1.0,
            WeightFunction::linear(participation, 1.0),
            EdgeRole {
                entity: Entity::JobIntake(j),
                counted: false,
                auxiliary: false,
            },
        );
        asm.carrier(
            &format!("j{j}"),
            &day(job.start),
            1.0,
            WeightFunction::linear(job.gain, 1.0),
            Entity::JobScheduled(j),
        );
        asm.aux(&format!("j{j}"), &day(job.end + 1), 1.0, Entity::JobSkipped(j));
    }
    for (i, &c) in day_caps.iter().enumerate() {
        asm.aux(&day(i + 1), &day(i + 2), c, Entity::Day(i + 1));
    }
    for k in 2..=days + 1 {
        let ending = jobs.iter().filter(|j| j.end + 1 == k).count();
        if ending > 0 {
            asm.aux(&day(k), "t", ending as f64, Entity::DayExit(k));
        }
    }
    let w = aux.resolve(w_min, asm.aux_count())?;
    let mut map = asm.finish(w, ObjectiveTransform::Identity, false)?;
    map.notes.push(format!(
        "intake edges carry participation weight {} so every job sends its unit",
        num(participation)
    ));
    Ok(map)
}

/// Schedule read off a flow on a scheduling network.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub jobs: Vec<usize>,
    pub gain: f64,
    /// Jobs dropped to restore day capacities.
    pub dropped: Vec<usize>,
}

/// Jobs whose scheduled edge carries flow, dropping the lowest-gain jobs on
/// any overloaded day. Flows that send every job's unit never need a drop.
pub fn schedule_from_flow(map: &ReductionMap, jobs: &[Job], day_caps: &[f64], flow: &[f64]) -> Schedule {
    let mut chosen: Vec<usize> = (0..jobs.len())
        .filter(|&j| map.flow_of(Entity::JobScheduled(j), flow) > 0.5)
        .collect();
    let mut dropped = Vec::new();
    loop {
        let overloaded = (1..=day_caps.len()).find(|&d| {
            let load = chosen
                .iter()
                .filter(|&&j| jobs[j].start <= d && d <= jobs[j].end)
                .count() as f64;
            load > day_caps[d - 1] + 1e-9
        });
        let Some(d) = overloaded else { break };
        let (pos, _) = chosen
            .iter()
            .enumerate()
            .filter(|(_, &j)| jobs[j].start <= d && d <= jobs[j].end)
            .min_by(|a, b| jobs[*a.1].gain.total_cmp(&jobs[*b.1].gain))
            .expect("an overloaded day has a job");
        dropped.push(chosen.remove(pos));
    }
    let gain = chosen.iter().map(|&j| jobs[j].gain).sum();
    Schedule {
        jobs: chosen,
        gain,
        dropped,
    }
}

/// `min Σ q_e x_e − Q·f` as a signed max-weight instance: weights `−q_e`
/// plus an edge `t → t'` of weight `Q`.
pub fn mincost_with_reward(net: &Network, reward: f64) -> Result<ReductionMap, ReductionError> {
    if !(reward > 0.0 && reward.is_finite()) {
        return Err(ReductionError::Reward(reward));
    }
    let sink = net.name(net.sink()).to_string();
    let new_sink = format!("{sink}'");
    let mut asm = Assembly::new(net.name(net.source()), &new_sink);
    for e in net.edge_ids() {
        let edge = net.edge(e);
        let q = edge
            .weight
            .linear_weight()
            .ok_or(ReductionError::Weight {
                what: "edge",
                index: edge.input_index,
                value: f64::NAN,
            })?;
        positive_weight("edge", edge.input_index, q)?;
        asm.carrier(
            net.name(edge.tail),
            net.name(edge.head),
            edge.capacity,
            WeightFunction::linear(-q, edge.capacity),
            Entity::CostEdge(edge.input_index),
        );
    }
    let cap: f64 = net
        .out_edges(net.source())
        .iter()
        .map(|e| net.edge(*e).capacity)
        .sum();
    asm.carrier(
        &sink,
        &new_sink,
        cap,
        WeightFunction::linear(reward, cap),
        Entity::Reward,
    );
    asm.finish(0.0, ObjectiveTransform::Negate, true)
}

/// Multi-source instance: interior edges plus one concave utility per source.
#[derive(Debug, Clone)]
pub struct MultiSource {
    pub sink: String,
    /// `(tail, head, capacity)`.
    pub edges: Vec<(String, String, f64)>,
    /// `(vertex, f_i)`.
    pub sources: Vec<(String, WeightFunction)>,
}

/// Super-source `S` with `S → s_i` carrying `f_i`, capacity the largest flow
/// `s_i` can send to the sink alone. Interior edges become auxiliary.
pub fn multisource_concave_to_network(
    inst: &MultiSource,
    aux: AuxWeight,
) -> Result<ReductionMap, ReductionError> {
    if inst.sources.is_empty() {
        return Err(ReductionError::Empty("no sources"));
    }
    if inst.edges.is_empty() {
        return Err(ReductionError::Empty("no edges"));
    }
    for (i, e) in inst.edges.iter().enumerate() {
        positive("edge", i, e.2)?;
    }
    let super_source = "S";
    let mut asm = Assembly::new(super_source, &inst.sink);
    let mut w_min = f64::INFINITY;
    for (i, (v, f)) in inst.sources.iter().enumerate() {
        let cap = max_flow(&inst.edges, v, &inst.sink);
        if cap <= 0.0 {
            return Err(ReductionError::Unreachable(i));
        }
        let wf = f
            .clone()
            .with_domain(cap)
            .map_err(|source| ReductionError::SourceFunction { index: i, source })?;
        let (lo, _) = wf.gradient_range();
        if !(lo > 0.0) {
            return Err(ReductionError::Weight {
                what: "source",
                index: i,
                value: lo,
            });
        }
        w_min = w_min.min(lo);
        asm.carrier(super_source, v, cap, wf, Entity::Source(i));
    }
    for (i, (u, v, c)) in inst.edges.iter().enumerate() {
        asm.aux(u, v, *c, Entity::Interior(i));
    }
    let w = aux.resolve(w_min, asm.aux_count())?;
    asm.finish(w, ObjectiveTransform::Identity, false)
}

/// Maximum `from → to` flow over `(tail, head, capacity)` edges.
pub fn max_flow(edges: &[(String, String, f64)], from: &str, to: &str) -> f64 {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut arcs: Vec<(usize, usize, f64)> = Vec::new();
    for (u, v, c) in edges {
        let next = index.len();
        let a = *index.entry(u.as_str()).or_insert(next);
        let next = index.len();
        let b = *index.entry(v.as_str()).or_insert(next);
        arcs.push((a, b, *c));
        arcs.push((b, a, 0.0));
    }
    let (Some(&s), Some(&t)) = (index.get(from), index.get(to)) else {
        return 0.0;
    };
    let n = index.len();
    let mut adj = vec![Vec::new(); n];
    for (i, a) in arcs.iter().enumerate() {
        adj[a.0].push(i);
    }
    let mut total = 0.0;
    loop {
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &i in &adj[u] {
                let (_, v, c) = arcs[i];
                if c > 1e-12 && !seen[v] {
                    seen[v] = true;
                    pred[v] = Some(i);
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return total;
        }
        let mut amount = f64::INFINITY;
        let mut v = t;
        while let Some(i) = pred[v] {
            amount = amount.min(arcs[i].2);
            v = arcs[i].0;
        }
        let mut v = t;
        while let Some(i) = pred[v] {
            arcs[i].2 -= amount;
            arcs[i ^ 1].2 += amount;
            v = arcs[i].0;
        }
        total += amount;
    }
}
