use std::fmt::Write as _;

use cflow::format::num;
use cflow::network::Network;
use cflow::solver::{IterationRecord, SolveResult};

pub fn summary(out: &mut String, net: &Network, r: &SolveResult, eps: f64) {
    let scales: Vec<String> = r.scale_iterations.iter().map(u64::to_string).collect();
    let _ = writeln!(out, "algorithm: {}", r.algorithm);
    let _ = writeln!(out, "eps: {}", num(eps));
    let _ = writeln!(out, "grid_eps: {}", num(r.grid.eps()));
    let _ = writeln!(out, "grid_unit: {}", num(r.grid.unit()));
    let _ = writeln!(out, "vertices: {}", net.vertex_count());
    let _ = writeln!(out, "edges: {}", net.edge_count());
    let _ = writeln!(out, "depth: {}", net.depth());
    let _ = writeln!(out, "scales: {}", r.scale_iterations.len());
    let _ = writeln!(out, "scale_iterations: {}", scales.join(" "));
    let _ = writeln!(out, "iterations: {}", r.iterations());
    let _ = writeln!(out, "objective: {}", num(r.objective));
    let _ = writeln!(out, "flow_value: {}", num(r.flow_value(net)));
}

pub fn trace(out: &mut String, records: &[IterationRecord]) {
    for rec in records {
        let _ = writeln!(out, "trace {rec}");
    }
}

/// `f <u> <v> <amount>` per edge, in input order.
pub fn flow_lines(out: &mut String, net: &Network, flow: &[f64]) {
    let mut ids: Vec<_> = net.edge_ids().collect();
    ids.sort_by_key(|&e| net.edge(e).input_index);
    for e in ids {
        let edge = net.edge(e);
        let _ = writeln!(
            out,
            "f {} {} {}",
            net.name(edge.tail),
            net.name(edge.head),
            num(flow[e.0])
        );
    }
}
