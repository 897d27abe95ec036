//! Seeded benchmark sweeps. Instances run on the rayon pool; rows come out
//! in instance order and carry no timings, so the CSV is reproducible.

use std::fmt::Write as _;

use clap::ValueEnum;
use rayon::prelude::*;

use cflow::format::num;
use cflow::instances::{random_linear, random_pwl_grid, random_quadratic, InstanceParams};
use cflow::network::Network;
use cflow::solver::{solve, Algorithm, AuditMode, NoTrace, SolveOptions};
use cflow::verify::{certify_with, OracleCaps, Status};

use crate::pick_algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Class {
    Linear,
    Unit,
    Signed,
    Pwl,
    Quadratic,
    Tiny,
}

impl Class {
    fn instance(self, seed: u64) -> Network {
        match self {
            Class::Linear => random_linear(seed, &InstanceParams::default()),
            Class::Unit => random_linear(seed, &InstanceParams::unit()),
            Class::Signed => random_linear(seed, &InstanceParams::signed()),
            Class::Pwl => random_pwl_grid(seed, &InstanceParams::default()),
            Class::Quadratic => random_quadratic(seed, &InstanceParams::default()),
            Class::Tiny => random_linear(seed, &InstanceParams::tiny()),
        }
    }
}

pub const HEADER: &str = "index,seed,vertices,edges,depth,algorithm,objective,iterations,scales,violations,reference,ratio,status";

pub fn run(
    class: Class,
    count: u64,
    seed: u64,
    algo: Option<Algorithm>,
    eps: f64,
    audit: AuditMode,
    caps: Option<&OracleCaps>,
) -> String {
    let rows: Vec<String> = (0..count)
        .into_par_iter()
        .map(|i| row(class, i, seed.wrapping_add(i), algo, eps, audit, caps))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    for r in rows {
        let _ = writeln!(out, "{r}");
    }
    out
}

fn row(
    class: Class,
    index: u64,
    seed: u64,
    algo: Option<Algorithm>,
    eps: f64,
    audit: AuditMode,
    caps: Option<&OracleCaps>,
) -> String {
    let net = class.instance(seed);
    let algorithm = pick_algorithm(algo, &net);
    let head = format!(
        "{index},{seed},{},{},{},{algorithm}",
        net.vertex_count(),
        net.edge_count(),
        net.depth()
    );
    let options = SolveOptions::default().audit(audit);
    let r = match solve(&net, algorithm, eps, &options, &mut NoTrace) {
        Ok(r) => r,
        Err(e) => return format!("{head},,,,,,,error: {}", e.to_string().replace(',', ";")),
    };
    let (reference, ratio, status) = match caps {
        None => (String::new(), String::new(), "unchecked".to_string()),
        Some(caps) => {
            let cert = certify_with(&r, &net, eps, caps);
            let status = match &cert.status {
                Status::Pass => "pass".to_string(),
                Status::Fail => "fail".to_string(),
                Status::Uncertified(why) => format!("uncertified: {why}"),
            };
            (
                cert.reference.map(num).unwrap_or_default(),
                cert.ratio().map(num).unwrap_or_default(),
                status,
            )
        }
    };
    format!(
        "{head},{},{},{},{},{reference},{ratio},{status}",
        num(r.objective),
        r.iterations(),
        r.scale_iterations.len(),
        r.audit.violations()
    )
}
