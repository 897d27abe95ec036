//! `cflow` command-line front end.
//!
//! Exit status: 0 on success, 1 when a certificate or invariant audit
//! fails, 2 on input errors.

mod bench;
mod formats;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cflow::network::{parse_network, Network};
use cflow::reductions::{
    assignment_to_network, chained_matching_to_network, mincost_with_reward,
    multisource_concave_to_network, schedule_from_flow, scheduling_to_network, AuxWeight,
    ReductionMap,
};
use cflow::solver::{solve, Algorithm, AuditMode, IterationRecord, SolveError, SolveOptions, SolveResult};
use cflow::verify::{certify_with, OracleCaps, OracleError, Status};

#[derive(Parser)]
#[command(name = "cflow", version, about = "Approximate maximum-weight flow on small-depth DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a network and print the flow, audit and (optionally) certificate.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve a network and print only the audit and certificate blocks.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build an application network, solve it and map the flow back.
    Reduce {
        #[arg(value_enum)]
        kind: ReductionKind,
        input: PathBuf,
        /// Reward per unit of flow (min-cost only).
        #[arg(long)]
        reward: Option<f64>,
        /// Fixed weight for auxiliary edges instead of `eps·w_min/count`.
        #[arg(long)]
        aux_weight: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve seeded random instances and print one CSV row per instance.
    Bench {
        #[arg(long, value_enum, default_value_t = bench::Class::Linear)]
        class: bench::Class,
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// simple, scaling or concave. Defaults to concave for non-linear
    /// inputs and scaling otherwise.
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long, default_value_t = 0.0625)]
    eps: f64,
    /// every-iteration, per-scale or off.
    #[arg(long, default_value = "every-iteration")]
    audit: AuditMode,
    /// Compare against the exact oracle and print a certificate.
    #[arg(long)]
    oracle: bool,
    /// Print one line per iteration.
    #[arg(long)]
    trace: bool,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionKind {
    Assignment,
    Chained,
    Scheduling,
    Mincost,
    Multisource,
}

enum CliError {
    /// Bad input or configuration: exit 2.
    Input(anyhow::Error),
    /// The solver itself failed: exit 1.
    Failure(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

struct Report {
    text: String,
    failed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match &cli.command {
        Command::Solve { run, .. }
        | Command::Verify { run, .. }
        | Command::Reduce { run, .. }
        | Command::Bench { run, .. } => run.output.clone(),
    };
    match execute(cli.command) {
        Ok(report) => {
            if let Err(e) = emit(output.as_deref(), &report.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            ExitCode::from(if report.failed { 1 } else { 0 })
        }
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<Report, CliError> {
    match command {
        Command::Solve { input, run } => {
            let net = read_network(&input)?;
            solve_and_report(&net, &run, true)
        }
        Command::Verify { input, run } => {
            let net = read_network(&input)?;
            solve_and_report(&net, &run, false)
        }
        Command::Reduce {
            kind,
            input,
            reward,
            aux_weight,
            run,
        } => reduce(kind, &input, reward, aux_weight, &run),
        Command::Bench {
            class,
            count,
            seed,
            run,
        } => {
            check_eps(run.eps)?;
            let caps = oracle_caps(&run)?;
            let text = bench::run(class, count, seed, run.algo, run.eps, run.audit, caps.as_ref());
            Ok(Report {
                text,
                failed: false,
            })
        }
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_network(path: &Path) -> anyhow::Result<Network> {
    let text = read_text(path)?;
    parse_network(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_eps(eps: f64) -> anyhow::Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(anyhow!("eps must lie in (0, 1), got {eps}"))
    }
}

fn oracle_caps(run: &RunArgs) -> anyhow::Result<Option<OracleCaps>> {
    if run.oracle {
        Ok(Some(OracleCaps::from_env()?))
    } else {
        Ok(None)
    }
}

pub fn pick_algorithm(algo: Option<Algorithm>, net: &Network) -> Algorithm {
    algo.unwrap_or(if net.all_linear() {
        Algorithm::Scaling
    } else {
        Algorithm::Concave
    })
}

fn run_solver(
    net: &Network,
    run: &RunArgs,
) -> Result<(SolveResult, Vec<IterationRecord>), CliError> {
    check_eps(run.eps)?;
    let algorithm = pick_algorithm(run.algo, net);
    let options = SolveOptions::default().audit(run.audit);
    let mut trace = Vec::new();
    let result = if run.trace {
        solve(net, algorithm, run.eps, &options, &mut trace)
    } else {
        solve(net, algorithm, run.eps, &options, &mut cflow::solver::NoTrace)
    };
    match result {
        Ok(r) => Ok((r, trace)),
        Err(e @ SolveError::Internal(_)) => Err(CliError::Failure(e.into())),
        Err(e) => Err(CliError::Input(e.into())),
    }
}

/// Appends audit and certificate blocks; returns whether either failed.
fn checks(out: &mut String, net: &Network, r: &SolveResult, run: &RunArgs) -> Result<bool, CliError> {
    let mut failed = false;
    out.push_str(&r.audit.to_key_value(net));
    if r.audit.violations() > 0 {
        failed = true;
    }
    if let Some(caps) = oracle_caps(run)? {
        let cert = certify_with(r, net, run.eps, &caps);
        if cert.status == Status::Uncertified("oracle cap".to_string()) {
            let err = OracleError::CapExceeded {
                edges: net.edge_count(),
                capacity: net.total_capacity(),
            };
            return Err(CliError::Input(err.into()));
        }
        out.push_str(&cert.to_key_value());
        failed |= cert.failed();
    }
    Ok(failed)
}

fn solve_and_report(net: &Network, run: &RunArgs, with_flow: bool) -> Result<Report, CliError> {
    let (r, trace) = run_solver(net, run)?;
    let mut text = String::new();
    report::summary(&mut text, net, &r, run.eps);
    report::trace(&mut text, &trace);
    if with_flow {
        report::flow_lines(&mut text, net, &r.flow);
    }
    let failed = checks(&mut text, net, &r, run)?;
    Ok(Report { text, failed })
}

fn reduce(
    kind: ReductionKind,
    input: &Path,
    reward: Option<f64>,
    aux_weight: Option<f64>,
    run: &RunArgs,
) -> Result<Report, CliError> {
    check_eps(run.eps)?;
    let aux = match aux_weight {
        Some(w) => AuxWeight::Fixed(w),
        None => AuxWeight::Auto { eps: run.eps },
    };
    if reward.is_some() && !matches!(kind, ReductionKind::Mincost) {
        return Err(anyhow!("--reward only applies to the mincost reduction").into());
    }
    let mut schedule_input = None;
    let map: ReductionMap = match kind {
        ReductionKind::Assignment => {
            let a = formats::parse_assignment(&read_text(input)?)?;
            assignment_to_network(&a.left, &a.right, &a.pairs, aux).map_err(anyhow::Error::from)?
        }
        ReductionKind::Chained => {
            let c = formats::parse_chained(&read_text(input)?)?;
            chained_matching_to_network(c.sizes, &c.xy, &c.yz, aux).map_err(anyhow::Error::from)?
        }
        ReductionKind::Scheduling => {
            let s = formats::parse_scheduling(&read_text(input)?)?;
            let map =
                scheduling_to_network(&s.jobs, &s.day_caps, aux).map_err(anyhow::Error::from)?;
            schedule_input = Some(s);
            map
        }
        ReductionKind::Mincost => {
            let reward = reward.ok_or_else(|| anyhow!("mincost needs --reward"))?;
            let net = read_network(input)?;
            mincost_with_reward(&net, reward).map_err(anyhow::Error::from)?
        }
        ReductionKind::Multisource => {
            let m = formats::parse_multisource(&read_text(input)?)?;
            multisource_concave_to_network(&m, aux).map_err(anyhow::Error::from)?
        }
    };
    let net = &map.network;
    let (r, trace) = run_solver(net, run)?;
    let mut text = String::new();
    report::summary(&mut text, net, &r, run.eps);
    report::trace(&mut text, &trace);
    report::flow_lines(&mut text, net, &r.flow);
    text.push_str(&map.to_key_value(&r.flow));
    if let Some(s) = schedule_input {
        let schedule = schedule_from_flow(&map, &s.jobs, &s.day_caps, &r.flow);
        let list = |xs: &[usize]| {
            if xs.is_empty() {
                "none".to_string()
            } else {
                xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
            }
        };
        text.push_str(&format!("schedule.jobs: {}\n", list(&schedule.jobs)));
        text.push_str(&format!("schedule.gain: {}\n", cflow::format::num(schedule.gain)));
        text.push_str(&format!("schedule.dropped: {}\n", list(&schedule.dropped)));
    }
    let failed = checks(&mut text, net, &r, run)?;
    Ok(Report { text, failed })
}
