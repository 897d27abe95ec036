//! Input formats for the `reduce` sub-commands.
//!
//! All formats are line based, `#` starts a comment, and indices are
//! 0-based unless a format says otherwise.
//!
//! ```text
//! # assignment
//! left <capacity>                 one line per left vertex
//! right <capacity>                one line per right vertex
//! pair <left> <right> <weight> [<capacity>]
//!
//! # chained
//! sizes <nx> <ny> <nz>
//! xy <x> <y> <weight>
//! yz <y> <z> <weight>
//!
//! # scheduling (days are 1-based)
//! days <u_1> ... <u_n>
//! job <start> <end> <gain>
//!
//! # multisource
//! sink <vertex>
//! source <vertex> lin <a>
//! source <vertex> quad <a> <b>    gradient a - 2bx
//! e <tail> <head> <capacity>
//! ```

use anyhow::{anyhow, bail, Context, Result};

use cflow::reductions::{AssignmentPair, Job, MultiSource};
use cflow::weights::WeightFunction;

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then(|| (i + 1, content.split_whitespace().collect()))
    })
}

fn arg<T: std::str::FromStr>(line: usize, toks: &[&str], i: usize, what: &str) -> Result<T> {
    let tok = toks
        .get(i)
        .ok_or_else(|| anyhow!("line {line}: missing {what}"))?;
    tok.parse()
        .map_err(|_| anyhow!("line {line}: invalid {what} `{tok}`"))
}

fn arity(line: usize, toks: &[&str], range: std::ops::RangeInclusive<usize>) -> Result<()> {
    if !range.contains(&toks.len()) {
        bail!("line {line}: `{}` takes {} arguments", toks[0], range.start() - 1);
    }
    Ok(())
}

pub struct Assignment {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub pairs: Vec<AssignmentPair>,
}

pub fn parse_assignment(text: &str) -> Result<Assignment> {
    let mut out = Assignment {
        left: Vec::new(),
        right: Vec::new(),
        pairs: Vec::new(),
    };
    for (line, toks) in lines(text) {
        match toks[0] {
            "left" => {
                arity(line, &toks, 2..=2)?;
                out.left.push(arg(line, &toks, 1, "capacity")?);
            }
            "right" => {
                arity(line, &toks, 2..=2)?;
                out.right.push(arg(line, &toks, 1, "capacity")?);
            }
            "pair" => {
                arity(line, &toks, 4..=5)?;
                let mut pair = AssignmentPair::linear(
                    arg(line, &toks, 1, "left index")?,
                    arg(line, &toks, 2, "right index")?,
                    arg(line, &toks, 3, "weight")?,
                );
                if toks.len() == 5 {
                    let cap: f64 = arg(line, &toks, 4, "capacity")?;
                    let w: f64 = arg(line, &toks, 3, "weight")?;
                    pair.capacity = cap;
                    pair.utility = WeightFunction::linear(w, cap);
                }
                out.pairs.push(pair);
            }
            other => bail!("line {line}: unknown directive `{other}`"),
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct Chained {
    pub sizes: (usize, usize, usize),
    pub xy: Vec<(usize, usize, f64)>,
    pub yz: Vec<(usize, usize, f64)>,
}

pub fn parse_chained(text: &str) -> Result<Chained> {
    let mut sizes = None;
    let mut xy = Vec::new();
    let mut yz = Vec::new();
    for (line, toks) in lines(text) {
        match toks[0] {
            "sizes" => {
                arity(line, &toks, 4..=4)?;
                sizes = Some((
                    arg(line, &toks, 1, "size")?,
                    arg(line, &toks, 2, "size")?,
                    arg(line, &toks, 3, "size")?,
                ));
            }
            "xy" | "yz" => {
                arity(line, &toks, 4..=4)?;
                let edge = (
                    arg(line, &toks, 1, "index")?,
                    arg(line, &toks, 2, "index")?,
                    arg(line, &toks, 3, "weight")?,
                );
                if toks[0] == "xy" {
                    xy.push(edge);
                } else {
                    yz.push(edge);
                }
            }
            other => bail!("line {line}: unknown directive `{other}`"),
        }
    }
    Ok(Chained {
        sizes: sizes.context("missing `sizes` line")?,
        xy,
        yz,
    })
}

#[derive(Debug)]
pub struct Scheduling {
    pub day_caps: Vec<f64>,
    pub jobs: Vec<Job>,
}

pub fn parse_scheduling(text: &str) -> Result<Scheduling> {
    let mut day_caps = None;
    let mut jobs = Vec::new();
    for (line, toks) in lines(text) {
        match toks[0] {
            "days" => {
                if toks.len() < 2 {
                    bail!("line {line}: `days` needs at least one capacity");
                }
                let caps = (1..toks.len())
                    .map(|i| arg(line, &toks, i, "day capacity"))
                    .collect::<Result<Vec<f64>>>()?;
                day_caps = Some(caps);
            }
            "job" => {
                arity(line, &toks, 4..=4)?;
                jobs.push(Job {
                    start: arg(line, &toks, 1, "start day")?,
                    end: arg(line, &toks, 2, "end day")?,
                    gain: arg(line, &toks, 3, "gain")?,
                });
            }
            other => bail!("line {line}: unknown directive `{other}`"),
        }
    }
    Ok(Scheduling {
        day_caps: day_caps.context("missing `days` line")?,
        jobs,
    })
}

pub fn parse_multisource(text: &str) -> Result<MultiSource> {
    let mut sink = None;
    let mut edges = Vec::new();
    let mut sources = Vec::new();
    for (line, toks) in lines(text) {
        match toks[0] {
            "sink" => {
                arity(line, &toks, 2..=2)?;
                sink = Some(toks[1].to_string());
            }
            "e" => {
                arity(line, &toks, 4..=4)?;
                edges.push((
                    toks[1].to_string(),
                    toks[2].to_string(),
                    arg(line, &toks, 3, "capacity")?,
                ));
            }
            "source" => {
                arity(line, &toks, 4..=5)?;
                // The reduction replaces the domain with the source's
                // max-flow value.
                let placeholder = 1e-12;
                let wf = match toks[2] {
                    "lin" => {
                        arity(line, &toks, 4..=4)?;
                        WeightFunction::linear(arg(line, &toks, 3, "gradient")?, placeholder)
                    }
                    "quad" => {
                        arity(line, &toks, 5..=5)?;
                        WeightFunction::quadratic(
                            arg(line, &toks, 3, "coefficient a")?,
                            arg(line, &toks, 4, "coefficient b")?,
                            placeholder,
                        )
                        .map_err(|e| anyhow!("line {line}: {e}"))?
                    }
                    other => bail!("line {line}: unknown source family `{other}`"),
                };
                sources.push((toks[1].to_string(), wf));
            }
            other => bail!("line {line}: unknown directive `{other}`"),
        }
    }
    Ok(MultiSource {
        sink: sink.context("missing `sink` line")?,
        edges,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_with_comments() {
        let a = parse_assignment("# two by one\nleft 1\nleft 2\nright 1\npair 0 0 5\npair 1 0 3 2\n")
            .unwrap();
        assert_eq!(a.left, vec![1.0, 2.0]);
        assert_eq!(a.pairs.len(), 2);
        assert_eq!(a.pairs[1].capacity, 2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_scheduling("days 1 1\njob 1 x 3\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2: invalid end day `x`");
        let err = parse_chained("xy 0 0 1\n").unwrap_err();
        assert_eq!(err.to_string(), "missing `sizes` line");
    }

    #[test]
    fn multisource_sources() {
        let m = parse_multisource("sink t\nsource a quad 4 1\nsource b lin 2\ne a t 1\ne b t 1\n")
            .unwrap();
        assert_eq!(m.sources.len(), 2);
        assert_eq!(m.edges.len(), 2);
    }
}
