//! Line-based text format.
//!
//! ```text
//! # comment
//! net <n> <m> [signed]
//! bounds <w_min> <w_max>          (optional)
//! e <u> <v> <capacity> lin <w>
//! e <u> <v> <capacity> quad <a> <b>
//! e <u> <v> <capacity> pwl <k> <x_1> <g_1> ... <x_k> <g_k>
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{GradientBounds, Network, NetworkBuilder, NetworkError};
use crate::weights::{PiecewiseLinear, WeightError, WeightFunction, WeightKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown weight family `{tag}`")]
    UnknownFamily { line: usize, tag: String },
    #[error("line {line}: capacity must be positive, got {value}")]
    Capacity { line: usize, value: f64 },
    #[error("line {line}: negative weight requires signed mode")]
    NegativeWeight { line: usize },
    #[error("line {line}: {source}")]
    Weight { line: usize, source: WeightError },
    #[error("missing `net` header")]
    MissingHeader,
    #[error("header declares {declared} {what}, found {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("edge {index}: `{family}` weights have no text form")]
    Unserializable { index: usize, family: &'static str },
}

fn malformed(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        line,
        message: message.into(),
    }
}

fn number(line: usize, tok: Option<&str>, what: &str) -> Result<f64, ParseError> {
    let tok = tok.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} `{tok}`")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("non-finite {what}")));
    }
    Ok(v)
}

/// Parses the text format into a validated network.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let mut builder: Option<NetworkBuilder> = None;
    let mut declared = (0usize, 0usize);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap();
        match (head, builder.as_mut()) {
            ("net", None) => {
                let n = number(line, toks.next(), "vertex count")?;
                let m = number(line, toks.next(), "edge count")?;
                if n < 0.0 || m < 0.0 || n.fract() != 0.0 || m.fract() != 0.0 {
                    return Err(malformed(line, "counts must be non-negative integers"));
                }
                let mut b = NetworkBuilder::new();
                match toks.next() {
                    None => {}
                    Some("signed") => b.set_signed(true),
                    Some(other) => return Err(malformed(line, format!("unknown flag `{other}`"))),
                }
                if toks.next().is_some() {
                    return Err(malformed(line, "trailing tokens"));
                }
                declared = (n as usize, m as usize);
                builder = Some(b);
            }
            ("net", Some(_)) => return Err(malformed(line, "duplicate `net` header")),
            (_, None) => return Err(ParseError::MissingHeader),
            ("bounds", Some(b)) => {
                let lo = number(line, toks.next(), "w_min")?;
                let hi = number(line, toks.next(), "w_max")?;
                if toks.next().is_some() {
                    return Err(malformed(line, "trailing tokens"));
                }
                b.set_bounds(Some(GradientBounds {
                    w_min: lo,
                    w_max: hi,
                }));
            }
            ("e", Some(b)) => {
                let u = toks
                    .next()
                    .ok_or_else(|| malformed(line, "missing tail"))?
                    .to_string();
                let v = toks
                    .next()
                    .ok_or_else(|| malformed(line, "missing head"))?
                    .to_string();
                let cap = number(line, toks.next(), "capacity")?;
                if cap <= 0.0 {
                    return Err(ParseError::Capacity { line, value: cap });
                }
                let wf = parse_weight(line, &mut toks, cap, b.signed)?;
                if toks.next().is_some() {
                    return Err(malformed(line, "trailing tokens"));
                }
                b.edge(&u, &v, cap, wf);
            }
            (other, Some(_)) => return Err(malformed(line, format!("unknown directive `{other}`"))),
        }
    }
    let b = builder.ok_or(ParseError::MissingHeader)?;
    if b.edge_count() != declared.1 {
        return Err(ParseError::CountMismatch {
            what: "edges",
            declared: declared.1,
            found: b.edge_count(),
        });
    }
    if b.vertex_count() != declared.0 {
        return Err(ParseError::CountMismatch {
            what: "vertices",
            declared: declared.0,
            found: b.vertex_count(),
        });
    }
    Ok(b.build()?)
}

fn parse_weight<'a>(
    line: usize,
    toks: &mut impl Iterator<Item = &'a str>,
    cap: f64,
    signed: bool,
) -> Result<WeightFunction, ParseError> {
    let tag = toks
        .next()
        .ok_or_else(|| malformed(line, "missing weight spec"))?;
    let weight_err = |source| ParseError::Weight { line, source };
    let wf = match tag {
        "lin" => {
            let w = number(line, toks.next(), "weight")?;
            if w < 0.0 && !signed {
                return Err(ParseError::NegativeWeight { line });
            }
            WeightFunction::linear(w, cap)
        }
        "quad" => {
            let a = number(line, toks.next(), "coefficient a")?;
            let b = number(line, toks.next(), "coefficient b")?;
            let wf = WeightFunction::quadratic(a, b, cap).map_err(weight_err)?;
            if !signed && a - 2.0 * b * cap < 0.0 {
                return Err(ParseError::NegativeWeight { line });
            }
            wf
        }
        "pwl" => {
            let k = number(line, toks.next(), "segment count")?;
            if k < 1.0 || k.fract() != 0.0 {
                return Err(malformed(line, "segment count must be a positive integer"));
            }
            let mut xs = Vec::new();
            let mut gs = Vec::new();
            for _ in 0..k as usize {
                xs.push(number(line, toks.next(), "breakpoint")?);
                gs.push(number(line, toks.next(), "gradient")?);
            }
            let pwl = PiecewiseLinear::new(xs, gs).map_err(weight_err)?;
            if pwl.end() != cap {
                return Err(weight_err(WeightError::DomainMismatch {
                    last: pwl.end(),
                    capacity: cap,
                }));
            }
            if !signed && pwl.gradients().iter().any(|&g| g < 0.0) {
                return Err(ParseError::NegativeWeight { line });
            }
            WeightFunction::piecewise_linear(pwl)
        }
        other => {
            return Err(ParseError::UnknownFamily {
                line,
                tag: other.to_string(),
            })
        }
    };
    Ok(wf)
}

/// Canonical text form. Padded piecewise-linear weights are written as
/// `pwl`; generic gradients cannot be written.
pub fn serialize_network(net: &Network) -> Result<String, ParseError> {
    let mut out = String::new();
    let _ = write!(out, "net {} {}", net.vertex_count(), net.edge_count());
    if net.is_signed() {
        out.push_str(" signed");
    }
    out.push('\n');
    if let Some(b) = net.declared_bounds() {
        let _ = writeln!(out, "bounds {} {}", b.w_min, b.w_max);
    }
    for (i, e) in net.edges().iter().enumerate() {
        let _ = write!(
            out,
            "e {} {} {} ",
            net.name(e.tail),
            net.name(e.head),
            e.capacity
        );
        match e.weight.kind() {
            WeightKind::Linear { weight } => {
                let _ = write!(out, "lin {weight}");
            }
            WeightKind::Quadratic { a, b } => {
                let _ = write!(out, "quad {a} {b}");
            }
            WeightKind::PiecewiseLinear(_) | WeightKind::Padded(_) => {
                let segs = e.weight.segments().ok_or(ParseError::Unserializable {
                    index: i,
                    family: e.weight.family(),
                })?;
                let _ = write!(out, "pwl {}", segs.len());
                let mut x = 0.0;
                for (k, (len, g)) in segs.iter().enumerate() {
                    x += len;
                    let bp = if k + 1 == segs.len() { e.capacity } else { x };
                    let _ = write!(out, " {bp} {g}");
                }
            }
            WeightKind::Generic(_) => {
                return Err(ParseError::Unserializable {
                    index: i,
                    family: "generic",
                })
            }
        }
        out.push('\n');
    }
    Ok(out)
}
