//! Approximation certificates.

use std::fmt::Write as _;

use super::expand::{expand_multiedges, ExpansionError};
use super::oracle::{exact_linear_opt_capped, OracleCaps, OracleError};
use crate::format::num;
use crate::network::Network;
use crate::solver::{Algorithm, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Exact optimum of the instance.
    Oracle,
    /// Optimum of the below-step expansion, a lower bound on the optimum.
    ExpansionLowerBound,
}

impl ReferenceKind {
    pub fn key(self) -> &'static str {
        match self {
            ReferenceKind::Oracle => "oracle",
            ReferenceKind::ExpansionLowerBound => "expansion_lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Uncertified(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub grid_eps: f64,
    pub objective: f64,
    pub reference: Option<f64>,
    pub reference_kind: ReferenceKind,
    /// Bound factor: `1 − ε`, `1 − 8ε` or `1 − 9ε`.
    pub bound: f64,
    /// Value the objective must reach.
    pub threshold: Option<f64>,
    /// Whether `ε` is small enough for the approximation bound to apply.
    pub claimed: bool,
    pub signed: bool,
    pub status: Status,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn ratio(&self) -> Option<f64> {
        let r = self.reference?;
        if r == 0.0 {
            Some(if self.objective >= 0.0 { 1.0 } else { 0.0 })
        } else {
            Some(self.objective / r)
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// A certificate failure that should surface as an error.
    pub fn failed(&self) -> bool {
        self.status == Status::Fail && self.claimed
    }

    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "none".to_string());
        let _ = writeln!(out, "certificate.algorithm: {}", self.algorithm);
        let _ = writeln!(out, "certificate.eps: {}", num(self.eps));
        let _ = writeln!(out, "certificate.grid_eps: {}", num(self.grid_eps));
        let _ = writeln!(out, "certificate.objective: {}", num(self.objective));
        let _ = writeln!(out, "certificate.reference: {}", opt(self.reference));
        let _ = writeln!(out, "certificate.reference_kind: {}", self.reference_kind.key());
        let _ = writeln!(out, "certificate.ratio: {}", opt(self.ratio()));
        let _ = writeln!(out, "certificate.bound: {}", num(self.bound));
        let _ = writeln!(out, "certificate.threshold: {}", opt(self.threshold));
        let status = match &self.status {
            Status::Pass => "pass".to_string(),
            Status::Fail => "fail".to_string(),
            Status::Uncertified(why) => format!("uncertified: {why}"),
        };
        let _ = writeln!(out, "certificate.status: {status}");
        for note in &self.notes {
            let _ = writeln!(out, "certificate.note: {note}");
        }
        out
    }
}

/// Bound factor for `algorithm` at `eps`.
pub fn bound_factor(algorithm: Algorithm, eps: f64) -> f64 {
    match algorithm {
        Algorithm::Simple => 1.0 - eps,
        Algorithm::Scaling => 1.0 - 8.0 * eps,
        Algorithm::Concave => 1.0 - 9.0 * eps,
    }
}

pub fn certify(result: &SolveResult, net: &Network, eps: f64) -> Certificate {
    certify_with(result, net, eps, &OracleCaps::default())
}

/// Compares the solve against the oracle (or the expansion lower bound for
/// functions without exact segments).
pub fn certify_with(
    result: &SolveResult,
    net: &Network,
    eps: f64,
    caps: &OracleCaps,
) -> Certificate {
    let algorithm = result.algorithm;
    let bound = bound_factor(algorithm, eps);
    let exact = net.edges().iter().all(|e| e.weight.segments().is_some());
    let mut cert = Certificate {
        algorithm,
        eps,
        grid_eps: result.grid.eps(),
        objective: result.objective,
        reference: None,
        reference_kind: if exact {
            ReferenceKind::Oracle
        } else {
            ReferenceKind::ExpansionLowerBound
        },
        bound,
        threshold: None,
        claimed: true,
        signed: net.is_signed(),
        status: Status::Uncertified(String::new()),
        notes: Vec::new(),
    };
    if algorithm != Algorithm::Simple && eps >= 0.1 {
        cert.claimed = false;
        cert.notes
            .push("ε ≥ 1/10: approximation bound not claimed".to_string());
    }

    let solution = if exact {
        exact_linear_opt_capped(net, caps)
    } else {
        cert.notes.push(
            "reference is the optimum of the below-step expansion; passing is a necessary consequence of the guarantee"
                .to_string(),
        );
        match expand_multiedges(net, result.grid.unit()) {
            Ok(x) => exact_linear_opt_capped(&x.network, caps).map(|mut sol| {
                sol.flow = x.collapse(&sol.flow);
                sol
            }),
            Err(ExpansionError::TooManyEdges { count, .. }) => Err(OracleError::CapExceeded {
                edges: count,
                capacity: net.total_capacity(),
            }),
            Err(other) => {
                cert.status = Status::Uncertified(other.to_string());
                return cert;
            }
        }
    };
    let solution = match solution {
        Ok(sol) => sol,
        Err(OracleError::CapExceeded { .. }) => {
            cert.status = Status::Uncertified("oracle cap".to_string());
            return cert;
        }
        Err(other) => {
            cert.status = Status::Uncertified(other.to_string());
            return cert;
        }
    };
    cert.reference = Some(solution.value);

    let threshold = if net.is_signed() && exact && net.all_linear() {
        // Positive part shrinks by the bound, negative part grows by the
        // mirrored factor.
        let (pos, neg) = solution.split_by_sign(net);
        cert.notes
            .push("signed weights: threshold splits the optimum by sign".to_string());
        bound * pos + (2.0 - bound) * neg
    } else {
        bound * solution.value
    };
    cert.threshold = Some(threshold);
    let slack = 1e-9 * solution.value.abs().max(1.0);
    cert.status = if result.objective >= threshold - slack {
        Status::Pass
    } else {
        Status::Fail
    };
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;
    use crate::solver::{concave_flow, scaling_flow, simple_flow};

    #[test]
    fn scaling_parallel_edges() {
        let net = parse_network("net 2 2\ne s t 1 lin 8\ne s t 1 lin 2\n").unwrap();
        let r = scaling_flow(&net, 0.0625).unwrap();
        let c = certify(&r, &net, 0.0625);
        assert_eq!(c.ratio(), Some(1.0));
        assert_eq!(c.bound, 0.5);
        assert!(c.passed());
        assert!(c.to_key_value().contains("certificate.status: pass\n"));
    }

    #[test]
    fn concave_against_expansion() {
        let net = parse_network("net 2 1\ne s t 3 quad 9 1\n").unwrap();
        let r = concave_flow(&net, 0.0625).unwrap();
        let c = certify(&r, &net, 0.0625);
        assert_eq!(c.reference_kind, ReferenceKind::ExpansionLowerBound);
        assert!(c.reference.unwrap() <= 18.0);
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn large_eps_is_flagged() {
        let net = parse_network("net 2 1\ne s t 1 lin 4\n").unwrap();
        let r = scaling_flow(&net, 0.25).unwrap();
        let c = certify(&r, &net, 0.25);
        assert!(!c.claimed);
        assert!(c
            .to_key_value()
            .contains("certificate.note: ε ≥ 1/10: approximation bound not claimed"));
        // The simple variant makes no such restriction.
        let r = simple_flow(&net, 0.25).unwrap();
        assert!(certify(&r, &net, 0.25).claimed);
    }

    #[test]
    fn oracle_cap_makes_uncertified() {
        let net = parse_network("net 2 1\ne s t 10 lin 4\n").unwrap();
        let r = scaling_flow(&net, 0.0625).unwrap();
        let caps = OracleCaps {
            max_edges: 10,
            max_total_capacity: 5.0,
        };
        let c = certify_with(&r, &net, 0.0625, &caps);
        assert_eq!(c.status, Status::Uncertified("oracle cap".to_string()));
        assert!(!c.failed());
    }
}
