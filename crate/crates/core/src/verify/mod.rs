//! Auditing, the multiedge expansion, the exact oracle and certificates.

mod audit;
mod certify;
mod expand;
mod oracle;

pub use audit::{
    check_final_lower_bound, check_invariants, check_invariants_at, gradient_tolerance,
    reduced_cost_identity, AuditReport, Check, CheckCount, IdentityError, Stamp, Violation,
};
pub use certify::{bound_factor, certify, certify_with, Certificate, ReferenceKind, Status};
pub use expand::{
    expand_multiedges, expand_multiedges_capped, ExpandedNetwork, ExpansionError, ParallelEdge,
    DEFAULT_EXPANSION_CAP,
};
pub use oracle::{
    brute_force_opt, exact_linear_opt, exact_linear_opt_capped, OracleCaps, OracleError,
    OracleSolution, ORACLE_CAP_VAR,
};
