//! Ground truth: exact and Monte-Carlo policy evaluation, the optimal
//! adaptive value, structure checkers and trace audits.

mod audit;
mod checkers;
mod dp;
pub(crate) mod evaluate;

pub use audit::{audit_cardinality_trace, audit_density_trace, AuditFailure};
pub use checkers::{
    check_adaptive_monotonicity, check_adaptive_submodularity, check_policywise_strong, check_weak_policywise,
    positive_partials, CheckerReport, Witness, STRONG_MAX_ITEMS,
};
pub use dp::{
    optimal_adaptive_report, optimal_adaptive_value, optimal_cardinality_value, ActionValue, OracleReport,
    ORACLE_MAX_ITEMS, ORACLE_MAX_STATES,
};
pub use evaluate::{
    enumerate_runs, exact_expected_utility, exact_with_engine, marginal_policy, mc_expected_utility, EvalReport, Method,
};
