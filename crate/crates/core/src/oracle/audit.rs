//! Post-hoc checks of recorded traces, recomputing every quantity from the
//! instance rather than trusting the values the policy logged.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::Result;
use crate::model::{ItemId, PartialRealization};
use crate::policy::RunTrace;
use crate::scalar::Scalar;
use crate::utility::MarginalEngine;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditFailure {
    /// Index into the trace's steps.
    pub step: usize,
    pub message: String,
}

fn slack<S: Scalar>(scale: S) -> S {
    S::tolerance() * scale.abs().max(S::one())
}

/// Items revealed before batch `batch` (1-based) began.
fn revealed_before<S>(trace: &RunTrace<S>, batch: usize) -> Vec<ItemId> {
    let mut items: Vec<ItemId> = trace.batches[..batch - 1]
        .iter()
        .flat_map(|b| b.items.iter().copied())
        .collect();
    items.sort_unstable();
    items
}

fn history_of<S: Scalar>(trace: &RunTrace<S>, step: usize) -> Result<PartialRealization> {
    PartialRealization::from_pairs(trace.steps[step].history.iter().copied())
}

fn sum_of_largest<S: Scalar>(mut values: Vec<S>, k: usize) -> S {
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    values.into_iter().take(k).sum()
}

fn check_information<S: Scalar>(
    trace: &RunTrace<S>,
    step: usize,
    psi: &PartialRealization,
    out: &mut Vec<AuditFailure>,
) {
    let mut seen = psi.domain();
    seen.sort_unstable();
    let expected = revealed_before(trace, trace.steps[step].batch);
    if seen != expected {
        out.push(AuditFailure {
            step,
            message: format!("information {seen:?} differs from earlier batches {expected:?}"),
        });
    }
}

/// Audits a trace of the cardinality greedy: selections conditioned only on
/// earlier batches; at every step the top-`k` marginal sum given the
/// selected items is at least `α` times the top-`k` sum given the observed
/// items; and every pick belongs to the top-`k` set.
pub fn audit_cardinality_trace<S: Scalar>(
    engine: &MarginalEngine<'_, S>,
    trace: &RunTrace<S>,
    alpha: S,
    k: usize,
) -> Result<Vec<AuditFailure>> {
    let ground = engine.instance().n() + trace.dummies;
    let mut failures = Vec::new();
    if trace.steps.len() > k {
        failures.push(AuditFailure {
            step: k,
            message: format!("{} selections exceed k = {k}", trace.steps.len()),
        });
    }
    for (t, step) in trace.steps.iter().enumerate() {
        let psi = history_of(trace, t)?;
        check_information(trace, t, &psi, &mut failures);
        let selected = &step.prior_selected;
        let observed = psi.domain();
        let mut given_selected = Vec::new();
        let mut given_observed = Vec::new();
        for e in 0..ground {
            if !selected.contains(&e) {
                given_selected.push(engine.marginal(e, selected, &psi)?);
            }
            if !psi.contains(e) {
                given_observed.push(engine.marginal(e, &observed, &psi)?);
            }
        }
        let kth = {
            let mut sorted = given_selected.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
            sorted.get(k - 1).copied().unwrap_or_else(S::neg_infinity)
        };
        let lhs = sum_of_largest(given_selected, k);
        let rhs = alpha * sum_of_largest(given_observed, k);
        if lhs < rhs - slack(rhs) {
            failures.push(AuditFailure {
                step: t,
                message: format!("trigger fails: {lhs} < {rhs}"),
            });
        }
        let own = engine.marginal(step.item, selected, &psi)?;
        if own < kth - slack(kth) {
            failures.push(AuditFailure {
                step: t,
                message: format!(
                    "item {} with marginal {own} is outside the top-{k} set (cutoff {kth})",
                    step.item
                ),
            });
        }
    }
    Ok(failures)
}

/// Audits a trace of the density greedy: selections conditioned only on
/// earlier batches; the budget holds; and within every batch each item's
/// density at selection is at least `α` times the opening item's density.
pub fn audit_density_trace<S: Scalar>(
    engine: &MarginalEngine<'_, S>,
    trace: &RunTrace<S>,
    alpha: S,
    budget: S,
) -> Result<Vec<AuditFailure>> {
    let instance = engine.instance();
    let mut failures = Vec::new();
    let mut spent = S::zero();
    let mut opener = S::zero();
    for (t, step) in trace.steps.iter().enumerate() {
        let psi = history_of(trace, t)?;
        check_information(trace, t, &psi, &mut failures);
        spent = spent + instance.cost(step.item);
        if !instance.fits(spent, budget) {
            failures.push(AuditFailure {
                step: t,
                message: format!("spent {spent} exceeds budget {budget}"),
            });
        }
        let density = engine.density(step.item, &step.prior_selected, &psi)?;
        if step.opened_batch {
            opener = density;
        } else {
            let bar = alpha * opener;
            if density < bar - slack(bar) {
                failures.push(AuditFailure {
                    step: t,
                    message: format!("density {density} below {bar} within batch {}", step.batch),
                });
            }
        }
    }
    Ok(failures)
}
