//! Exhaustive numerical checks of the structural properties the
//! approximation guarantees assume.

use std::collections::HashMap;

use serde::Serialize;

use super::dp::{check_oracle_size, Dp};
use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance};
use crate::model::{ItemId, PartialRealization, StateLabel};
use crate::scalar::Scalar;
use crate::utility::MarginalEngine;

/// Largest instance the strong policywise check accepts.
pub const STRONG_MAX_ITEMS: usize = 5;

/// Where a property fails worst.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Witness {
    pub psi: Vec<(ItemId, StateLabel)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_prime: Option<Vec<(ItemId, StateLabel)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item: Option<ItemId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<ItemId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerReport {
    pub property: String,
    pub holds: bool,
    /// Largest amount by which the defining inequality fails; `0` when it
    /// never does.
    pub worst_violation: f64,
    /// Argument of the worst violation, present when the property fails.
    pub witness: Option<Witness>,
    /// Inequalities examined.
    pub checked: usize,
}

struct Worst {
    value: f64,
    witness: Option<Witness>,
    checked: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            witness: None,
            checked: 0,
        }
    }

    fn offer(&mut self, violation: f64, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        if violation > self.value {
            self.value = violation;
            self.witness = Some(witness());
        }
    }

    fn report(self, property: &str, tol: f64) -> CheckerReport {
        let holds = self.value <= tol;
        CheckerReport {
            property: property.into(),
            holds,
            worst_violation: self.value,
            witness: if holds { None } else { self.witness },
            checked: self.checked,
        }
    }
}

/// Every positive-probability partial realization of the real items.
pub fn positive_partials<S: Scalar>(instance: &Instance<S>) -> Result<Vec<PartialRealization>> {
    let mut out = vec![PartialRealization::new()];
    let prior = instance.prior();
    for e in 0..instance.n() {
        let mut next = Vec::with_capacity(out.len() * 2);
        for psi in &out {
            next.push(psi.clone());
            for s in 0..instance.states().states_of(e) {
                let mut grown = psi.clone();
                grown.insert(e, s)?;
                if prior.probability_of(&grown) > S::zero() {
                    next.push(grown);
                }
            }
        }
        if next.len() > instance.cap() {
            return Err(Error::CapExceeded {
                what: "partial realizations",
                required: next.len() as u128,
                cap: instance.cap() as u128,
            });
        }
        out = next;
    }
    Ok(out)
}

/// `Δ(e | dom ψ, ψ)` for every real item outside `dom ψ`, indexed by item
/// (entries for observed items are unused).
fn marginals_at<S: Scalar>(engine: &MarginalEngine<'_, S>, psi: &PartialRealization) -> Result<Vec<Option<S>>> {
    let dom = psi.domain();
    (0..engine.instance().n())
        .map(|e| {
            if psi.contains(e) {
                Ok(None)
            } else {
                engine.marginal(e, &dom, psi).map(Some)
            }
        })
        .collect()
}

/// All subrealizations of `psi`, including `∅` and `psi` itself.
fn subrealizations(psi: &PartialRealization) -> Vec<PartialRealization> {
    let pairs = psi.canonical();
    (0u64..(1 << pairs.len()))
        .map(|mask| {
            PartialRealization::from_pairs(
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, p)| *p),
            )
            .expect("subset of a consistent realization")
        })
        .collect()
}

/// `Δ(e | dom ψ, ψ) ≥ Δ(e | dom ψ', ψ')` for all `ψ ⊆ ψ'` and `e ∉ dom ψ'`.
pub fn check_adaptive_submodularity<S: Scalar>(instance: &Instance<S>, tol: f64) -> Result<CheckerReport> {
    let engine = MarginalEngine::exact(instance);
    let partials = positive_partials(instance)?;
    let mut table: HashMap<Vec<(ItemId, StateLabel)>, Vec<Option<S>>> = HashMap::with_capacity(partials.len());
    for psi in &partials {
        table.insert(psi.canonical(), marginals_at(&engine, psi)?);
    }
    let mut worst = Worst::new();
    for larger in &partials {
        let big = &table[&larger.canonical()];
        for smaller in subrealizations(larger) {
            let small = &table[&smaller.canonical()];
            for e in 0..instance.n() {
                if let (Some(late), Some(early)) = (big[e], small[e]) {
                    worst.offer((late - early).as_f64(), || Witness {
                        psi: smaller.canonical(),
                        psi_prime: Some(larger.canonical()),
                        item: Some(e),
                        subset: None,
                    });
                }
            }
        }
    }
    Ok(worst.report("adaptive_submodularity", tol))
}

/// `Δ(e | dom ψ, ψ) ≥ 0` for every positive-probability `ψ` and `e ∉ dom ψ`.
pub fn check_adaptive_monotonicity<S: Scalar>(instance: &Instance<S>, tol: f64) -> Result<CheckerReport> {
    let engine = MarginalEngine::exact(instance);
    let mut worst = Worst::new();
    for psi in positive_partials(instance)? {
        for (e, m) in marginals_at(&engine, &psi)?.into_iter().enumerate() {
            if let Some(m) = m {
                worst.offer(-m.as_f64(), || Witness {
                    psi: psi.canonical(),
                    item: Some(e),
                    ..Witness::default()
                });
            }
        }
    }
    Ok(worst.report("adaptive_monotonicity", tol))
}

/// `f_avg(π*) ≥ max_π Δ(π | dom ψ, ψ)` for every positive-probability `ψ`
/// with `c(dom ψ) ≤ B`, the continuation limited to the residual budget.
/// `π*` is optimal for the full budget `B`.
pub fn check_weak_policywise<S: Scalar>(
    instance: &Instance<S>,
    constraint: &Constraint<S>,
    tol: f64,
) -> Result<CheckerReport> {
    check_oracle_size(instance)?;
    let engine = MarginalEngine::exact(instance);
    let mut dp = Dp::new(&engine, constraint, vec![true; instance.n()]);
    let optimum = dp.value(&PartialRealization::new())?;
    let mut worst = Worst::new();
    for psi in positive_partials(instance)? {
        if !dp.fits(dp.spent(&psi)) {
            continue;
        }
        let gain = dp.value(&psi)? - dp.stop_value(&psi)?;
        worst.offer((gain - optimum).as_f64(), || Witness {
            psi: psi.canonical(),
            ..Witness::default()
        });
    }
    Ok(worst.report("weak_policywise_submodularity", tol))
}

/// For all `ψ' ⊆ ψ` with `c(dom ψ) ≤ B` and `S` disjoint from `dom ψ`: the
/// best continuation restricted to `S` with budget `B − c(dom ψ)` gains at
/// least as much after `ψ'` as after `ψ`. Exponential; `n ≤ 5` only.
pub fn check_policywise_strong<S: Scalar>(
    instance: &Instance<S>,
    constraint: &Constraint<S>,
    tol: f64,
) -> Result<CheckerReport> {
    let n = instance.n();
    if n > STRONG_MAX_ITEMS {
        return Err(Error::CapExceeded {
            what: "strong policywise items",
            required: n as u128,
            cap: STRONG_MAX_ITEMS as u128,
        });
    }
    check_oracle_size(instance)?;
    let engine = MarginalEngine::exact(instance);
    let budget = constraint.budget();
    let costs: Vec<S> = match constraint {
        Constraint::Cardinality(_) => vec![S::one(); n],
        Constraint::Knapsack(_) => instance.costs().as_slice().to_vec(),
    };
    let partials = positive_partials(instance)?;
    let mut worst = Worst::new();
    for psi in &partials {
        let spent: S = psi.iter().map(|(e, _)| costs[e]).sum();
        if !instance.fits(spent, budget) {
            continue;
        }
        let residual = budget - spent;
        let residual_constraint = match constraint {
            Constraint::Cardinality(k) => Constraint::Cardinality(k - psi.len()),
            Constraint::Knapsack(_) => Constraint::Knapsack(residual),
        };
        let free: Vec<ItemId> = (0..n).filter(|&e| !psi.contains(e)).collect();
        for mask in 1u32..(1 << free.len()) {
            let subset: Vec<ItemId> = free
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let mut allowed = vec![false; n];
            for &e in &subset {
                allowed[e] = true;
            }
            let mut dp = Dp::new(&engine, &residual_constraint, allowed);
            let after = dp.value(psi)? - dp.stop_value(psi)?;
            for earlier in subrealizations(psi) {
                let before = dp.value(&earlier)? - dp.stop_value(&earlier)?;
                worst.offer((after - before).as_f64(), || Witness {
                    psi: psi.canonical(),
                    psi_prime: Some(earlier.canonical()),
                    item: None,
                    subset: Some(subset.clone()),
                });
            }
        }
    }
    Ok(worst.report("policywise_submodularity", tol))
}
