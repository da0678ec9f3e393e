//! Value of the optimal fully adaptive policy by dynamic programming over
//! partial realizations.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance};
use crate::model::{ItemId, PartialRealization, StateLabel};
use crate::scalar::Scalar;
use crate::utility::MarginalEngine;

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_ITEMS: usize = 8;
pub const ORACLE_MAX_STATES: usize = 4;

pub(crate) fn check_oracle_size<S: Scalar>(instance: &Instance<S>) -> Result<()> {
    if instance.n() > ORACLE_MAX_ITEMS {
        return Err(Error::CapExceeded {
            what: "oracle items",
            required: instance.n() as u128,
            cap: ORACLE_MAX_ITEMS as u128,
        });
    }
    if instance.states().max_states() > ORACLE_MAX_STATES {
        return Err(Error::CapExceeded {
            what: "oracle states per item",
            required: instance.states().max_states() as u128,
            cap: ORACLE_MAX_STATES as u128,
        });
    }
    Ok(())
}

/// Memoized value function `V(ψ)`: the best of stopping (worth
/// `E[f(dom ψ) | ψ]`) and observing one more affordable allowed item.
/// Spending counts the allowed items of `dom ψ` only.
pub(crate) struct Dp<'e, 'a, S> {
    engine: &'e MarginalEngine<'a, S>,
    costs: Vec<S>,
    budget: S,
    allowed: Vec<bool>,
    memo: HashMap<Vec<(ItemId, StateLabel)>, S>,
}

impl<'e, 'a, S: Scalar> Dp<'e, 'a, S> {
    pub(crate) fn new(engine: &'e MarginalEngine<'a, S>, constraint: &Constraint<S>, allowed: Vec<bool>) -> Self {
        let instance = engine.instance();
        let costs = match constraint {
            Constraint::Cardinality(_) => vec![S::one(); instance.n()],
            Constraint::Knapsack(_) => instance.costs().as_slice().to_vec(),
        };
        Dp {
            engine,
            costs,
            budget: constraint.budget(),
            allowed,
            memo: HashMap::new(),
        }
    }

    pub(crate) fn spent(&self, psi: &PartialRealization) -> S {
        psi.iter()
            .filter(|&(e, _)| self.allowed.get(e).copied().unwrap_or(false))
            .map(|(e, _)| self.costs[e])
            .sum()
    }

    pub(crate) fn fits(&self, spent: S) -> bool {
        self.engine.instance().fits(spent, self.budget)
    }

    pub(crate) fn stop_value(&self, psi: &PartialRealization) -> Result<S> {
        self.engine.expected_value(&psi.domain(), psi)
    }

    /// Expected value of observing `e` next and then acting optimally.
    pub(crate) fn action_value(&mut self, e: ItemId, psi: &PartialRealization) -> Result<S> {
        let mut q = S::zero();
        for (states, p) in self.engine.instance().prior().joint(&[e], psi)? {
            if p > S::zero() {
                let mut next = psi.clone();
                next.insert(e, states[0])?;
                q = q + p * self.value(&next)?;
            }
        }
        Ok(q)
    }

    /// Items that may be observed next from `psi`.
    pub(crate) fn actions(&self, psi: &PartialRealization) -> Vec<ItemId> {
        let spent = self.spent(psi);
        (0..self.allowed.len())
            .filter(|&e| self.allowed[e] && !psi.contains(e) && self.fits(spent + self.costs[e]))
            .collect()
    }

    pub(crate) fn value(&mut self, psi: &PartialRealization) -> Result<S> {
        let key = psi.canonical();
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let mut best = self.stop_value(psi)?;
        for e in self.actions(psi) {
            let q = self.action_value(e, psi)?;
            if q > best {
                best = q;
            }
        }
        let cap = self.engine.instance().cap();
        if self.memo.len() >= cap {
            return Err(Error::CapExceeded {
                what: "oracle states",
                required: self.memo.len() as u128 + 1,
                cap: cap as u128,
            });
        }
        self.memo.insert(key, best);
        Ok(best)
    }
}

/// Value of one first action of the optimal policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionValue {
    pub item: ItemId,
    pub value: f64,
}

/// Optimal value with the breakdown of the first decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub value: f64,
    pub stop_value: f64,
    pub actions: Vec<ActionValue>,
    /// Item the optimal policy observes first; `None` when stopping at once
    /// is optimal.
    pub best: Option<ItemId>,
}

/// `max_π f_avg(π)` over fully adaptive policies feasible for `constraint`,
/// including policies that stop early.
pub fn optimal_adaptive_value<S: Scalar>(instance: &Instance<S>, constraint: &Constraint<S>) -> Result<S> {
    check_oracle_size(instance)?;
    instance.validate_for(constraint).or_else(|e| match constraint {
        Constraint::Cardinality(0) => Ok(()),
        _ => Err(e),
    })?;
    let engine = MarginalEngine::exact(instance);
    let mut dp = Dp::new(&engine, constraint, vec![true; instance.n()]);
    dp.value(&PartialRealization::new())
}

pub fn optimal_adaptive_report<S: Scalar>(instance: &Instance<S>, constraint: &Constraint<S>) -> Result<OracleReport> {
    check_oracle_size(instance)?;
    instance.validate_for(constraint).or_else(|e| match constraint {
        Constraint::Cardinality(0) => Ok(()),
        _ => Err(e),
    })?;
    let engine = MarginalEngine::exact(instance);
    let mut dp = Dp::new(&engine, constraint, vec![true; instance.n()]);
    let root = PartialRealization::new();
    let stop = dp.stop_value(&root)?;
    let mut actions = Vec::new();
    let mut best: Option<(ItemId, S)> = None;
    for e in dp.actions(&root) {
        let q = dp.action_value(e, &root)?;
        actions.push(ActionValue {
            item: e,
            value: q.as_f64(),
        });
        if best.map_or(q > stop, |(_, b)| q > b) {
            best = Some((e, q));
        }
    }
    let value = best.map_or(stop, |(_, q)| q);
    Ok(OracleReport {
        value: value.as_f64(),
        stop_value: stop.as_f64(),
        actions,
        best: best.map(|(e, _)| e),
    })
}

/// Optimal value under a cardinality budget, by recursion on the number of
/// remaining picks. Independent of the general DP; used to cross-check it.
pub fn optimal_cardinality_value<S: Scalar>(instance: &Instance<S>, k: usize) -> Result<S> {
    check_oracle_size(instance)?;
    let engine = MarginalEngine::exact(instance);
    let mut memo: HashMap<Vec<(ItemId, StateLabel)>, S> = HashMap::new();
    cardinality_value(&engine, &PartialRealization::new(), k, &mut memo)
}

fn cardinality_value<S: Scalar>(
    engine: &MarginalEngine<'_, S>,
    psi: &PartialRealization,
    remaining: usize,
    memo: &mut HashMap<Vec<(ItemId, StateLabel)>, S>,
) -> Result<S> {
    let key = psi.canonical();
    if let Some(v) = memo.get(&key) {
        return Ok(*v);
    }
    let instance = engine.instance();
    let here = engine.expected_value(&psi.domain(), psi)?;
    let mut best = here;
    if remaining > 0 {
        for e in (0..instance.n()).filter(|&e| !psi.contains(e)) {
            let mut q = S::zero();
            let mut mass = S::zero();
            for phi_e in 0..instance.states().states_of(e) {
                let mut next = psi.clone();
                next.insert(e, phi_e)?;
                let p_next = instance.prior().probability_of(&next);
                if p_next > S::zero() {
                    mass = mass + p_next;
                    q = q + p_next * cardinality_value(engine, &next, remaining - 1, memo)?;
                }
            }
            if mass > S::zero() {
                q = q / mass;
                if q > best {
                    best = q;
                }
            }
        }
    }
    memo.insert(key, best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostFunction, Prior, StateSpace};
    use crate::utility::{CoverageWithPenalty, UtilityFunction, WeightedCoverage};

    fn single(penalty: f64) -> Instance<f64> {
        let coverage = WeightedCoverage {
            weights: vec![1.0],
            covers: vec![vec![vec![], vec![0]]],
        };
        Instance::new(
            StateSpace::uniform(1, 2).unwrap(),
            CostFunction::unit(1),
            Prior::independent(vec![vec![0.5, 0.5]]).unwrap(),
            UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
                coverage,
                penalties: vec![penalty],
            }),
        )
        .unwrap()
    }

    #[test]
    fn stop_or_take_single_item() {
        let gain = single(0.2);
        assert!((optimal_adaptive_value(&gain, &Constraint::Cardinality(1)).unwrap() - 0.3).abs() < 1e-12);
        let loss = single(0.8);
        assert_eq!(optimal_adaptive_value(&loss, &Constraint::Cardinality(1)).unwrap(), 0.0);
    }

    #[test]
    fn empty_budget_is_worth_nothing() {
        let inst = single(0.0);
        assert_eq!(optimal_adaptive_value(&inst, &Constraint::Cardinality(0)).unwrap(), 0.0);
        assert_eq!(optimal_adaptive_value(&inst, &Constraint::Knapsack(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn report_names_best_first_action() {
        let r = optimal_adaptive_report(&single(0.2), &Constraint::Cardinality(1)).unwrap();
        assert_eq!(r.best, Some(0));
        let r = optimal_adaptive_report(&single(0.8), &Constraint::Cardinality(1)).unwrap();
        assert_eq!(r.best, None);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn oversized_instance_is_refused() {
        let n = ORACLE_MAX_ITEMS + 1;
        let inst = Instance::new(
            StateSpace::uniform(n, 1).unwrap(),
            CostFunction::unit(n),
            Prior::independent(vec![vec![1.0]; n]).unwrap(),
            UtilityFunction::WeightedCoverage(WeightedCoverage {
                weights: vec![],
                covers: vec![vec![vec![]]; n],
            }),
        )
        .unwrap();
        assert!(optimal_adaptive_value(&inst, &Constraint::Cardinality(1))
            .unwrap_err()
            .is_cap_exceeded());
    }
}
