use super::{Flow, Policy, Run, StepRecord, Termination};
use crate::error::{Error, Result};
use crate::model::{ItemId, PartialRealization};
use crate::scalar::{argmax_lowest, Scalar};
use crate::utility::MarginalEngine;

fn check_alpha<S: Scalar>(alpha: S) -> Result<()> {
    if alpha >= S::zero() && alpha <= S::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha {alpha} is outside [0, 1]")))
    }
}

fn best_density<S: Scalar>(
    engine: &MarginalEngine<'_, S>,
    candidates: &[ItemId],
    selected: &[ItemId],
    psi: &PartialRealization,
) -> Result<Option<(ItemId, S)>> {
    let mut scores = Vec::with_capacity(candidates.len());
    for &e in candidates {
        scores.push(engine.density(e, selected, psi)?);
    }
    Ok(argmax_lowest(scores).map(|(i, d)| (candidates[i], d)))
}

/// Batch-mode density greedy for a knapsack budget.
///
/// Runs on a random half of the items, each kept by a fair coin. Within a
/// batch it keeps adding the densest remaining item (judged with the batch's
/// stale information) while that density is at least `α` times the density
/// of the item that opened the batch. When the test fails the batch closes,
/// the densest item under the new information opens the next batch, and the
/// run stops at the first item that does not fit the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityGreedy<S> {
    pub alpha: S,
    pub budget: S,
}

impl<S: Scalar> DensityGreedy<S> {
    pub fn new(alpha: S, budget: S) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(DensityGreedy { alpha, budget })
    }
}

impl<S: Scalar> Policy<S> for DensityGreedy<S> {
    fn name(&self) -> String {
        format!("density-greedy(alpha={}, B={})", self.alpha, self.budget)
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        let instance = run.instance();
        let engine = run.engine();
        let half = S::of(0.5);
        let mut pool = Vec::new();
        for e in 0..instance.n() {
            if run.is_available(e) && run.choose(&[half, half])? == 1 {
                pool.push(e);
            }
        }

        let mut psi = PartialRealization::new();
        let mut mine: Vec<ItemId> = Vec::new();
        let mut spent = S::zero();
        let mut opener: Option<S> = None;
        loop {
            let rest: Vec<ItemId> = pool.iter().copied().filter(|e| !mine.contains(e)).collect();
            let Some((next, density)) = best_density(engine, &rest, &mine, &psi)? else {
                return Ok(Termination::GroundExhausted);
            };
            let reference = *opener.get_or_insert(density);
            let bar = self.alpha * reference;
            if density >= bar {
                let cost = instance.cost(next);
                if !instance.fits(spent + cost, self.budget) {
                    return Ok(Termination::BudgetExhausted);
                }
                run.select(
                    next,
                    StepRecord::new(&psi, &mine, density, bar).with_trigger(density, bar),
                )?;
                mine.push(next);
                spent = spent + cost;
            } else {
                let revealed = run.close_batch()?;
                psi.extend(revealed)?;
                let (fresh, fresh_density) =
                    best_density(engine, &rest, &psi.domain(), &psi)?.expect("rest is nonempty");
                if !(fresh_density > S::zero()) {
                    return Ok(Termination::NoPositiveDensity);
                }
                let cost = instance.cost(fresh);
                if !instance.fits(spent + cost, self.budget) {
                    return Ok(Termination::BudgetExhausted);
                }
                let record =
                    StepRecord::new(&psi, &mine, fresh_density, self.alpha * fresh_density).with_trigger(density, bar);
                run.select(fresh, record)?;
                mine.push(fresh);
                spent = spent + cost;
                opener = Some(fresh_density);
            }
        }
    }
}

/// The real item with the largest `E[f({e})]` among those whose cost fits
/// `budget` (all items when `budget` is `None`). Ties go to the lower id.
pub fn best_singleton<S: Scalar>(engine: &MarginalEngine<'_, S>, budget: Option<S>) -> Result<Option<(ItemId, S)>> {
    let instance = engine.instance();
    let empty = PartialRealization::new();
    let mut candidates = Vec::new();
    let mut values = Vec::new();
    for e in 0..instance.n() {
        if budget.is_none_or(|b| instance.fits(instance.cost(e), b)) {
            candidates.push(e);
            values.push(engine.expected_value(&[e], &empty)?);
        }
    }
    Ok(argmax_lowest(values).map(|(i, v)| (candidates[i], v)))
}

/// Selects the best affordable singleton and stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestSingleton<S> {
    pub budget: Option<S>,
}

impl<S: Scalar> Policy<S> for BestSingleton<S> {
    fn name(&self) -> String {
        "best-singleton".into()
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        let best = best_singleton(run.engine(), self.budget)?;
        match best {
            Some((e, value)) if run.is_available(e) => {
                run.select(e, StepRecord::new(&PartialRealization::new(), &[], value, value))?;
                Ok(Termination::CardinalityReached)
            }
            _ => Ok(Termination::GroundExhausted),
        }
    }
}

/// Probabilities of the two branches of [`MixedKnapsack`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureWeights<S> {
    pub singleton: S,
    pub density: S,
}

impl<S: Scalar> MixtureWeights<S> {
    /// `singleton = (1/α) / (3 + 2/α)`, `density = (3 + 1/α) / (3 + 2/α)`.
    pub fn new(alpha: S) -> Result<Self> {
        if !(alpha > S::zero() && alpha <= S::one()) {
            return Err(Error::Config(format!("mixture needs alpha in (0, 1], got {alpha}")));
        }
        let inv = alpha.recip();
        let three = S::of(3.0);
        let denom = three + inv + inv;
        Ok(MixtureWeights {
            singleton: inv / denom,
            density: (three + inv) / denom,
        })
    }
}

/// Flips a biased coin between [`BestSingleton`] and [`DensityGreedy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedKnapsack<S> {
    pub alpha: S,
    pub budget: S,
    pub weights: MixtureWeights<S>,
}

impl<S: Scalar> MixedKnapsack<S> {
    pub fn new(alpha: S, budget: S) -> Result<Self> {
        Ok(MixedKnapsack {
            alpha,
            budget,
            weights: MixtureWeights::new(alpha)?,
        })
    }
}

impl<S: Scalar> Policy<S> for MixedKnapsack<S> {
    fn name(&self) -> String {
        format!("mixed-knapsack(alpha={}, B={})", self.alpha, self.budget)
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        if run.choose(&[self.weights.singleton, self.weights.density])? == 0 {
            BestSingleton {
                budget: Some(self.budget),
            }
            .execute(run)
        } else {
            DensityGreedy {
                alpha: self.alpha,
                budget: self.budget,
            }
            .execute(run)
        }
    }
}
