use std::cmp::Ordering;

use super::{Flow, Policy, Run, StepRecord, Termination};
use crate::error::{Error, Result};
use crate::model::{ItemId, PartialRealization};
use crate::scalar::Scalar;
use crate::utility::MarginalEngine;

/// The `k` candidates with the largest individual marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct TopK<S> {
    /// Chosen items, largest marginal first.
    pub items: Vec<ItemId>,
    pub marginals: Vec<S>,
    /// Sum of the chosen marginals.
    pub sum: S,
}

/// `E ∪ V` for a cardinality budget `k`: the `n` real items followed by
/// `2k − 1` dummies.
pub fn expanded_ground(n: usize, k: usize) -> Vec<ItemId> {
    (0..n + (2 * k).saturating_sub(1)).collect()
}

/// Picks the `k` items of `candidates` with the largest `Δ(e | selected, ψ)`.
/// Ties go to the lower id. Fewer than `k` items are returned only when
/// `candidates` is that short.
pub fn top_k_set<S: Scalar>(
    engine: &MarginalEngine<'_, S>,
    candidates: &[ItemId],
    selected: &[ItemId],
    psi: &PartialRealization,
    k: usize,
) -> Result<TopK<S>> {
    let mut scored = Vec::with_capacity(candidates.len());
    for &e in candidates {
        scored.push((e, engine.marginal(e, selected, psi)?));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    let sum = scored.iter().map(|&(_, m)| m).sum();
    Ok(TopK {
        items: scored.iter().map(|&(e, _)| e).collect(),
        marginals: scored.iter().map(|&(_, m)| m).collect(),
        sum,
    })
}

/// Batch-mode greedy for a cardinality constraint.
///
/// Each step samples uniformly from the top-`k` set under the current
/// batch's information. The batch stays open while the top-`k` marginal sum
/// given the selected items is at least `α` times the top-`k` sum given the
/// observed items alone; otherwise the batch closes, its states are revealed
/// and the top-`k` set is recomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialAdaptiveGreedy<S> {
    pub alpha: S,
    pub k: usize,
}

impl<S: Scalar> PartialAdaptiveGreedy<S> {
    pub fn new(alpha: S, k: usize) -> Result<Self> {
        if !(alpha >= S::zero() && alpha <= S::one()) {
            return Err(Error::Config(format!("alpha {alpha} is outside [0, 1]")));
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(PartialAdaptiveGreedy { alpha, k })
    }
}

impl<S: Scalar> Policy<S> for PartialAdaptiveGreedy<S> {
    fn name(&self) -> String {
        format!("pa-greedy(alpha={}, k={})", self.alpha, self.k)
    }

    fn dummies(&self) -> usize {
        2 * self.k - 1
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        let engine = run.engine();
        let mut psi = PartialRealization::new();
        let mut mine: Vec<ItemId> = Vec::new();
        for _ in 0..self.k {
            let available = run.available();
            if available.is_empty() {
                return Ok(Termination::GroundExhausted);
            }
            let mut unobserved = available.clone();
            unobserved.extend(mine.iter().copied().filter(|&e| !psi.contains(e)));
            unobserved.sort_unstable();
            let current = top_k_set(engine, &available, &mine, &psi, self.k)?;
            let reference = top_k_set(engine, &unobserved, &psi.domain(), &psi, self.k)?;
            let bar = self.alpha * reference.sum;
            let (top, threshold) = if current.sum >= bar {
                (current.clone(), bar)
            } else {
                let revealed = run.close_batch()?;
                psi.extend(revealed)?;
                // every selected item is now observed, so both sides coincide
                let top = top_k_set(engine, &available, &mine, &psi, self.k)?;
                let threshold = self.alpha * top.sum;
                (top, threshold)
            };
            let pick = top.items[run.uniform(top.items.len())?];
            let record = StepRecord::new(&psi, &mine, top.sum, threshold).with_trigger(current.sum, bar);
            run.select(pick, record)?;
            mine.push(pick);
        }
        Ok(Termination::CardinalityReached)
    }
}
