//! Utility functions over observed `(item, state)` pairs and the
//! conditional expected marginal utility engine.
//!
//! A utility is a set function of the observations `{(e, φ(e)) : e ∈ S}`;
//! [`UtilityFunction::evaluate`] takes the unordered item set `S` and a
//! realization, [`UtilityFunction::evaluate_observed`] takes the pairs
//! directly. Dummy items (ids beyond the real items) are ignored by both.

mod marginal;

use std::collections::HashMap;

pub use marginal::{MarginalEngine, MarginalMode, DEFAULT_MC_SAMPLES};

pub use crate::oracle::evaluate::marginal_policy;

use crate::error::{Error, Result};
use crate::model::{ItemId, Realization, StateLabel, StateSpace};
use crate::scalar::Scalar;

/// Weighted coverage: item `e` in state `s` covers `covers[e][s]`; the value
/// is the total weight of the covered elements.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoverage<S> {
    pub weights: Vec<S>,
    pub covers: Vec<Vec<Vec<usize>>>,
}

/// Weighted coverage minus a modular penalty `Σ_{e∈S} λ_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageWithPenalty<S> {
    pub coverage: WeightedCoverage<S>,
    pub penalties: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<S> {
    /// State each item takes if this hypothesis is the truth.
    pub answers: Vec<StateLabel>,
    pub mass: S,
}

/// Version-space reduction: the prior mass of the hypotheses ruled out by the
/// observations.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSpace<S> {
    pub hypotheses: Vec<Hypothesis<S>>,
}

/// Explicit table keyed by sorted observation sets. The empty set is worth 0
/// unless listed.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabular<S> {
    n: usize,
    table: HashMap<Vec<(ItemId, StateLabel)>, S>,
}

impl<S: Scalar> Tabular<S> {
    pub fn new(n: usize, entries: impl IntoIterator<Item = (Vec<(ItemId, StateLabel)>, S)>) -> Self {
        let table = entries
            .into_iter()
            .map(|(mut key, v)| {
                key.sort_unstable();
                key.dedup();
                (key, v)
            })
            .collect();
        Tabular { n, table }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<(ItemId, StateLabel)>, &S)> {
        self.table.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UtilityFunction<S> {
    WeightedCoverage(WeightedCoverage<S>),
    CoverageWithPenalty(CoverageWithPenalty<S>),
    VersionSpace(VersionSpace<S>),
    Tabular(Tabular<S>),
}

impl<S: Scalar> WeightedCoverage<S> {
    fn value(&self, obs: &[(ItemId, StateLabel)]) -> S {
        let mut covered = vec![false; self.weights.len()];
        for &(e, s) in obs {
            if let Some(elems) = self.covers.get(e).and_then(|per_state| per_state.get(s)) {
                for &j in elems {
                    covered[j] = true;
                }
            }
        }
        covered
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| **c)
            .map(|(_, w)| *w)
            .sum()
    }

    fn validate(&self, space: &StateSpace) -> Result<()> {
        if self.covers.len() != space.n() {
            return Err(Error::Model(format!(
                "coverage map lists {} items, expected {}",
                self.covers.len(),
                space.n()
            )));
        }
        if self.weights.iter().any(|w| !(*w >= S::zero())) {
            return Err(Error::Model("element weights must be nonnegative".into()));
        }
        for (e, per_state) in self.covers.iter().enumerate() {
            if per_state.len() != space.states_of(e) {
                return Err(Error::Model(format!(
                    "item {e} has coverage for {} states, expected {}",
                    per_state.len(),
                    space.states_of(e)
                )));
            }
            if per_state.iter().flatten().any(|&j| j >= self.weights.len()) {
                return Err(Error::Model(format!("item {e} covers an unknown element")));
            }
        }
        Ok(())
    }
}

impl<S: Scalar> UtilityFunction<S> {
    /// Number of real items the function is defined over.
    pub fn n(&self) -> usize {
        match self {
            UtilityFunction::WeightedCoverage(c) => c.covers.len(),
            UtilityFunction::CoverageWithPenalty(c) => c.coverage.covers.len(),
            UtilityFunction::VersionSpace(v) => v.hypotheses.first().map_or(0, |h| h.answers.len()),
            UtilityFunction::Tabular(t) => t.n,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            UtilityFunction::WeightedCoverage(_) => "weighted_coverage",
            UtilityFunction::CoverageWithPenalty(_) => "coverage_penalty",
            UtilityFunction::VersionSpace(_) => "version_space",
            UtilityFunction::Tabular(_) => "tabular",
        }
    }

    /// `f` on an observation set. Pairs naming dummy items are dropped;
    /// duplicates are harmless.
    pub fn evaluate_observed(&self, obs: &[(ItemId, StateLabel)]) -> Result<S> {
        let n = self.n();
        let real: Vec<(ItemId, StateLabel)> = obs.iter().copied().filter(|&(e, _)| e < n).collect();
        Ok(match self {
            UtilityFunction::WeightedCoverage(c) => c.value(&real),
            UtilityFunction::CoverageWithPenalty(c) => {
                let mut items: Vec<ItemId> = real.iter().map(|&(e, _)| e).collect();
                items.sort_unstable();
                items.dedup();
                let penalty: S = items.iter().map(|&e| c.penalties[e]).sum();
                c.coverage.value(&real) - penalty
            }
            UtilityFunction::VersionSpace(v) => v
                .hypotheses
                .iter()
                .filter(|h| real.iter().any(|&(e, s)| h.answers[e] != s))
                .map(|h| h.mass)
                .sum(),
            UtilityFunction::Tabular(t) => {
                let mut key = real;
                key.sort_unstable();
                key.dedup();
                match t.table.get(&key) {
                    Some(v) => *v,
                    None if key.is_empty() => S::zero(),
                    None => return Err(Error::Evaluation(format!("tabular utility has no entry for {key:?}"))),
                }
            }
        })
    }

    /// `f(S, φ)` for an unordered item set.
    pub fn evaluate(&self, items: &[ItemId], phi: &Realization) -> Result<S> {
        self.evaluate_observed(&phi.observe(items))
    }

    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        match self {
            UtilityFunction::WeightedCoverage(c) => c.validate(space),
            UtilityFunction::CoverageWithPenalty(c) => {
                c.coverage.validate(space)?;
                if c.penalties.len() != space.n() {
                    return Err(Error::Model("one penalty per item required".into()));
                }
                if c.penalties.iter().any(|l| !(*l >= S::zero())) {
                    return Err(Error::Model("penalties must be nonnegative".into()));
                }
                Ok(())
            }
            UtilityFunction::VersionSpace(v) => {
                if v.hypotheses.is_empty() {
                    return Err(Error::Model("version space needs at least one hypothesis".into()));
                }
                for (i, h) in v.hypotheses.iter().enumerate() {
                    if h.answers.len() != space.n() {
                        return Err(Error::Model(format!("hypothesis {i} has wrong length")));
                    }
                    if let Some(e) = (0..space.n()).find(|&e| !space.is_legal(e, h.answers[e])) {
                        return Err(Error::Model(format!("hypothesis {i} has illegal answer for item {e}")));
                    }
                    if !(h.mass >= S::zero()) {
                        return Err(Error::Model(format!("hypothesis {i} has negative mass")));
                    }
                }
                Ok(())
            }
            UtilityFunction::Tabular(t) => {
                if t.n != space.n() {
                    return Err(Error::Model("tabular utility has wrong item count".into()));
                }
                for key in t.table.keys() {
                    if key.iter().any(|&(e, s)| !space.is_legal(e, s) || e >= space.n()) {
                        return Err(Error::Model(format!("tabular entry {key:?} is illegal")));
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coverage() -> WeightedCoverage<f64> {
        // item a: state 0 covers nothing, state 1 covers both elements
        WeightedCoverage {
            weights: vec![1.0, 2.0],
            covers: vec![vec![vec![], vec![0, 1]]],
        }
    }

    #[test]
    fn empty_set_is_worth_zero() {
        let phi = Realization::new(vec![1]);
        let fams = [
            UtilityFunction::WeightedCoverage(coverage()),
            UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
                coverage: coverage(),
                penalties: vec![0.5],
            }),
            UtilityFunction::VersionSpace(VersionSpace {
                hypotheses: vec![
                    Hypothesis {
                        answers: vec![0],
                        mass: 0.5,
                    },
                    Hypothesis {
                        answers: vec![1],
                        mass: 0.5,
                    },
                ],
            }),
            UtilityFunction::Tabular(Tabular::new(1, [])),
        ];
        for f in &fams {
            assert_eq!(f.evaluate(&[], &phi).unwrap(), 0.0, "{}", f.kind());
        }
    }

    #[test]
    fn coverage_sums_weights() {
        let f = UtilityFunction::WeightedCoverage(coverage());
        assert_eq!(f.evaluate(&[0], &Realization::new(vec![1])).unwrap(), 3.0);
        assert_eq!(f.evaluate(&[0], &Realization::new(vec![0])).unwrap(), 0.0);
    }

    #[test]
    fn penalty_can_go_negative() {
        let f = UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
            coverage: coverage(),
            penalties: vec![0.5],
        });
        assert_eq!(f.evaluate(&[0], &Realization::new(vec![0])).unwrap(), -0.5);
        assert_eq!(f.evaluate(&[0], &Realization::new(vec![1])).unwrap(), 2.5);
    }

    #[test]
    fn dummies_contribute_nothing() {
        let f = UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
            coverage: coverage(),
            penalties: vec![0.5],
        });
        let phi = Realization::new(vec![1]);
        assert_eq!(f.evaluate(&[0, 3, 4], &phi).unwrap(), f.evaluate(&[0], &phi).unwrap());
    }

    #[test]
    fn version_space_counts_eliminated_mass() {
        let f: UtilityFunction<f64> = UtilityFunction::VersionSpace(VersionSpace {
            hypotheses: vec![
                Hypothesis {
                    answers: vec![0, 0],
                    mass: 0.2,
                },
                Hypothesis {
                    answers: vec![0, 1],
                    mass: 0.3,
                },
                Hypothesis {
                    answers: vec![1, 1],
                    mass: 0.5,
                },
            ],
        });
        let phi = Realization::new(vec![0, 1]);
        assert!((f.evaluate(&[0], &phi).unwrap() - 0.5).abs() < 1e-12);
        assert!((f.evaluate(&[0, 1], &phi).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tabular_miss_is_an_error() {
        let f = UtilityFunction::Tabular(Tabular::new(2, [(vec![(0, 1)], 4.0)]));
        assert_eq!(f.evaluate(&[0], &Realization::new(vec![1, 0])).unwrap(), 4.0);
        assert!(matches!(
            f.evaluate(&[0, 1], &Realization::new(vec![1, 0])),
            Err(Error::Evaluation(_))
        ));
    }
}
