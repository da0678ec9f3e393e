use crate::error::{Error, Result};
use crate::model::{CostFunction, ItemId, PartialRealization, Prior, Realization, StateLabel, StateSpace};
use crate::scalar::Scalar;
use crate::utility::UtilityFunction;

/// Default cap on enumerated realizations, decision-tree leaves and lattice
/// sizes.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Feasibility constraint on the selected set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint<S> {
    /// At most `k` items.
    Cardinality(usize),
    /// Total cost at most `B`.
    Knapsack(S),
}

impl<S: Scalar> Constraint<S> {
    /// Budget and per-item costs: cardinality is unit cost with budget `k`.
    pub fn budget(&self) -> S {
        match *self {
            Constraint::Cardinality(k) => S::of(k as f64),
            Constraint::Knapsack(b) => b,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Constraint::Cardinality(k) => format!("k={k}"),
            Constraint::Knapsack(b) => format!("B={b}"),
        }
    }
}

/// A stochastic submodular maximization instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub id: String,
    states: StateSpace,
    costs: CostFunction<S>,
    prior: Prior<S>,
    utility: UtilityFunction<S>,
    cap: usize,
}

impl<S: Scalar> Instance<S> {
    pub fn new(
        states: StateSpace,
        costs: CostFunction<S>,
        prior: Prior<S>,
        utility: UtilityFunction<S>,
    ) -> Result<Self> {
        let n = states.n();
        if costs.len() != n {
            return Err(Error::Model(format!("{} costs for {n} items", costs.len())));
        }
        if utility.n() != n {
            return Err(Error::Model(format!(
                "utility covers {} items, expected {n}",
                utility.n()
            )));
        }
        prior.validate(&states)?;
        utility.validate(&states)?;
        Ok(Instance {
            id: String::new(),
            states,
            costs,
            prior,
            utility,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Number of real items.
    pub fn n(&self) -> usize {
        self.states.n()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn costs(&self) -> &CostFunction<S> {
        &self.costs
    }

    pub fn prior(&self) -> &Prior<S> {
        &self.prior
    }

    pub fn utility(&self) -> &UtilityFunction<S> {
        &self.utility
    }

    pub fn is_dummy(&self, e: ItemId) -> bool {
        e >= self.n()
    }

    pub fn cost(&self, e: ItemId) -> S {
        self.costs.cost(e)
    }

    /// Cheapest real item's cost.
    pub fn c_min(&self) -> Option<S> {
        self.costs.min()
    }

    /// `spent ≤ budget`, with slack for accumulated rounding.
    pub fn fits(&self, spent: S, budget: S) -> bool {
        spent <= budget + S::tolerance() * budget.abs().max(S::one())
    }

    /// Rejects zero-cost real items when the constraint is a knapsack.
    pub fn validate_for(&self, constraint: &Constraint<S>) -> Result<()> {
        match constraint {
            Constraint::Cardinality(k) if *k == 0 => Err(Error::Config("k must be at least 1".into())),
            Constraint::Cardinality(_) => Ok(()),
            Constraint::Knapsack(b) => {
                if let Some(e) = self.costs.as_slice().iter().position(|c| *c <= S::zero()) {
                    return Err(Error::schema(
                        format!("costs[{e}]"),
                        "zero cost item is not allowed in knapsack mode",
                    ));
                }
                if !(*b >= S::zero()) {
                    return Err(Error::Config("budget must be nonnegative".into()));
                }
                Ok(())
            }
        }
    }

    /// Checks a partial realization names legal items and states. Dummy ids
    /// are legal only in state `0`.
    pub fn check_partial(&self, psi: &PartialRealization) -> Result<()> {
        for (e, s) in psi.iter() {
            if !self.states.is_legal(e, s) {
                return Err(Error::Model(format!("state {s} is illegal for item {e}")));
            }
        }
        Ok(())
    }

    /// `φ ∼ ψ`.
    pub fn is_consistent(&self, phi: &Realization, psi: &PartialRealization) -> Result<bool> {
        if phi.len() != self.n() {
            return Err(Error::Model(format!(
                "realization has {} states, instance has {} items",
                phi.len(),
                self.n()
            )));
        }
        self.check_partial(psi)?;
        Ok(phi.agrees_with(psi))
    }

    pub fn evaluate(&self, items: &[ItemId], phi: &Realization) -> Result<S> {
        self.utility.evaluate(items, phi)
    }

    pub fn evaluate_observed(&self, obs: &[(ItemId, StateLabel)]) -> Result<S> {
        self.utility.evaluate_observed(obs)
    }

    pub fn enumerate_realizations(&self) -> Result<Vec<(Realization, S)>> {
        self.prior.enumerate(self.cap)
    }

    pub fn condition_prior(&self, psi: &PartialRealization) -> Result<Prior<S>> {
        self.check_partial(psi)?;
        self.prior.condition(psi)
    }

    pub fn sample_realization<R: rand::Rng + ?Sized>(
        &self,
        psi: &PartialRealization,
        rng: &mut R,
    ) -> Result<Realization> {
        self.check_partial(psi)?;
        self.prior.sample(psi, rng)
    }

    /// Same instance with every scalar converted to another precision.
    pub fn cast<T: Scalar>(&self) -> Instance<T> {
        let c = |v: &S| T::of(v.as_f64());
        let prior = match &self.prior {
            Prior::Independent(p) => Prior::Independent(p.iter().map(|d| d.iter().map(c).collect()).collect()),
            Prior::Explicit(rows) => Prior::Explicit(rows.iter().map(|(phi, p)| (phi.clone(), c(p))).collect()),
        };
        let coverage = |w: &crate::utility::WeightedCoverage<S>| crate::utility::WeightedCoverage {
            weights: w.weights.iter().map(c).collect(),
            covers: w.covers.clone(),
        };
        let utility = match &self.utility {
            UtilityFunction::WeightedCoverage(w) => UtilityFunction::WeightedCoverage(coverage(w)),
            UtilityFunction::CoverageWithPenalty(p) => {
                UtilityFunction::CoverageWithPenalty(crate::utility::CoverageWithPenalty {
                    coverage: coverage(&p.coverage),
                    penalties: p.penalties.iter().map(c).collect(),
                })
            }
            UtilityFunction::VersionSpace(v) => UtilityFunction::VersionSpace(crate::utility::VersionSpace {
                hypotheses: v
                    .hypotheses
                    .iter()
                    .map(|h| crate::utility::Hypothesis {
                        answers: h.answers.clone(),
                        mass: c(&h.mass),
                    })
                    .collect(),
            }),
            UtilityFunction::Tabular(t) => UtilityFunction::Tabular(crate::utility::Tabular::new(
                self.n(),
                t.entries().map(|(k, v)| (k.clone(), c(v))),
            )),
        };
        Instance {
            id: self.id.clone(),
            states: self.states.clone(),
            costs: CostFunction::new(self.costs.as_slice().iter().map(c).collect())
                .expect("costs stay nonnegative under conversion"),
            prior,
            utility,
            cap: self.cap,
        }
    }
}
