//! Items, states, realizations and priors.
//!
//! Item ids are dense: `0..n` are the real items of an instance and any id
//! `>= n` is a dummy item. Dummies carry a single state (label `0`), cost
//! nothing and never change the utility; they exist only inside runs of the
//! cardinality-constrained greedy policy.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type ItemId = usize;
pub type StateLabel = usize;

/// One element of an (expanded) ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub id: ItemId,
    pub is_dummy: bool,
}

/// Number of states available to each real item. Labels are `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    counts: Vec<usize>,
}

impl StateSpace {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if let Some(e) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Model(format!("item {e} has no possible state")));
        }
        Ok(StateSpace { counts })
    }

    /// Every item shares the same `states` labels.
    pub fn uniform(n: usize, states: usize) -> Result<Self> {
        Self::new(vec![states; n])
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// Number of states of `e`; dummies have exactly one.
    pub fn states_of(&self, e: ItemId) -> usize {
        self.counts.get(e).copied().unwrap_or(1)
    }

    pub fn max_states(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(1)
    }

    pub fn is_legal(&self, e: ItemId, s: StateLabel) -> bool {
        s < self.states_of(e)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

/// A full assignment of states to the real items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Realization(Vec<StateLabel>);

impl Realization {
    pub fn new(states: Vec<StateLabel>) -> Self {
        Realization(states)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// State of `e`; dummy ids beyond the real items read as state `0`.
    pub fn state(&self, e: ItemId) -> StateLabel {
        self.0.get(e).copied().unwrap_or(0)
    }

    pub fn states(&self) -> &[StateLabel] {
        &self.0
    }

    /// Pointwise agreement with `psi` on its domain.
    pub fn agrees_with(&self, psi: &PartialRealization) -> bool {
        psi.iter().all(|(e, s)| self.state(e) == s)
    }

    /// The observations `{(e, φ(e)) : e ∈ items}` restricted to real items.
    pub fn observe(&self, items: &[ItemId]) -> Vec<(ItemId, StateLabel)> {
        items
            .iter()
            .filter(|&&e| e < self.0.len())
            .map(|&e| (e, self.0[e]))
            .collect()
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Observed `(item, state)` pairs; insertion order is preserved, equality
/// is set equality.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialRealization {
    obs: IndexMap<ItemId, StateLabel>,
}

impl PartialRealization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ItemId, StateLabel)>) -> Result<Self> {
        let mut psi = Self::new();
        for (e, s) in pairs {
            psi.insert(e, s)?;
        }
        Ok(psi)
    }

    /// Adds an observation; re-observing an item with a different state is a
    /// model error.
    pub fn insert(&mut self, e: ItemId, s: StateLabel) -> Result<()> {
        match self.obs.get(&e) {
            Some(&old) if old != s => Err(Error::Model(format!(
                "item {e} already observed in state {old}, cannot observe {s}"
            ))),
            Some(_) => Ok(()),
            None => {
                self.obs.insert(e, s);
                Ok(())
            }
        }
    }

    pub fn extend(&mut self, pairs: impl IntoIterator<Item = (ItemId, StateLabel)>) -> Result<()> {
        for (e, s) in pairs {
            self.insert(e, s)?;
        }
        Ok(())
    }

    pub fn get(&self, e: ItemId) -> Option<StateLabel> {
        self.obs.get(&e).copied()
    }

    pub fn contains(&self, e: ItemId) -> bool {
        self.obs.contains_key(&e)
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    /// Observations in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (ItemId, StateLabel)> + '_ {
        self.obs.iter().map(|(&e, &s)| (e, s))
    }

    /// `dom(ψ)` in insertion order.
    pub fn domain(&self) -> Vec<ItemId> {
        self.obs.keys().copied().collect()
    }

    /// Sorted pairs; the memoization key of a history.
    pub fn canonical(&self) -> Vec<(ItemId, StateLabel)> {
        let mut pairs: Vec<_> = self.iter().collect();
        pairs.sort_unstable();
        pairs
    }

    /// `ψ|_items`, keeping only observations of the listed items.
    pub fn restricted_to(&self, items: &[ItemId]) -> PartialRealization {
        PartialRealization {
            obs: self
                .obs
                .iter()
                .filter(|(e, _)| items.contains(e))
                .map(|(&e, &s)| (e, s))
                .collect(),
        }
    }

    /// `self ⊆ other`: domain containment plus pointwise agreement.
    pub fn is_subrealization(&self, other: &PartialRealization) -> bool {
        self.iter().all(|(e, s)| other.get(e) == Some(s))
    }
}

/// Free-standing form of [`PartialRealization::is_subrealization`].
pub fn is_subrealization(psi: &PartialRealization, other: &PartialRealization) -> bool {
    psi.is_subrealization(other)
}

/// Prior distribution over realizations.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior<S> {
    /// Item states are independent; `probs[e][s] = Pr[Φ(e) = s]`.
    Independent(Vec<Vec<S>>),
    /// Explicit probability table, each realization listed at most once.
    Explicit(Vec<(Realization, S)>),
}

/// Joint conditional distribution of the states of a list of items.
pub type JointDistribution<S> = Vec<(Vec<StateLabel>, S)>;

impl<S: Scalar> Prior<S> {
    pub fn independent(probs: Vec<Vec<S>>) -> Result<Self> {
        let prior = Prior::Independent(probs);
        prior.check_normalized()?;
        Ok(prior)
    }

    pub fn explicit(rows: Vec<(Realization, S)>) -> Result<Self> {
        let prior = Prior::Explicit(rows);
        prior.check_normalized()?;
        Ok(prior)
    }

    /// Point mass on one realization.
    pub fn point_mass(phi: Realization) -> Self {
        Prior::Explicit(vec![(phi, S::one())])
    }

    fn check_normalized(&self) -> Result<()> {
        let tol = S::tolerance();
        match self {
            Prior::Independent(probs) => {
                for (e, dist) in probs.iter().enumerate() {
                    if dist.iter().any(|&p| !(p >= S::zero())) {
                        return Err(Error::Model(format!("item {e} has a negative probability")));
                    }
                    let total: S = dist.iter().copied().sum();
                    if (total - S::one()).abs() > tol {
                        return Err(Error::Model(format!(
                            "item {e} probabilities sum to {total}, expected 1"
                        )));
                    }
                }
            }
            Prior::Explicit(rows) => {
                if rows.iter().any(|(_, p)| !(*p >= S::zero())) {
                    return Err(Error::Model("negative row probability".into()));
                }
                let total: S = rows.iter().map(|(_, p)| *p).sum();
                if (total - S::one()).abs() > tol {
                    return Err(Error::Model(format!("rows sum to {total}, expected 1")));
                }
                let mut seen = std::collections::HashSet::new();
                for (phi, _) in rows {
                    if !seen.insert(phi) {
                        return Err(Error::Model(format!("realization {phi} listed twice")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks item count and state legality against `space`.
    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        let n = space.n();
        match self {
            Prior::Independent(probs) => {
                if probs.len() != n {
                    return Err(Error::Model(format!(
                        "prior covers {} items, expected {n}",
                        probs.len()
                    )));
                }
                for (e, dist) in probs.iter().enumerate() {
                    if dist.len() != space.states_of(e) {
                        return Err(Error::Model(format!(
                            "item {e} has {} probabilities for {} states",
                            dist.len(),
                            space.states_of(e)
                        )));
                    }
                }
            }
            Prior::Explicit(rows) => {
                for (phi, _) in rows {
                    if phi.len() != n {
                        return Err(Error::Model(format!("realization {phi} has wrong length")));
                    }
                    if let Some(e) = (0..n).find(|&e| !space.is_legal(e, phi.state(e))) {
                        return Err(Error::Model(format!(
                            "realization {phi} has illegal state for item {e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match self {
            Prior::Independent(p) => p.len(),
            Prior::Explicit(rows) => rows.first().map_or(0, |(phi, _)| phi.len()),
        }
    }

    fn real_obs<'a>(&self, psi: &'a PartialRealization) -> impl Iterator<Item = (ItemId, StateLabel)> + 'a {
        let n = self.n();
        psi.iter().filter(move |&(e, _)| e < n)
    }

    /// `Pr[Φ ∼ ψ]`.
    pub fn probability_of(&self, psi: &PartialRealization) -> S {
        match self {
            Prior::Independent(probs) => self
                .real_obs(psi)
                .map(|(e, s)| probs[e].get(s).copied().unwrap_or_else(S::zero))
                .fold(S::one(), |acc, p| acc * p),
            Prior::Explicit(rows) => rows
                .iter()
                .filter(|(phi, _)| phi.agrees_with(psi))
                .map(|(_, p)| *p)
                .sum(),
        }
    }

    fn require_possible(&self, psi: &PartialRealization) -> Result<S> {
        let mass = self.probability_of(psi);
        if mass > S::zero() {
            Ok(mass)
        } else {
            Err(Error::Conditioning(format!("observation {:?}", psi.canonical())))
        }
    }

    /// `p(· | ψ)`.
    pub fn condition(&self, psi: &PartialRealization) -> Result<Prior<S>> {
        let mass = self.require_possible(psi)?;
        Ok(match self {
            Prior::Independent(probs) => {
                let mut probs = probs.clone();
                for (e, s) in self.real_obs(psi) {
                    for (label, p) in probs[e].iter_mut().enumerate() {
                        *p = if label == s { S::one() } else { S::zero() };
                    }
                }
                Prior::Independent(probs)
            }
            Prior::Explicit(rows) => Prior::Explicit(
                rows.iter()
                    .filter(|(phi, p)| *p > S::zero() && phi.agrees_with(psi))
                    .map(|(phi, p)| (phi.clone(), *p / mass))
                    .collect(),
            ),
        })
    }

    /// Number of positive-probability realizations, saturating.
    pub fn support_size(&self) -> u128 {
        match self {
            Prior::Independent(probs) => probs.iter().fold(1u128, |acc, dist| {
                acc.saturating_mul(dist.iter().filter(|&&p| p > S::zero()).count() as u128)
            }),
            Prior::Explicit(rows) => rows.iter().filter(|(_, p)| *p > S::zero()).count() as u128,
        }
    }

    /// All positive-probability realizations with their probabilities.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<(Realization, S)>> {
        let required = self.support_size();
        if required > cap as u128 {
            return Err(Error::CapExceeded {
                what: "realization enumeration",
                required,
                cap: cap as u128,
            });
        }
        Ok(match self {
            Prior::Explicit(rows) => rows.iter().filter(|(_, p)| *p > S::zero()).cloned().collect(),
            Prior::Independent(probs) => {
                let mut out = vec![(Vec::with_capacity(probs.len()), S::one())];
                for dist in probs {
                    let mut next = Vec::with_capacity(out.len() * dist.len());
                    for (prefix, p) in &out {
                        for (s, &q) in dist.iter().enumerate() {
                            if q > S::zero() {
                                let mut states = prefix.clone();
                                states.push(s);
                                next.push((states, *p * q));
                            }
                        }
                    }
                    out = next;
                }
                out.into_iter().map(|(states, p)| (Realization(states), p)).collect()
            }
        })
    }

    /// Joint distribution of the states of `items` (real items, distinct)
    /// conditional on `ψ`. Items in `dom(ψ)` are fixed to their observed
    /// state. Rows come out in a deterministic order.
    pub fn joint(&self, items: &[ItemId], psi: &PartialRealization) -> Result<JointDistribution<S>> {
        let mass = self.require_possible(psi)?;
        match self {
            Prior::Independent(probs) => {
                let mut out = vec![(Vec::with_capacity(items.len()), S::one())];
                for &e in items {
                    let dist = probs
                        .get(e)
                        .ok_or_else(|| Error::Model(format!("item {e} is not a real item")))?;
                    let mut next = Vec::with_capacity(out.len() * dist.len());
                    for (prefix, p) in &out {
                        if let Some(s) = psi.get(e) {
                            let mut states = prefix.clone();
                            states.push(s);
                            next.push((states, *p));
                        } else {
                            for (s, &q) in dist.iter().enumerate() {
                                if q > S::zero() {
                                    let mut states = prefix.clone();
                                    states.push(s);
                                    next.push((states, *p * q));
                                }
                            }
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
            Prior::Explicit(rows) => {
                let mut grouped: BTreeMap<Vec<StateLabel>, S> = BTreeMap::new();
                for (phi, p) in rows {
                    if *p > S::zero() && phi.agrees_with(psi) {
                        let key: Vec<_> = items.iter().map(|&e| phi.state(e)).collect();
                        let slot = grouped.entry(key).or_insert_with(S::zero);
                        *slot = *slot + *p;
                    }
                }
                Ok(grouped.into_iter().map(|(k, p)| (k, p / mass)).collect())
            }
        }
    }

    /// Draws `φ ∼ p(· | ψ)`.
    pub fn sample<R: Rng + ?Sized>(&self, psi: &PartialRealization, rng: &mut R) -> Result<Realization> {
        let mass = self.require_possible(psi)?;
        match self {
            Prior::Independent(probs) => {
                let states = probs
                    .iter()
                    .enumerate()
                    .map(|(e, dist)| match psi.get(e) {
                        Some(s) => s,
                        None => sample_index(dist.iter().copied(), S::one(), rng),
                    })
                    .collect();
                Ok(Realization(states))
            }
            Prior::Explicit(rows) => {
                let consistent: Vec<&(Realization, S)> = rows
                    .iter()
                    .filter(|(phi, p)| *p > S::zero() && phi.agrees_with(psi))
                    .collect();
                let i = sample_index(consistent.iter().map(|(_, p)| *p), mass, rng);
                Ok(consistent[i].0.clone())
            }
        }
    }
}

/// Inverse-CDF draw from unnormalized `weights` with the given total.
/// Never returns an index whose weight is zero.
pub(crate) fn sample_index<S: Scalar, R: Rng + ?Sized>(
    weights: impl IntoIterator<Item = S>,
    total: S,
    rng: &mut R,
) -> usize {
    let u = S::of(rng.gen::<f64>()) * total;
    let mut acc = S::zero();
    let mut last_positive = 0;
    for (i, w) in weights.into_iter().enumerate() {
        if w > S::zero() {
            acc = acc + w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Additive item costs; dummies cost nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction<S> {
    costs: Vec<S>,
}

impl<S: Scalar> CostFunction<S> {
    pub fn new(costs: Vec<S>) -> Result<Self> {
        if let Some(e) = costs.iter().position(|c| !(*c >= S::zero()) || !c.is_finite()) {
            return Err(Error::Model(format!("item {e} has an invalid cost")));
        }
        Ok(CostFunction { costs })
    }

    pub fn unit(n: usize) -> Self {
        CostFunction {
            costs: vec![S::one(); n],
        }
    }

    pub fn cost(&self, e: ItemId) -> S {
        self.costs.get(e).copied().unwrap_or_else(S::zero)
    }

    /// `c(S) = Σ_{e∈S} c(e)`.
    pub fn total(&self, items: &[ItemId]) -> S {
        items.iter().map(|&e| self.cost(e)).sum()
    }

    /// Cheapest real item.
    pub fn min(&self) -> Option<S> {
        self.costs.iter().copied().reduce(S::min)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.costs
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn psi(pairs: &[(ItemId, StateLabel)]) -> PartialRealization {
        PartialRealization::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn four_rows() -> Prior<f64> {
        Prior::explicit(vec![
            (Realization::new(vec![1, 0, 0]), 0.1),
            (Realization::new(vec![1, 1, 0]), 0.3),
            (Realization::new(vec![0, 1, 1]), 0.4),
            (Realization::new(vec![0, 0, 1]), 0.2),
        ])
        .unwrap()
    }

    #[test]
    fn consistency_is_pointwise_agreement() {
        let phi = Realization::new(vec![1, 0]);
        assert!(phi.agrees_with(&PartialRealization::new()));
        assert!(phi.agrees_with(&psi(&[(0, 1)])));
        assert!(!phi.agrees_with(&psi(&[(0, 0)])));
    }

    #[test]
    fn consistent_rows_match_table_filter() {
        let prior = four_rows();
        let rows = prior.enumerate(100).unwrap();
        let consistent = rows.iter().filter(|(phi, _)| phi.agrees_with(&psi(&[(0, 1)]))).count();
        assert_eq!(consistent, 2);
    }

    #[test]
    fn subrealization_relation() {
        let empty = PartialRealization::new();
        let b = psi(&[(0, 0), (1, 1)]);
        assert!(empty.is_subrealization(&b));
        assert!(b.is_subrealization(&b));
        assert!(!psi(&[(0, 1)]).is_subrealization(&b));
        assert!(psi(&[(1, 1)]).is_subrealization(&b));
    }

    #[test]
    fn conflicting_observation_rejected() {
        let mut p = psi(&[(0, 1)]);
        assert!(p.insert(0, 1).is_ok());
        assert!(matches!(p.insert(0, 0), Err(Error::Model(_))));
    }

    #[test]
    fn equality_ignores_insertion_order() {
        assert_eq!(psi(&[(0, 1), (2, 0)]), psi(&[(2, 0), (0, 1)]));
    }

    #[test]
    fn conditioning_on_nothing_is_identity() {
        let prior = four_rows();
        assert_eq!(prior.condition(&PartialRealization::new()).unwrap(), prior);
        let ind = Prior::independent(vec![vec![0.3, 0.7], vec![0.5, 0.5]]).unwrap();
        assert_eq!(ind.condition(&PartialRealization::new()).unwrap(), ind);
    }

    #[test]
    fn independent_conditioning_collapses_observed_item() {
        let ind = Prior::independent(vec![vec![0.3, 0.7], vec![0.2, 0.8]]).unwrap();
        let cond = ind.condition(&psi(&[(0, 1)])).unwrap();
        assert_eq!(cond, Prior::Independent(vec![vec![0.0, 1.0], vec![0.2, 0.8]]));
    }

    #[test]
    fn explicit_conditioning_renormalizes() {
        // rows with a=1: 0.1 and 0.3 -> 0.25 and 0.75
        let cond = four_rows().condition(&psi(&[(0, 1)])).unwrap();
        let Prior::Explicit(rows) = cond else { panic!() };
        assert_eq!(rows.len(), 2);
        assert!((rows[0].1 - 0.25).abs() < 1e-12);
        assert!((rows[1].1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_conditioning_is_an_error() {
        let ind = Prior::independent(vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(ind.condition(&psi(&[(0, 1)])), Err(Error::Conditioning(_))));
        assert!(matches!(
            four_rows().condition(&psi(&[(0, 1), (2, 1)])),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn enumeration_of_independent_priors() {
        let ind = Prior::independent(vec![vec![0.5, 0.5]; 2]).unwrap();
        let rows = ind.enumerate(10).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|(_, p)| *p == 0.25));

        let ind = Prior::independent(vec![vec![0.1, 0.9], vec![0.4, 0.6], vec![0.7, 0.3]]).unwrap();
        let rows = ind.enumerate(10).unwrap();
        assert_eq!(rows.len(), 8);
        let probs = [[0.1, 0.9], [0.4, 0.6], [0.7, 0.3]];
        for (phi, p) in &rows {
            let expected: f64 = (0..3).map(|e| probs[e][phi.state(e)]).product();
            assert!((p - expected).abs() < 1e-15);
        }
        assert!(matches!(ind.enumerate(7), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn explicit_enumeration_is_the_table() {
        let prior = four_rows();
        let Prior::Explicit(rows) = &prior else { panic!() };
        assert_eq!(&prior.enumerate(10).unwrap(), rows);
    }

    #[test]
    fn invalid_priors_rejected() {
        assert!(Prior::<f64>::independent(vec![vec![0.5, 0.4]]).is_err());
        assert!(Prior::<f64>::independent(vec![vec![1.2, -0.2]]).is_err());
        let phi = Realization::new(vec![0]);
        assert!(Prior::explicit(vec![(phi.clone(), 0.5), (phi, 0.5)]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_consistent() {
        let prior = four_rows();
        let cond = psi(&[(1, 1)]);
        let a = prior.sample(&cond, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = prior.sample(&cond, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            assert!(prior.sample(&cond, &mut rng).unwrap().agrees_with(&cond));
        }
    }

    #[test]
    fn point_mass_always_sampled() {
        let phi = Realization::new(vec![2, 0, 1]);
        let prior = Prior::<f64>::point_mass(phi.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(prior.sample(&PartialRealization::new(), &mut rng).unwrap(), phi);
        }
    }

    #[test]
    fn sampling_frequency_matches_marginal() {
        let prior = Prior::independent(vec![vec![0.3, 0.7]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 100_000;
        let ones = (0..trials)
            .filter(|_| prior.sample(&PartialRealization::new(), &mut rng).unwrap().state(0) == 1)
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.7).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn joint_marginalizes_explicit_rows() {
        let prior = four_rows();
        let joint = prior.joint(&[2], &PartialRealization::new()).unwrap();
        assert_eq!(joint.len(), 2);
        assert!((joint[0].1 - 0.4).abs() < 1e-12 && joint[0].0 == vec![0]);
        assert!((joint[1].1 - 0.6).abs() < 1e-12 && joint[1].0 == vec![1]);
        let joint = prior.joint(&[0, 2], &psi(&[(1, 1)])).unwrap();
        assert_eq!(joint.len(), 2);
        assert!((joint.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn costs_are_additive() {
        let c = CostFunction::new(vec![1.0, 2.5, 0.5]).unwrap();
        assert_eq!(c.total(&[0, 1]), 3.5);
        assert_eq!(c.cost(7), 0.0);
        assert_eq!(c.min(), Some(0.5));
        assert!(CostFunction::new(vec![-1.0]).is_err());
    }
}
