use std::cell::RefCell;
use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{ItemId, PartialRealization, Prior, StateLabel};
use crate::scalar::Scalar;

/// Default number of conditioned draws per Monte-Carlo marginal.
pub const DEFAULT_MC_SAMPLES: usize = 1024;

/// How conditional expectations are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginalMode {
    /// Enumerate the conditional joint distribution of the relevant items.
    #[default]
    Exact,
    /// Average over `samples` conditioned draws from the engine's stream.
    MonteCarlo { samples: usize },
}

type History = Vec<(ItemId, StateLabel)>;
type CacheKey = (ItemId, Vec<ItemId>, History);

/// Computes `Δ(e | S, ψ)` and `E[f(S, Φ) | ψ]` for one instance.
///
/// Exact results are memoized. The engine is single-threaded; parallel
/// evaluators build one engine per worker. In Monte-Carlo mode the engine owns
/// the random stream shared by every marginal of a run.
pub struct MarginalEngine<'a, S> {
    instance: &'a Instance<S>,
    mode: MarginalMode,
    cache: RefCell<HashMap<CacheKey, S>>,
    rng: RefCell<ChaCha8Rng>,
    probe: RefCell<Option<Vec<History>>>,
}

const EXPECTATION: ItemId = usize::MAX;

impl<'a, S: Scalar> MarginalEngine<'a, S> {
    pub fn new(instance: &'a Instance<S>, mode: MarginalMode) -> Self {
        Self::with_seed(instance, mode, 0)
    }

    pub fn exact(instance: &'a Instance<S>) -> Self {
        Self::new(instance, MarginalMode::Exact)
    }

    pub fn with_seed(instance: &'a Instance<S>, mode: MarginalMode, seed: u64) -> Self {
        MarginalEngine {
            instance,
            mode,
            cache: RefCell::new(HashMap::new()),
            rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed)),
            probe: RefCell::new(None),
        }
    }

    pub fn instance(&self) -> &'a Instance<S> {
        self.instance
    }

    pub fn mode(&self) -> MarginalMode {
        self.mode
    }

    /// Starts recording the information state of every marginal query.
    pub fn start_probe(&self) {
        *self.probe.borrow_mut() = Some(Vec::new());
    }

    /// Stops recording and returns the canonical histories seen.
    pub fn take_probe(&self) -> Vec<Vec<(ItemId, StateLabel)>> {
        self.probe.borrow_mut().take().unwrap_or_default()
    }

    fn record(&self, psi: &PartialRealization) {
        if let Some(log) = self.probe.borrow_mut().as_mut() {
            log.push(psi.canonical());
        }
    }

    fn real_sorted(&self, items: &[ItemId]) -> Vec<ItemId> {
        let mut out: Vec<ItemId> = items.iter().copied().filter(|&e| !self.instance.is_dummy(e)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Key part for `ψ`: under independence only the observations of the
    /// relevant items matter.
    fn history_key(&self, psi: &PartialRealization, relevant: &[ItemId]) -> Result<Vec<(ItemId, StateLabel)>> {
        let prior = self.instance.prior();
        match prior {
            Prior::Independent(_) => {
                if !(prior.probability_of(psi) > S::zero()) {
                    return Err(Error::Conditioning(format!("observation {:?}", psi.canonical())));
                }
                let mut key: Vec<_> = psi.iter().filter(|(e, _)| relevant.binary_search(e).is_ok()).collect();
                key.sort_unstable();
                Ok(key)
            }
            Prior::Explicit(_) => Ok(psi.canonical()),
        }
    }

    /// `Δ(e | S, ψ) = E[f(S ∪ {e}, Φ) − f(S, Φ) | Φ ∼ ψ]`. Zero for dummies
    /// and for `e ∈ S`.
    pub fn marginal(&self, e: ItemId, selected: &[ItemId], psi: &PartialRealization) -> Result<S> {
        self.record(psi);
        if self.instance.is_dummy(e) || selected.contains(&e) {
            return Ok(S::zero());
        }
        let base = self.real_sorted(selected);
        match self.mode {
            MarginalMode::Exact => {
                let mut with_e = base.clone();
                let pos = with_e.binary_search(&e).unwrap_err();
                with_e.insert(pos, e);
                let key = (e, base.clone(), self.history_key(psi, &with_e)?);
                if let Some(v) = self.cache.borrow().get(&key) {
                    return Ok(*v);
                }
                let f = self.instance.utility();
                let mut total = S::zero();
                for (states, p) in self.instance.prior().joint(&with_e, psi)? {
                    let obs: Vec<_> = with_e.iter().copied().zip(states).collect();
                    let without: Vec<_> = obs.iter().copied().filter(|&(i, _)| i != e).collect();
                    total = total + p * (f.evaluate_observed(&obs)? - f.evaluate_observed(&without)?);
                }
                self.cache.borrow_mut().insert(key, total);
                Ok(total)
            }
            MarginalMode::MonteCarlo { samples } => {
                let mut with_e = base.clone();
                with_e.push(e);
                let mut rng = self.rng.borrow_mut();
                let mut total = S::zero();
                for _ in 0..samples.max(1) {
                    let phi = self.instance.prior().sample(psi, &mut *rng)?;
                    total = total + self.instance.evaluate(&with_e, &phi)? - self.instance.evaluate(&base, &phi)?;
                }
                Ok(total / S::of(samples.max(1) as f64))
            }
        }
    }

    /// Marginal gain per unit cost. Zero-cost real items have no density.
    pub fn density(&self, e: ItemId, selected: &[ItemId], psi: &PartialRealization) -> Result<S> {
        let c = self.instance.cost(e);
        if !(c > S::zero()) {
            return Err(Error::Config(format!("item {e} has zero cost; density undefined")));
        }
        Ok(self.marginal(e, selected, psi)? / c)
    }

    /// `E[f(S, Φ) | Φ ∼ ψ]`, always computed exactly.
    pub fn expected_value(&self, items: &[ItemId], psi: &PartialRealization) -> Result<S> {
        let set = self.real_sorted(items);
        let key = (EXPECTATION, set.clone(), self.history_key(psi, &set)?);
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let f = self.instance.utility();
        let mut total = S::zero();
        for (states, p) in self.instance.prior().joint(&set, psi)? {
            let obs: Vec<_> = set.iter().copied().zip(states).collect();
            total = total + p * f.evaluate_observed(&obs)?;
        }
        self.cache.borrow_mut().insert(key, total);
        Ok(total)
    }
}
