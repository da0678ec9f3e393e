//! Selection policies and the run machinery they execute against.
//!
//! A policy is ordinary imperative code that talks to a [`Run`]: it asks the
//! run for marginals, selects items into the current batch, closes batches to
//! reveal states, and draws its internal coins through the run's [`Driver`].
//! Simulation drives a run with a fixed realization and a seeded stream; the
//! exact evaluator replays the same code along every branch of the joint
//! coin/observation tree.

mod batch_budget;
mod combinators;
mod density;
mod greedy;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use batch_budget::{batch_budget_t, BatchBudget};
pub use combinators::{
    concatenate, level_truncate, truncate_batches, BatchTruncated, Concatenation, EmptyPolicy, FixedSet, LevelTruncated,
};
pub use density::{best_singleton, BestSingleton, DensityGreedy, MixedKnapsack, MixtureWeights};
pub use greedy::{expanded_ground, top_k_set, PartialAdaptiveGreedy, TopK};

use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance};
use crate::model::{sample_index, ItemId, PartialRealization, Realization, StateLabel};
use crate::scalar::Scalar;
use crate::utility::{MarginalEngine, MarginalMode};

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Termination {
    BudgetExhausted,
    CardinalityReached,
    NoPositiveDensity,
    GroundExhausted,
    TruncatedAtT,
}

/// Items selected against one information state, and the states revealed
/// when the batch closed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Batch {
    pub items: Vec<ItemId>,
    pub observed: Vec<(ItemId, StateLabel)>,
}

/// Audit record of one selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord<S> {
    pub item: ItemId,
    /// 1-based batch index.
    pub batch: usize,
    /// First item of its batch.
    pub opened_batch: bool,
    /// The selecting policy's information state when it chose the item,
    /// sorted by item.
    pub history: Vec<(ItemId, StateLabel)>,
    /// Items the selecting policy had already chosen (`S_{t-1}`).
    pub prior_selected: Vec<ItemId>,
    /// Greedy quantity of the chosen step (set marginal or density).
    pub score: S,
    /// `α ×` the reference quantity of the batch under `history`.
    pub threshold: S,
    /// The batch trigger as evaluated before any new observation:
    /// `(left side, α × right side)`.
    pub trigger: Option<(S, S)>,
}

/// Full record of one policy run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace<S> {
    pub batches: Vec<Batch>,
    pub steps: Vec<StepRecord<S>>,
    pub termination: Termination,
    /// `f(S, φ)` when the run was simulated against a known realization.
    pub utility: Option<S>,
    /// Number of dummy items in the run's expanded ground set.
    pub dummies: usize,
}

impl<S: Scalar> RunTrace<S> {
    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    /// Selected items in selection order, dummies included.
    pub fn selected(&self) -> Vec<ItemId> {
        self.batches.iter().flat_map(|b| b.items.iter().copied()).collect()
    }

    /// Sorted selected set.
    pub fn selected_set(&self) -> Vec<ItemId> {
        let mut s = self.selected();
        s.sort_unstable();
        s
    }

    /// Sorted selected set with dummies stripped.
    pub fn real_selected(&self, instance: &Instance<S>) -> Vec<ItemId> {
        self.selected_set()
            .into_iter()
            .filter(|&e| !instance.is_dummy(e))
            .collect()
    }
}

/// One resolved random event along a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Choice {
    /// Index drawn from a discrete distribution.
    Pick(usize),
    /// States of a closed batch's real items.
    Observe(Vec<StateLabel>),
}

/// Non-local exits of a running policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Interrupt<S> {
    /// A truncation cap fired; unwinds to the wrapper owning `frame`.
    Halt {
        frame: usize,
        reason: Termination,
    },
    /// The driver reached an unexplored random event; the alternatives and
    /// their probabilities.
    Branch(Vec<(Choice, S)>),
    Failed(Error),
}

impl<S> From<Error> for Interrupt<S> {
    fn from(e: Error) -> Self {
        Interrupt::Failed(e)
    }
}

pub type Flow<T, S> = std::result::Result<T, Interrupt<S>>;

/// Source of a run's randomness: internal coins and revealed states.
pub trait Driver<S> {
    /// Index drawn with probability proportional to `weights`.
    fn choose(&mut self, weights: &[S]) -> Flow<usize, S>;
    fn uniform(&mut self, n: usize) -> Flow<usize, S>;
    /// Reveals the states of real items.
    fn observe(&mut self, items: &[ItemId]) -> Flow<Vec<StateLabel>, S>;
}

/// Drives a run against a fixed realization with a seeded stream.
pub struct Simulation<'p, R> {
    pub realization: &'p Realization,
    pub rng: R,
}

impl<S: Scalar, R: Rng> Driver<S> for Simulation<'_, R> {
    fn choose(&mut self, weights: &[S]) -> Flow<usize, S> {
        let total: S = weights.iter().copied().sum();
        if !(total > S::zero()) {
            return Err(Error::Evaluation("choice with no positive weight".into()).into());
        }
        Ok(sample_index(weights.iter().copied(), total, &mut self.rng))
    }

    fn uniform(&mut self, n: usize) -> Flow<usize, S> {
        if n == 0 {
            return Err(Error::Evaluation("uniform choice over nothing".into()).into());
        }
        Ok(self.rng.gen_range(0..n))
    }

    fn observe(&mut self, items: &[ItemId]) -> Flow<Vec<StateLabel>, S> {
        Ok(items.iter().map(|&e| self.realization.state(e)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CapKind {
    Batches,
    Selections,
}

#[derive(Debug, Clone, Copy)]
struct Cap {
    frame: usize,
    kind: CapKind,
    limit: usize,
}

/// Execution context of one policy run.
pub struct Run<'r, S> {
    engine: &'r MarginalEngine<'r, S>,
    driver: &'r mut dyn Driver<S>,
    dummies: usize,
    unavailable: Vec<bool>,
    batches: Vec<Batch>,
    steps: Vec<StepRecord<S>>,
    batch_open: bool,
    selections: usize,
    caps: Vec<Cap>,
    next_frame: usize,
}

impl<'r, S: Scalar> Run<'r, S> {
    /// `preselected` items are treated as already chosen (never available)
    /// but are not part of the trace.
    pub fn new(
        engine: &'r MarginalEngine<'r, S>,
        driver: &'r mut dyn Driver<S>,
        dummies: usize,
        preselected: &[ItemId],
    ) -> Self {
        let mut unavailable = vec![false; engine.instance().n() + dummies];
        for &e in preselected {
            if let Some(u) = unavailable.get_mut(e) {
                *u = true;
            }
        }
        Run {
            engine,
            driver,
            dummies,
            unavailable,
            batches: Vec::new(),
            steps: Vec::new(),
            batch_open: false,
            selections: 0,
            caps: Vec::new(),
            next_frame: 0,
        }
    }

    pub fn instance(&self) -> &'r Instance<S> {
        self.engine.instance()
    }

    pub fn engine(&self) -> &'r MarginalEngine<'r, S> {
        self.engine
    }

    /// Size of the expanded ground set `E ∪ V`.
    pub fn ground_size(&self) -> usize {
        self.unavailable.len()
    }

    pub fn is_available(&self, e: ItemId) -> bool {
        !self.unavailable.get(e).copied().unwrap_or(true)
    }

    /// Items of the expanded ground set not yet selected, ascending.
    pub fn available(&self) -> Vec<ItemId> {
        (0..self.unavailable.len()).filter(|&e| !self.unavailable[e]).collect()
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn marginal(&self, e: ItemId, selected: &[ItemId], psi: &PartialRealization) -> Flow<S, S> {
        Ok(self.engine.marginal(e, selected, psi)?)
    }

    pub fn uniform(&mut self, n: usize) -> Flow<usize, S> {
        self.driver.uniform(n)
    }

    pub fn choose(&mut self, weights: &[S]) -> Flow<usize, S> {
        self.driver.choose(weights)
    }

    fn violated_cap(&self, opening: bool) -> Option<Cap> {
        self.caps
            .iter()
            .find(|cap| match cap.kind {
                CapKind::Batches => opening && self.batches.len() >= cap.limit,
                CapKind::Selections => self.selections >= cap.limit,
            })
            .copied()
    }

    /// Adds `item` to the current batch, opening a new batch if none is open.
    /// The record's `item`, `batch` and `opened_batch` fields are filled in
    /// here.
    pub fn select(&mut self, item: ItemId, mut record: StepRecord<S>) -> Flow<(), S> {
        if !self.is_available(item) {
            return Err(Error::Evaluation(format!("item {item} is not available")).into());
        }
        let opening = !self.batch_open;
        if let Some(cap) = self.violated_cap(opening) {
            let reason = match cap.kind {
                CapKind::Batches => Termination::TruncatedAtT,
                CapKind::Selections => Termination::CardinalityReached,
            };
            return Err(Interrupt::Halt {
                frame: cap.frame,
                reason,
            });
        }
        if opening {
            self.batches.push(Batch::default());
            self.batch_open = true;
        }
        self.batches.last_mut().expect("open batch").items.push(item);
        self.unavailable[item] = true;
        self.selections += 1;
        record.item = item;
        record.batch = self.batches.len();
        record.opened_batch = opening;
        self.steps.push(record);
        Ok(())
    }

    /// Closes the current batch and reveals the states of its items. Dummy
    /// items reveal state `0`. Returns nothing when no batch is open.
    pub fn close_batch(&mut self) -> Flow<Vec<(ItemId, StateLabel)>, S> {
        if !self.batch_open {
            return Ok(Vec::new());
        }
        let instance = self.engine.instance();
        let items = self.batches.last().expect("open batch").items.clone();
        let real: Vec<ItemId> = items.iter().copied().filter(|&e| !instance.is_dummy(e)).collect();
        let states = self.driver.observe(&real)?;
        let revealed: Vec<(ItemId, StateLabel)> = items
            .iter()
            .map(|&e| match real.iter().position(|&r| r == e) {
                Some(i) => (e, states[i]),
                None => (e, 0),
            })
            .collect();
        self.batches.last_mut().expect("open batch").observed = revealed.clone();
        self.batch_open = false;
        Ok(revealed)
    }

    /// Ends the current batch without revealing anything; the next selection
    /// opens a new batch. Used between concatenated policies.
    pub fn end_segment(&mut self) {
        self.batch_open = false;
    }

    /// Installs a cap `limit` batches or selections beyond the current
    /// counts; returns the frame id carried by the resulting halt.
    pub(crate) fn push_cap(&mut self, kind: CapKind, limit: usize) -> usize {
        let frame = self.next_frame;
        self.next_frame += 1;
        let base = match kind {
            CapKind::Batches => self.batches.len(),
            CapKind::Selections => self.selections,
        };
        self.caps.push(Cap {
            frame,
            kind,
            limit: base.saturating_add(limit),
        });
        frame
    }

    pub(crate) fn pop_cap(&mut self, frame: usize) {
        self.caps.retain(|c| c.frame != frame);
    }

    fn finish(self, termination: Termination) -> RunTrace<S> {
        RunTrace {
            batches: self.batches,
            steps: self.steps,
            termination,
            utility: None,
            dummies: self.dummies,
        }
    }
}

impl<S: Scalar> StepRecord<S> {
    /// Record with the selection-specific fields left for [`Run::select`].
    pub fn new(history: &PartialRealization, prior_selected: &[ItemId], score: S, threshold: S) -> Self {
        StepRecord {
            item: 0,
            batch: 0,
            opened_batch: false,
            history: history.canonical(),
            prior_selected: prior_selected.to_vec(),
            score,
            threshold,
            trigger: None,
        }
    }

    pub fn with_trigger(mut self, lhs: S, rhs: S) -> Self {
        self.trigger = Some((lhs, rhs));
        self
    }
}

/// A (possibly randomized) batch-mode selection policy.
pub trait Policy<S: Scalar>: Send + Sync {
    fn name(&self) -> String;

    /// Dummy items this policy needs in the expanded ground set.
    fn dummies(&self) -> usize {
        0
    }

    /// Runs the policy from a fresh information state.
    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S>;
}

impl<S: Scalar, P: Policy<S> + ?Sized> Policy<S> for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dummies(&self) -> usize {
        (**self).dummies()
    }
    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        (**self).execute(run)
    }
}

impl<S: Scalar, P: Policy<S> + ?Sized> Policy<S> for &P {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dummies(&self) -> usize {
        (**self).dummies()
    }
    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        (**self).execute(run)
    }
}

/// Executes `policy` once; a halt escaping every wrapper ends the run.
pub fn run_policy<'r, S: Scalar, P: Policy<S> + ?Sized>(
    policy: &P,
    engine: &'r MarginalEngine<'r, S>,
    driver: &'r mut dyn Driver<S>,
    preselected: &[ItemId],
) -> Flow<RunTrace<S>, S> {
    let mut run = Run::new(engine, driver, policy.dummies(), preselected);
    match policy.execute(&mut run) {
        Ok(t) => Ok(run.finish(t)),
        Err(Interrupt::Halt { reason, .. }) => Ok(run.finish(reason)),
        Err(other) => Err(other),
    }
}

/// Simulates `policy` against the realization `phi`. The final batch's
/// states are filled in from `phi` and the realized utility is recorded.
pub fn simulate<S: Scalar, P: Policy<S> + ?Sized, R: Rng>(
    policy: &P,
    engine: &MarginalEngine<'_, S>,
    phi: &Realization,
    rng: R,
) -> Result<RunTrace<S>> {
    let instance = engine.instance();
    if phi.len() != instance.n() {
        return Err(Error::Model("realization does not match the instance".into()));
    }
    let mut driver = Simulation { realization: phi, rng };
    let mut trace = match run_policy(policy, engine, &mut driver, &[]) {
        Ok(trace) => trace,
        Err(Interrupt::Failed(e)) => return Err(e),
        Err(other) => {
            return Err(Error::Evaluation(format!(
                "unexpected interrupt in simulation: {other:?}"
            )))
        }
    };
    if let Some(last) = trace.batches.last_mut() {
        if last.observed.is_empty() {
            last.observed = last.items.iter().map(|&e| (e, phi.state(e))).collect();
        }
    }
    trace.utility = Some(instance.evaluate(&trace.selected(), phi)?);
    Ok(trace)
}

/// Parameters shared by the built-in policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig<S> {
    /// Degree of adaptivity in `[0, 1]`.
    pub alpha: S,
    pub constraint: Constraint<S>,
    pub marginal_mode: MarginalMode,
    pub seed: u64,
}

impl<S: Scalar> PolicyConfig<S> {
    pub fn new(alpha: S, constraint: Constraint<S>) -> Self {
        PolicyConfig {
            alpha,
            constraint,
            marginal_mode: MarginalMode::Exact,
            seed: 0,
        }
    }

    pub fn validate(&self, instance: &Instance<S>) -> Result<()> {
        if !(self.alpha >= S::zero() && self.alpha <= S::one()) {
            return Err(Error::Config(format!("alpha {} is outside [0, 1]", self.alpha)));
        }
        instance.validate_for(&self.constraint)?;
        if let Constraint::Knapsack(b) = self.constraint {
            if let Some(c_min) = instance.c_min() {
                if b < c_min {
                    return Err(Error::Config(format!(
                        "budget {b} is below the cheapest item cost {c_min}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn engine<'a>(&self, instance: &'a Instance<S>) -> MarginalEngine<'a, S> {
        MarginalEngine::with_seed(instance, self.marginal_mode, self.seed)
    }
}

fn require_cardinality<S: Scalar>(config: &PolicyConfig<S>) -> Result<usize> {
    match config.constraint {
        Constraint::Cardinality(k) => Ok(k),
        Constraint::Knapsack(_) => Err(Error::Config("policy needs a cardinality constraint".into())),
    }
}

fn require_knapsack<S: Scalar>(config: &PolicyConfig<S>) -> Result<S> {
    match config.constraint {
        Constraint::Knapsack(b) => Ok(b),
        Constraint::Cardinality(_) => Err(Error::Config("policy needs a knapsack constraint".into())),
    }
}

/// Simulates the partial-adaptive greedy policy on `phi`.
pub fn run_partial_adaptive_greedy<S: Scalar, R: Rng>(
    instance: &Instance<S>,
    config: &PolicyConfig<S>,
    phi: &Realization,
    rng: R,
) -> Result<RunTrace<S>> {
    config.validate(instance)?;
    let policy = PartialAdaptiveGreedy::new(config.alpha, require_cardinality(config)?)?;
    simulate(&policy, &config.engine(instance), phi, rng)
}

/// Simulates the partial-adaptive density-greedy policy on `phi`.
pub fn run_density_greedy<S: Scalar, R: Rng>(
    instance: &Instance<S>,
    config: &PolicyConfig<S>,
    phi: &Realization,
    rng: R,
) -> Result<RunTrace<S>> {
    config.validate(instance)?;
    let policy = DensityGreedy::new(config.alpha, require_knapsack(config)?)?;
    simulate(&policy, &config.engine(instance), phi, rng)
}

/// Simulates the randomized singleton / density-greedy mixture on `phi`.
pub fn run_mixed_knapsack<S: Scalar, R: Rng>(
    instance: &Instance<S>,
    config: &PolicyConfig<S>,
    phi: &Realization,
    rng: R,
) -> Result<RunTrace<S>> {
    config.validate(instance)?;
    let policy = MixedKnapsack::new(config.alpha, require_knapsack(config)?)?;
    simulate(&policy, &config.engine(instance), phi, rng)
}

/// Seeded stream for trial `index` of a run family.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
