//! Expected utility of a policy, exactly by joint enumeration of coins and
//! observations, or by seeded Monte-Carlo simulation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{ItemId, PartialRealization, StateLabel};
use crate::policy::{run_policy, simulate, trial_rng, Choice, Driver, Flow, Interrupt, Policy, RunTrace};
use crate::scalar::Scalar;
use crate::utility::{MarginalEngine, MarginalMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "mc",
        }
    }
}

/// Expected utility and batch statistics of a policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport<S> {
    pub expected_utility: S,
    /// Zero for exact reports.
    pub stderr: S,
    /// Simulated runs, or enumerated leaves for exact reports.
    pub trials: usize,
    pub mean_batches: S,
    /// Standard error of `mean_batches`; zero for exact reports.
    pub batches_stderr: S,
    pub max_batches: usize,
    pub method: Method,
}

/// Replays a fixed prefix of choices and reports the next unexplored random
/// event as a branch.
struct Replay<'p, S> {
    instance: &'p Instance<S>,
    prefix: &'p [Choice],
    pos: usize,
    observed: PartialRealization,
}

impl<S: Scalar> Replay<'_, S> {
    fn next(&mut self) -> Option<&Choice> {
        let c = self.prefix.get(self.pos);
        self.pos += 1;
        c
    }
}

impl<S: Scalar> Driver<S> for Replay<'_, S> {
    fn choose(&mut self, weights: &[S]) -> Flow<usize, S> {
        match self.next() {
            Some(Choice::Pick(i)) => Ok(*i),
            Some(other) => Err(Error::Evaluation(format!("replay expected a pick, found {other:?}")).into()),
            None => {
                let total: S = weights.iter().copied().sum();
                if !(total > S::zero()) {
                    return Err(Error::Evaluation("choice with no positive weight".into()).into());
                }
                Err(Interrupt::Branch(
                    weights
                        .iter()
                        .enumerate()
                        .filter(|(_, w)| **w > S::zero())
                        .map(|(i, w)| (Choice::Pick(i), *w / total))
                        .collect(),
                ))
            }
        }
    }

    fn uniform(&mut self, n: usize) -> Flow<usize, S> {
        if n == 0 {
            return Err(Error::Evaluation("uniform choice over nothing".into()).into());
        }
        self.choose(&vec![S::one(); n])
    }

    fn observe(&mut self, items: &[ItemId]) -> Flow<Vec<StateLabel>, S> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        match self.next() {
            Some(Choice::Observe(states)) => {
                let states = states.clone();
                self.observed
                    .extend(items.iter().copied().zip(states.iter().copied()))?;
                Ok(states)
            }
            Some(other) => Err(Error::Evaluation(format!("replay expected an observation, found {other:?}")).into()),
            None => {
                let joint = self.instance.prior().joint(items, &self.observed)?;
                Err(Interrupt::Branch(
                    joint
                        .into_iter()
                        .filter(|(_, p)| *p > S::zero())
                        .map(|(states, p)| (Choice::Observe(states), p))
                        .collect(),
                ))
            }
        }
    }
}

/// Visits every complete run of `policy` with its probability and the
/// states revealed along it. `preselected` items are unavailable to the
/// policy. Returns the number of runs visited.
///
/// Fails when the engine is not exact or the run count passes the
/// instance's enumeration cap.
pub fn enumerate_runs<S, P, F>(
    policy: &P,
    engine: &MarginalEngine<'_, S>,
    preselected: &[ItemId],
    mut visit: F,
) -> Result<usize>
where
    S: Scalar,
    P: Policy<S> + ?Sized,
    F: FnMut(&RunTrace<S>, &PartialRealization, S) -> Result<()>,
{
    if engine.mode() != MarginalMode::Exact {
        return Err(Error::Evaluation("exact evaluation needs exact marginals".into()));
    }
    let instance = engine.instance();
    let cap = instance.cap();
    let mut leaves = 0usize;
    let mut stack: Vec<(Vec<Choice>, S)> = vec![(Vec::new(), S::one())];
    while let Some((prefix, p)) = stack.pop() {
        let mut driver = Replay {
            instance,
            prefix: &prefix,
            pos: 0,
            observed: PartialRealization::new(),
        };
        match run_policy(policy, engine, &mut driver, preselected) {
            Ok(trace) => {
                leaves += 1;
                if leaves > cap {
                    return Err(Error::CapExceeded {
                        what: "policy runs",
                        required: leaves as u128,
                        cap: cap as u128,
                    });
                }
                visit(&trace, &driver.observed, p)?;
            }
            Err(Interrupt::Branch(options)) => {
                for (choice, q) in options.into_iter().rev() {
                    let mut next = prefix.clone();
                    next.push(choice);
                    stack.push((next, p * q));
                }
            }
            Err(Interrupt::Failed(e)) => return Err(e),
            Err(Interrupt::Halt { .. }) => unreachable!("run_policy absorbs halts"),
        }
    }
    Ok(leaves)
}

/// Exact `f_avg(π)` over the prior and the policy's internal randomness.
pub fn exact_expected_utility<S: Scalar, P: Policy<S> + ?Sized>(
    policy: &P,
    instance: &Instance<S>,
) -> Result<EvalReport<S>> {
    let engine = MarginalEngine::exact(instance);
    exact_with_engine(policy, &engine)
}

/// [`exact_expected_utility`] reusing an existing exact engine.
pub fn exact_with_engine<S: Scalar, P: Policy<S> + ?Sized>(
    policy: &P,
    engine: &MarginalEngine<'_, S>,
) -> Result<EvalReport<S>> {
    let mut value = S::zero();
    let mut mass_by_batches: Vec<S> = Vec::new();
    let leaves = enumerate_runs(policy, engine, &[], |trace, observed, p| {
        value = value + p * engine.expected_value(&trace.selected(), observed)?;
        let b = trace.batch_count();
        if mass_by_batches.len() <= b {
            mass_by_batches.resize(b + 1, S::zero());
        }
        mass_by_batches[b] = mass_by_batches[b] + p;
        Ok(())
    })?;
    let total: S = mass_by_batches.iter().copied().sum();
    let batches = mass_by_batches
        .iter()
        .enumerate()
        .map(|(b, &m)| S::of(b as f64) * (m / total))
        .sum();
    let max_batches = mass_by_batches.iter().rposition(|&m| m > S::zero()).unwrap_or(0);
    Ok(EvalReport {
        expected_utility: value,
        stderr: S::zero(),
        trials: leaves,
        mean_batches: batches,
        batches_stderr: S::zero(),
        max_batches,
        method: Method::Exact,
    })
}

/// `Δ(π | S, ψ)`: expected gain of running `π` on top of the items `S`
/// under the observations `ψ`. `π` cannot choose items of `S`.
pub fn marginal_policy<S: Scalar, P: Policy<S> + ?Sized>(
    policy: &P,
    instance: &Instance<S>,
    selected: &[ItemId],
    psi: &PartialRealization,
) -> Result<S> {
    instance.check_partial(psi)?;
    let conditioned = Instance::new(
        instance.states().clone(),
        instance.costs().clone(),
        instance.condition_prior(psi)?,
        instance.utility().clone(),
    )?
    .with_cap(instance.cap());
    let engine = MarginalEngine::exact(&conditioned);
    let mut gain = S::zero();
    enumerate_runs(policy, &engine, selected, |trace, observed, p| {
        let mut all = trace.selected();
        all.extend_from_slice(selected);
        gain = gain + p * (engine.expected_value(&all, observed)? - engine.expected_value(selected, observed)?);
        Ok(())
    })?;
    Ok(gain)
}

/// Running mean and sum of squared deviations (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        Welford {
            count: self.count + other.count,
            mean: self.mean + d * other.count as f64 / n,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / n,
        }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    utility: Welford,
    batches: Welford,
    batch_total: usize,
    max_batches: usize,
}

impl Moments {
    fn push(&mut self, x: f64, batches: usize) {
        self.utility.push(x);
        self.batches.push(batches as f64);
        self.batch_total += batches;
        self.max_batches = self.max_batches.max(batches);
    }

    fn merge(self, other: Moments) -> Moments {
        Moments {
            utility: self.utility.merge(other.utility),
            batches: self.batches.merge(other.batches),
            batch_total: self.batch_total + other.batch_total,
            max_batches: self.max_batches.max(other.max_batches),
        }
    }
}

const CHUNK: usize = 512;

/// Monte-Carlo `f_avg(π)`: trial `i` draws `φ` and the policy's coins from
/// stream `i` of `seed`. Deterministic for a given seed regardless of
/// thread count.
pub fn mc_expected_utility<S: Scalar, P: Policy<S> + ?Sized>(
    policy: &P,
    instance: &Instance<S>,
    trials: usize,
    seed: u64,
    mode: MarginalMode,
) -> Result<EvalReport<S>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let shared = MarginalEngine::exact(instance);
            let mut m = Moments::default();
            for t in (c * CHUNK)..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(seed, t as u64);
                let phi = instance.sample_realization(&PartialRealization::new(), &mut rng)?;
                let trace = match mode {
                    MarginalMode::Exact => simulate(policy, &shared, &phi, &mut rng)?,
                    MarginalMode::MonteCarlo { .. } => {
                        let own = MarginalEngine::with_seed(
                            instance,
                            mode,
                            seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        );
                        simulate(policy, &own, &phi, &mut rng)?
                    }
                };
                m.push(trace.utility.expect("simulated").as_f64(), trace.batch_count());
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for part in parts {
        total = total.merge(part?);
    }
    Ok(EvalReport {
        expected_utility: S::of(total.utility.mean),
        stderr: S::of(total.utility.stderr()),
        trials: total.utility.count,
        mean_batches: S::of(total.batch_total as f64 / total.utility.count as f64),
        batches_stderr: S::of(total.batches.stderr()),
        max_batches: total.max_batches,
        method: Method::MonteCarlo,
    })
}
