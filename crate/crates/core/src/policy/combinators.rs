use super::{CapKind, Flow, Interrupt, Policy, Run, StepRecord, Termination};
use crate::model::{ItemId, PartialRealization};
use crate::scalar::Scalar;

/// Selects nothing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmptyPolicy;

impl<S: Scalar> Policy<S> for EmptyPolicy {
    fn name(&self) -> String {
        "empty".into()
    }

    fn execute(&self, _run: &mut Run<'_, S>) -> Flow<Termination, S> {
        Ok(Termination::CardinalityReached)
    }
}

/// Selects a fixed list of items in one batch, skipping any already chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSet(pub Vec<ItemId>);

impl<S: Scalar> Policy<S> for FixedSet {
    fn name(&self) -> String {
        format!("fixed{:?}", self.0)
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        let empty = PartialRealization::new();
        let mut done = Vec::new();
        for &e in &self.0 {
            if run.is_available(e) {
                run.select(e, StepRecord::new(&empty, &done, S::zero(), S::zero()))?;
                done.push(e);
            }
        }
        Ok(Termination::CardinalityReached)
    }
}

fn capped<S: Scalar, P: Policy<S> + ?Sized>(
    inner: &P,
    run: &mut Run<'_, S>,
    kind: CapKind,
    limit: usize,
) -> Flow<Termination, S> {
    let frame = run.push_cap(kind, limit);
    let outcome = inner.execute(run);
    run.pop_cap(frame);
    match outcome {
        Err(Interrupt::Halt { frame: f, reason }) if f == frame => Ok(reason),
        other => other,
    }
}

/// Runs `inner` until it would open batch `T + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchTruncated<P> {
    pub inner: P,
    pub max_batches: usize,
}

impl<S: Scalar, P: Policy<S>> Policy<S> for BatchTruncated<P> {
    fn name(&self) -> String {
        format!("{}[batches<={}]", self.inner.name(), self.max_batches)
    }

    fn dummies(&self) -> usize {
        self.inner.dummies()
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        capped(&self.inner, run, CapKind::Batches, self.max_batches)
    }
}

/// Runs `inner` for its first `t` selections.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTruncated<P> {
    pub inner: P,
    pub levels: usize,
}

impl<S: Scalar, P: Policy<S>> Policy<S> for LevelTruncated<P> {
    fn name(&self) -> String {
        format!("{}[levels<={}]", self.inner.name(), self.levels)
    }

    fn dummies(&self) -> usize {
        self.inner.dummies()
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        capped(&self.inner, run, CapKind::Selections, self.levels)
    }
}

/// Runs `first` to completion, then `second` from a fresh information state.
/// Items chosen by `first` stay selected and cannot be chosen again.
#[derive(Debug, Clone, PartialEq)]
pub struct Concatenation<A, B> {
    pub first: A,
    pub second: B,
}

impl<S: Scalar, A: Policy<S>, B: Policy<S>> Policy<S> for Concatenation<A, B> {
    fn name(&self) -> String {
        format!("{} @ {}", self.first.name(), self.second.name())
    }

    fn dummies(&self) -> usize {
        self.first.dummies() + self.second.dummies()
    }

    fn execute(&self, run: &mut Run<'_, S>) -> Flow<Termination, S> {
        self.first.execute(run)?;
        run.end_segment();
        self.second.execute(run)
    }
}

pub fn truncate_batches<P>(inner: P, max_batches: usize) -> BatchTruncated<P> {
    BatchTruncated { inner, max_batches }
}

pub fn level_truncate<P>(inner: P, levels: usize) -> LevelTruncated<P> {
    LevelTruncated { inner, levels }
}

pub fn concatenate<A, B>(first: A, second: B) -> Concatenation<A, B> {
    Concatenation { first, second }
}
