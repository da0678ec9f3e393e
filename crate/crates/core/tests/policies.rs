mod common;

use std::collections::{BTreeMap, VecDeque};

use pasm::oracle::enumerate_runs;
use pasm::policy::{
    best_singleton, concatenate, expanded_ground, level_truncate, run_policy, simulate, top_k_set, trial_rng,
    truncate_batches, Driver, Flow, Run,
};
use pasm::utility::{CoverageWithPenalty, WeightedCoverage};
use pasm::{
    BestSingleton, CostFunction, DensityGreedy, EmptyPolicy, FixedSet, Instance, MarginalEngine, MixedKnapsack,
    PartialAdaptiveGreedy, PartialRealization, Policy, Prior, Realization, RunTrace, StateLabel, StateSpace,
    Termination, UtilityFunction,
};

use common::{coverage, desk_instances, knapsack_instances};

const EPS: f64 = 1e-12;

/// Replays a fixed sequence of coin outcomes and reveals states from `phi`.
struct Scripted {
    picks: VecDeque<usize>,
    phi: Realization,
}

impl Scripted {
    fn new(picks: &[usize], phi: &[StateLabel]) -> Self {
        Scripted {
            picks: picks.iter().copied().collect(),
            phi: Realization::new(phi.to_vec()),
        }
    }

    fn next(&mut self, n: usize) -> usize {
        let i = self.picks.pop_front().expect("script exhausted");
        assert!(i < n, "scripted pick {i} out of {n}");
        i
    }
}

impl Driver<f64> for Scripted {
    fn choose(&mut self, weights: &[f64]) -> Flow<usize, f64> {
        Ok(self.next(weights.len()))
    }

    fn uniform(&mut self, n: usize) -> Flow<usize, f64> {
        Ok(self.next(n))
    }

    fn observe(&mut self, items: &[usize]) -> Flow<Vec<StateLabel>, f64> {
        Ok(items.iter().map(|&e| self.phi.state(e)).collect())
    }
}

fn scripted(policy: &dyn Policy<f64>, instance: &Instance, picks: &[usize], phi: &[StateLabel]) -> RunTrace {
    let engine = MarginalEngine::exact(instance);
    let mut driver = Scripted::new(picks, phi);
    let trace = run_policy(policy, &engine, &mut driver, &[]).unwrap();
    assert!(driver.picks.is_empty(), "unused script entries {:?}", driver.picks);
    trace
}

fn batch_items(trace: &RunTrace) -> Vec<Vec<usize>> {
    trace.batches.iter().map(|b| b.items.clone()).collect()
}

/// One state per item, each covering a private element of the given weight.
fn modular(weights: &[f64]) -> Instance {
    let n = weights.len();
    coverage(
        vec![vec![1.0]; n],
        weights.to_vec(),
        (0..n).map(|e| vec![vec![e]]).collect(),
        vec![1.0; n],
    )
}

/// Three binary items; marginals at the empty history are 1.5, 2.5 and 1.0.
fn greedy_hand_instance() -> Instance {
    coverage(
        vec![vec![0.5, 0.5]; 3],
        vec![3.0, 2.0, 1.0],
        vec![vec![vec![], vec![0]], vec![vec![2], vec![0, 2]], vec![vec![], vec![1]]],
        vec![1.0; 3],
    )
}

/// Costs (1, 1, 2); densities at the empty history are 2, 1 and 0.75.
fn density_hand_instance() -> Instance {
    coverage(
        vec![vec![0.5, 0.5]; 3],
        vec![4.0, 1.0, 3.0],
        vec![vec![vec![], vec![0]], vec![vec![1], vec![1]], vec![vec![], vec![2]]],
        vec![1.0, 1.0, 2.0],
    )
}

#[test]
fn top_one_is_the_argmax() {
    let inst = modular(&[2.0, 5.0, 3.0]);
    let engine = MarginalEngine::exact(&inst);
    let top = top_k_set(&engine, &expanded_ground(3, 1), &[], &PartialRealization::new(), 1).unwrap();
    assert_eq!(top.items, vec![1]);
    assert_eq!(top.sum, 5.0);
}

#[test]
fn top_two_takes_the_two_largest_marginals() {
    let inst = modular(&[5.0, 3.0, 2.0]);
    let engine = MarginalEngine::exact(&inst);
    let top = top_k_set(&engine, &expanded_ground(3, 2), &[], &PartialRealization::new(), 2).unwrap();
    assert_eq!(top.items, vec![0, 1]);
    assert_eq!(top.marginals, vec![5.0, 3.0]);
    assert_eq!(top.sum, 8.0);
}

#[test]
fn dummies_displace_negative_items() {
    let inst = Instance::new(
        StateSpace::uniform(3, 1).unwrap(),
        CostFunction::unit(3),
        Prior::independent(vec![vec![1.0]; 3]).unwrap(),
        UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
            coverage: WeightedCoverage {
                weights: vec![1.0],
                covers: vec![vec![vec![]]; 3],
            },
            penalties: vec![0.5, 0.25, 1.0],
        }),
    )
    .unwrap();
    let engine = MarginalEngine::exact(&inst);
    let ground = expanded_ground(3, 2);
    assert_eq!(ground.len(), 3 + 3);
    let top = top_k_set(&engine, &ground, &[], &PartialRealization::new(), 2).unwrap();
    assert_eq!(top.items, vec![3, 4]);
    assert_eq!(top.sum, 0.0);
}

#[test]
fn greedy_rejects_bad_parameters() {
    assert!(PartialAdaptiveGreedy::new(1.5, 2).is_err());
    assert!(PartialAdaptiveGreedy::new(-0.1, 2).is_err());
    assert!(PartialAdaptiveGreedy::new(0.5, 0).is_err());
    assert_eq!(Policy::<f64>::dummies(&PartialAdaptiveGreedy::new(0.5, 3).unwrap()), 5);
}

#[test]
fn zero_alpha_greedy_uses_one_batch() {
    for (inst, k) in desk_instances().into_iter().take(8) {
        let policy = PartialAdaptiveGreedy::new(0.0, k).unwrap();
        let engine = MarginalEngine::exact(&inst);
        enumerate_runs(&policy, &engine, &[], |trace, _, _| {
            assert_eq!(trace.batch_count(), 1, "{}", inst.id);
            Ok(())
        })
        .unwrap();
    }
}

#[test]
fn single_step_greedy_picks_the_best_item() {
    let inst = greedy_hand_instance();
    let trace = scripted(&PartialAdaptiveGreedy::new(1.0, 1).unwrap(), &inst, &[0], &[0, 0, 0]);
    assert_eq!(trace.selected(), vec![1]);
    assert_eq!(trace.termination, Termination::CardinalityReached);
}

// Hand execution with alpha = 1, k = 2. The first step keeps the batch (both
// sides of the trigger are 2.5 + 1.5) and draws from {1, 0}. The second step
// compares the top-2 sum given the first pick against 4.0: 1.0 + 0.75 after
// picking 1, and 1.75 + 1.0 after picking 0. Both are below, so the batch
// closes and the next item is drawn from the remaining pair.
#[test]
fn greedy_matches_hand_execution() {
    let inst = greedy_hand_instance();
    let policy = PartialAdaptiveGreedy::new(1.0, 2).unwrap();

    let trace = scripted(&policy, &inst, &[0, 1], &[1, 1, 0]);
    assert_eq!(batch_items(&trace), vec![vec![1], vec![0]]);
    assert_eq!(trace.batches[0].observed, vec![(1, 1)]);
    assert_eq!(trace.steps[0].trigger, Some((4.0, 4.0)));
    let (lhs, rhs) = trace.steps[1].trigger.unwrap();
    assert!((lhs - 1.75).abs() < EPS && (rhs - 4.0).abs() < EPS, "{lhs} {rhs}");
    assert!(trace.steps[1].opened_batch);
    assert_eq!(trace.steps[1].history, vec![(1, 1)]);

    let trace = scripted(&policy, &inst, &[1, 0], &[0, 1, 1]);
    assert_eq!(batch_items(&trace), vec![vec![0], vec![1]]);
    let (lhs, _) = trace.steps[1].trigger.unwrap();
    assert!((lhs - 2.75).abs() < EPS, "{lhs}");
}

#[test]
fn greedy_run_distribution_matches_hand_tree() {
    let inst = greedy_hand_instance();
    let policy = PartialAdaptiveGreedy::new(1.0, 2).unwrap();
    let engine = MarginalEngine::exact(&inst);
    let mut mass: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    enumerate_runs(&policy, &engine, &[], |trace, _, p| {
        assert_eq!(trace.batch_count(), 2);
        let s = trace.selected();
        *mass.entry((s[0], s[1])).or_default() += p;
        Ok(())
    })
    .unwrap();
    let expected = [((0, 1), 0.25), ((0, 2), 0.25), ((1, 0), 0.25), ((1, 2), 0.25)];
    assert_eq!(mass.len(), expected.len(), "{mass:?}");
    for (key, p) in expected {
        assert!((mass[&key] - p).abs() < 1e-12, "{key:?}: {mass:?}");
    }
}

#[test]
fn density_greedy_with_empty_pool_selects_nothing() {
    let inst = density_hand_instance();
    let trace = scripted(&DensityGreedy::new(0.5, 2.0).unwrap(), &inst, &[0, 0, 0], &[0, 0, 0]);
    assert!(trace.selected().is_empty());
    assert_eq!(trace.batch_count(), 0);
    assert_eq!(trace.termination, Termination::GroundExhausted);
}

#[test]
fn density_greedy_single_candidate() {
    let inst = density_hand_instance();
    let trace = scripted(&DensityGreedy::new(0.5, 2.0).unwrap(), &inst, &[0, 0, 1], &[0, 0, 1]);
    assert_eq!(batch_items(&trace), vec![vec![2]]);
    assert_eq!(trace.termination, Termination::GroundExhausted);
}

// Alpha = 0.5: item 0 opens at density 2, item 1 stays at density 1 = 0.5 * 2,
// item 2 at 0.75 closes the batch and then exceeds the remaining budget.
#[test]
fn density_greedy_breaks_on_budget() {
    let inst = density_hand_instance();
    let trace = scripted(&DensityGreedy::new(0.5, 2.0).unwrap(), &inst, &[1, 1, 1], &[1, 0, 1]);
    assert_eq!(batch_items(&trace), vec![vec![0, 1]]);
    assert_eq!(trace.batches[0].observed, vec![(0, 1), (1, 0)]);
    assert_eq!(trace.termination, Termination::BudgetExhausted);
    assert_eq!(trace.steps[1].trigger, Some((1.0, 1.0)));
}

// Alpha = 1: item 1 fails the test against the opener's density 2, so it opens
// the second batch; item 2 then fails against 1 and does not fit.
#[test]
fn density_greedy_full_adaptivity_hand_trace() {
    let inst = density_hand_instance();
    let trace = scripted(&DensityGreedy::new(1.0, 2.0).unwrap(), &inst, &[1, 1, 1], &[1, 0, 1]);
    assert_eq!(batch_items(&trace), vec![vec![0], vec![1]]);
    assert_eq!(trace.termination, Termination::BudgetExhausted);
    assert_eq!(trace.steps[1].history, vec![(0, 1)]);
    assert!(trace.steps[1].opened_batch);
}

#[test]
fn best_singleton_examples() {
    let one = modular(&[0.4]);
    assert_eq!(
        best_singleton(&MarginalEngine::exact(&one), None).unwrap(),
        Some((0, 0.4))
    );

    // expected singleton values 0.5 and 0.7
    let two = coverage(
        vec![vec![0.5, 0.5], vec![0.3, 0.7]],
        vec![1.0],
        vec![vec![vec![], vec![0]], vec![vec![], vec![0]]],
        vec![1.0, 1.0],
    );
    let (e, v) = best_singleton(&MarginalEngine::exact(&two), None).unwrap().unwrap();
    assert_eq!(e, 1);
    assert!((v - 0.7).abs() < EPS);

    let zero = modular(&[0.0, 0.0, 0.0]);
    assert_eq!(
        best_singleton(&MarginalEngine::exact(&zero), None).unwrap(),
        Some((0, 0.0))
    );
}

#[test]
fn best_singleton_skips_items_over_budget() {
    let inst = density_hand_instance();
    let engine = MarginalEngine::exact(&inst);
    assert_eq!(best_singleton(&engine, Some(1.0)).unwrap(), Some((0, 2.0)));
    let costly = coverage(
        vec![vec![1.0]; 2],
        vec![1.0, 5.0],
        vec![vec![vec![0]], vec![vec![1]]],
        vec![1.0, 3.0],
    );
    let engine = MarginalEngine::exact(&costly);
    assert_eq!(best_singleton(&engine, None).unwrap().unwrap().0, 1);
    assert_eq!(best_singleton(&engine, Some(2.0)).unwrap().unwrap().0, 0);
}

#[test]
fn mixture_singleton_branch_selects_only_the_best_singleton() {
    let inst = density_hand_instance();
    let policy = MixedKnapsack::new(0.5, 2.0).unwrap();
    let trace = scripted(&policy, &inst, &[0], &[0, 0, 0]);
    assert_eq!(trace.selected(), vec![0]);
    assert_eq!(trace.batch_count(), 1);
}

#[test]
fn mixture_density_branch_runs_density_greedy() {
    let inst = density_hand_instance();
    let mixed = scripted(&MixedKnapsack::new(0.5, 2.0).unwrap(), &inst, &[1, 1, 1, 1], &[1, 0, 1]);
    let plain = scripted(&DensityGreedy::new(0.5, 2.0).unwrap(), &inst, &[1, 1, 1], &[1, 0, 1]);
    assert_eq!(mixed, plain);
}

#[test]
fn truncation_beyond_natural_length_is_a_no_op() {
    for (inst, k) in desk_instances() {
        let policy = PartialAdaptiveGreedy::new(1.0, k).unwrap();
        let engine = MarginalEngine::exact(&inst);
        let phi = inst
            .sample_realization(&PartialRealization::new(), &mut trial_rng(5, 0))
            .unwrap();
        let full = simulate(&policy, &engine, &phi, trial_rng(5, 1)).unwrap();
        let cut = simulate(&truncate_batches(policy, k), &engine, &phi, trial_rng(5, 1)).unwrap();
        assert_eq!(full, cut, "{}", inst.id);
    }
}

#[test]
fn truncation_to_one_batch_keeps_the_first_batch() {
    let inst = density_hand_instance();
    let policy = truncate_batches(DensityGreedy::new(1.0, 2.0).unwrap(), 1);
    let trace = scripted(&policy, &inst, &[1, 1, 1], &[1, 0, 1]);
    assert_eq!(batch_items(&trace), vec![vec![0]]);
    assert_eq!(trace.termination, Termination::TruncatedAtT);
}

#[test]
fn truncated_runs_are_prefixes() {
    for (inst, budget) in knapsack_instances() {
        let engine = MarginalEngine::exact(&inst);
        for trial in 0..20 {
            let phi = inst
                .sample_realization(&PartialRealization::new(), &mut trial_rng(9, trial))
                .unwrap();
            let policy = DensityGreedy::new(1.0, budget).unwrap();
            let full = simulate(&policy, &engine, &phi, trial_rng(11, trial)).unwrap();
            let cut = simulate(&truncate_batches(policy, 2), &engine, &phi, trial_rng(11, trial)).unwrap();
            let keep = full.batch_count().min(2);
            assert_eq!(batch_items(&cut), batch_items(&full)[..keep].to_vec(), "{}", inst.id);
            if full.batch_count() > 2 {
                assert_eq!(cut.termination, Termination::TruncatedAtT);
            }
        }
    }
}

#[test]
fn concatenation_with_empty_policy_is_the_policy() {
    let inst = greedy_hand_instance();
    let policy = PartialAdaptiveGreedy::new(1.0, 2).unwrap();
    let alone = scripted(&policy, &inst, &[0, 1], &[1, 1, 0]);
    let joined = scripted(&concatenate(policy, EmptyPolicy), &inst, &[0, 1], &[1, 1, 0]);
    assert_eq!(alone.selected(), joined.selected());
}

#[test]
fn zero_level_truncation_selects_nothing() {
    let inst = greedy_hand_instance();
    let trace = scripted(
        &level_truncate(PartialAdaptiveGreedy::new(1.0, 2).unwrap(), 0),
        &inst,
        &[0],
        &[0, 0, 0],
    );
    assert!(trace.selected().is_empty());
    assert_eq!(trace.termination, Termination::CardinalityReached);
}

#[test]
fn level_truncation_keeps_the_first_selections() {
    let inst = greedy_hand_instance();
    let trace = scripted(
        &level_truncate(PartialAdaptiveGreedy::new(1.0, 2).unwrap(), 1),
        &inst,
        &[0, 0],
        &[1, 1, 0],
    );
    assert_eq!(trace.selected(), vec![1]);
}

#[test]
fn concatenated_fixed_policies_select_the_union() {
    let inst = coverage(
        vec![vec![0.5, 0.5]; 2],
        vec![1.0, 1.0],
        vec![vec![vec![], vec![0]], vec![vec![], vec![1]]],
        vec![1.0, 1.0],
    );
    let trace = scripted(
        &concatenate(FixedSet(vec![0]), FixedSet(vec![0, 1])),
        &inst,
        &[],
        &[1, 0],
    );
    assert_eq!(trace.selected_set(), vec![0, 1]);
    assert_eq!(batch_items(&trace), vec![vec![0], vec![1]]);
}

#[test]
fn best_singleton_policy_stops_after_one_item() {
    let inst = density_hand_instance();
    let trace = scripted(&BestSingleton { budget: Some(2.0) }, &inst, &[], &[0, 0, 0]);
    assert_eq!(trace.selected(), vec![0]);
}

#[test]
fn run_policy_leaves_the_last_batch_unobserved() {
    let inst = greedy_hand_instance();
    let trace = scripted(&PartialAdaptiveGreedy::new(0.0, 2).unwrap(), &inst, &[0, 0], &[1, 1, 1]);
    assert_eq!(trace.batch_count(), 1);
    assert!(trace.batches[0].observed.is_empty());
}

#[test]
fn preselected_items_are_unavailable() {
    let inst = greedy_hand_instance();
    let engine = MarginalEngine::exact(&inst);
    let mut driver = Scripted::new(&[], &[0, 0, 0]);
    let run = Run::new(&engine, &mut driver, 1, &[1]);
    assert!(!run.is_available(1));
    assert_eq!(run.available(), vec![0, 2, 3]);
}
