#![allow(dead_code)]

use std::collections::HashMap;

use pasm::harness::{generate_instance, Family, GenParams};
use pasm::model::StateSpace;
use pasm::utility::WeightedCoverage;
use pasm::{Constraint, CostFunction, Instance, ItemId, Prior, UtilityFunction};

/// Independent-prior weighted coverage instance built by hand.
/// `probs[e][s]` is the prior of state `s` of item `e`, `covers[e][s]` the
/// elements it covers in that state.
pub fn coverage(probs: Vec<Vec<f64>>, weights: Vec<f64>, covers: Vec<Vec<Vec<usize>>>, costs: Vec<f64>) -> Instance {
    let space = StateSpace::new(probs.iter().map(Vec::len).collect()).unwrap();
    Instance::new(
        space,
        CostFunction::new(costs).unwrap(),
        Prior::independent(probs).unwrap(),
        UtilityFunction::WeightedCoverage(WeightedCoverage { weights, covers }),
    )
    .unwrap()
}

/// Small instances of every family with a cardinality budget.
pub fn desk_instances() -> Vec<(Instance, usize)> {
    let shapes = [(3, 2), (4, 2), (5, 2), (6, 2), (3, 3), (4, 3), (5, 3), (6, 3)];
    let mut out = Vec::new();
    for family in Family::ALL {
        for (i, &(n, m)) in shapes.iter().enumerate() {
            let seed = 100 + i as u64;
            let instance = generate_instance(family, n, m, seed, &GenParams::default()).unwrap();
            out.push((instance, 1 + i % 3));
        }
    }
    out
}

/// Small instances with costs in {1, 2, 3} and a budget admitting two or
/// three items.
pub fn knapsack_instances() -> Vec<(Instance, f64)> {
    let shapes = [(3, 2), (4, 2), (5, 2), (4, 3), (5, 3)];
    let params = GenParams {
        random_costs: true,
        ..GenParams::default()
    };
    let mut out = Vec::new();
    for family in Family::ALL {
        for (i, &(n, m)) in shapes.iter().enumerate() {
            let instance = generate_instance(family, n, m, 200 + i as u64, &params).unwrap();
            let mut costs = instance.costs().as_slice().to_vec();
            costs.sort_by(f64::total_cmp);
            let budget = costs[0] + costs[1] + if i % 2 == 0 { costs[2] } else { 0.0 };
            out.push((instance, budget));
        }
    }
    out
}

/// Best expected utility over every decision tree, found by listing each
/// tree's utility on every realization and maximizing only at the root.
pub fn brute_force_value(instance: &Instance, constraint: &Constraint) -> f64 {
    let n = instance.n();
    let realizations = instance.enumerate_realizations().unwrap();
    let costs: Vec<f64> = match constraint {
        Constraint::Cardinality(_) => vec![1.0; n],
        Constraint::Knapsack(_) => instance.costs().as_slice().to_vec(),
    };
    let budget = match constraint {
        Constraint::Cardinality(k) => *k as f64,
        Constraint::Knapsack(b) => *b,
    };
    let mut memo: HashMap<u32, Vec<Vec<f64>>> = HashMap::new();
    let trees = trees(instance, &realizations, &costs, budget, (1u32 << n) - 1, &mut memo);
    trees
        .iter()
        .map(|values| values.iter().zip(&realizations).map(|(v, (_, p))| v * p).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Per-realization utilities of every decision tree that may observe the
/// items in `available`; the others are already selected.
fn trees(
    instance: &Instance,
    realizations: &[(pasm::Realization, f64)],
    costs: &[f64],
    budget: f64,
    available: u32,
    memo: &mut HashMap<u32, Vec<Vec<f64>>>,
) -> Vec<Vec<f64>> {
    if let Some(t) = memo.get(&available) {
        return t.clone();
    }
    let n = instance.n();
    let selected: Vec<ItemId> = (0..n).filter(|e| available >> e & 1 == 0).collect();
    let spent: f64 = selected.iter().map(|&e| costs[e]).sum();
    let stop: Vec<f64> = realizations
        .iter()
        .map(|(phi, _)| instance.evaluate(&selected, phi).unwrap())
        .collect();
    let mut out = vec![stop];
    for e in (0..n).filter(|e| available >> e & 1 == 1) {
        if spent + costs[e] > budget + 1e-9 {
            continue;
        }
        let below = trees(instance, realizations, costs, budget, available & !(1 << e), memo);
        let states = instance.states().states_of(e);
        // one subtree per observed state of e
        let mut choice = vec![0usize; states];
        loop {
            let values = realizations
                .iter()
                .enumerate()
                .map(|(r, (phi, _))| below[choice[phi.state(e)]][r])
                .collect();
            out.push(values);
            let mut pos = 0;
            while pos < states {
                choice[pos] += 1;
                if choice[pos] < below.len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == states {
                break;
            }
        }
    }
    memo.insert(available, out.clone());
    out
}
