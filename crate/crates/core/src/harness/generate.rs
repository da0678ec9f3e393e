//! Seeded random instance families.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{CostFunction, Prior, Realization, StateSpace};
use crate::utility::{CoverageWithPenalty, Hypothesis, UtilityFunction, VersionSpace, WeightedCoverage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    WeightedCoverage,
    CoveragePenalty,
    VersionSpace,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::WeightedCoverage, Family::CoveragePenalty, Family::VersionSpace];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::WeightedCoverage => "weighted_coverage",
            Family::CoveragePenalty => "coverage_penalty",
            Family::VersionSpace => "version_space",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown family `{s}`")))
    }
}

/// Knobs shared by the generators; `None` picks a size-based default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenParams {
    /// Ground elements of coverage families (default `n + 2`).
    pub elements: Option<usize>,
    /// Hypotheses of the version-space family (default `min(m^n, 2n)`).
    pub hypotheses: Option<usize>,
    /// Draw item costs from `{1, 2, 3}` instead of unit costs.
    pub random_costs: bool,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn distribution(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

fn costs(rng: &mut ChaCha8Rng, n: usize, random: bool) -> CostFunction<f64> {
    if random {
        CostFunction::new((0..n).map(|_| rng.gen_range(1..=3) as f64).collect()).expect("positive costs")
    } else {
        CostFunction::unit(n)
    }
}

fn coverage(rng: &mut ChaCha8Rng, n: usize, m: usize, elements: usize) -> WeightedCoverage<f64> {
    let weights = (0..elements).map(|_| round2(rng.gen_range(0.5..2.0))).collect();
    let covers = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| (0..elements).filter(|_| rng.gen_bool(0.4)).collect())
                .collect()
        })
        .collect();
    WeightedCoverage { weights, covers }
}

/// Deterministic instance of `family` with `n` items of `states` states each.
///
/// Coverage families use independent priors. The penalty family charges item
/// 0 one more than its expected coverage, so observing it always loses value
/// in expectation. The version-space family uses distinct random hypotheses
/// as an explicit prior, with utility equal to the eliminated prior mass.
pub fn generate_instance(
    family: Family,
    n: usize,
    states: usize,
    seed: u64,
    params: &GenParams,
) -> Result<Instance<f64>> {
    if n == 0 || states == 0 {
        return Err(Error::Config("generators need n >= 1 and states >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = StateSpace::uniform(n, states)?;
    let elements = params.elements.unwrap_or(n + 2);
    let instance = match family {
        Family::WeightedCoverage | Family::CoveragePenalty => {
            let prior_rows: Vec<Vec<f64>> = (0..n).map(|_| distribution(&mut rng, states)).collect();
            let cover = coverage(&mut rng, n, states, elements);
            let cost = costs(&mut rng, n, params.random_costs);
            let prior = Prior::independent(prior_rows.clone())?;
            let utility = if family == Family::WeightedCoverage {
                UtilityFunction::WeightedCoverage(cover)
            } else {
                let mut penalties: Vec<f64> = (0..n).map(|_| round2(rng.gen_range(0.0..0.4))).collect();
                let expected_first: f64 = (0..states)
                    .map(|s| prior_rows[0][s] * cover.covers[0][s].iter().map(|&j| cover.weights[j]).sum::<f64>())
                    .sum();
                penalties[0] = expected_first + 1.0;
                UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
                    coverage: cover,
                    penalties,
                })
            };
            Instance::new(space, cost, prior, utility)?
        }
        Family::VersionSpace => {
            let space_size = (states as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            let wanted = params.hypotheses.unwrap_or(2 * n).max(1) as u128;
            let h = wanted.min(space_size).min(1 << 20) as usize;
            let population = space_size.min(usize::MAX as u128) as usize;
            let mut codes: Vec<usize> = sample(&mut rng, population, h).into_vec();
            codes.sort_unstable();
            let masses = distribution(&mut rng, h);
            let answers: Vec<Vec<usize>> = codes
                .iter()
                .map(|&code| {
                    let mut c = code;
                    (0..n)
                        .map(|_| {
                            let s = c % states;
                            c /= states;
                            s
                        })
                        .collect()
                })
                .collect();
            let prior = Prior::explicit(
                answers
                    .iter()
                    .zip(&masses)
                    .map(|(a, &p)| (Realization::new(a.clone()), p))
                    .collect(),
            )?;
            let utility = UtilityFunction::VersionSpace(VersionSpace {
                hypotheses: answers
                    .into_iter()
                    .zip(masses)
                    .map(|(answers, mass)| Hypothesis { answers, mass })
                    .collect(),
            });
            let cost = costs(&mut rng, n, params.random_costs);
            Instance::new(space, cost, prior, utility)?
        }
    };
    Ok(instance.with_id(format!("{family}-n{n}-m{states}-s{seed}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        for family in Family::ALL {
            let a = generate_instance(family, 4, 2, 9, &GenParams::default()).unwrap();
            let b = generate_instance(family, 4, 2, 9, &GenParams::default()).unwrap();
            assert_eq!(a, b, "{family}");
        }
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!("influence".parse::<Family>(), Err(Error::Config(_))));
    }

    #[test]
    fn penalty_family_has_a_losing_item() {
        let inst = generate_instance(Family::CoveragePenalty, 3, 2, 1, &GenParams::default()).unwrap();
        let engine = crate::utility::MarginalEngine::exact(&inst);
        let m = engine.marginal(0, &[], &Default::default()).unwrap();
        assert!(m < 0.0, "{m}");
    }
}
