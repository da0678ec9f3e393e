//! Batch-mode adaptive submodular maximization.
//!
//! Items have random states drawn from a known prior; a policy selects items
//! in batches and only learns the states of a batch once it closes. The
//! degree of adaptivity `α ∈ [0, 1]` interpolates between a single batch
//! (`α = 0`) and one item per batch (`α = 1`).
//!
//! The crate provides the probabilistic model ([`model`], [`instance`]),
//! utility functions and conditional marginals ([`utility`]), the policies
//! ([`policy`]), exact and Monte-Carlo evaluation, the optimal adaptive
//! value and structure checkers ([`oracle`]), and experiment plumbing
//! ([`harness`]).
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases at the crate root fix `f64`.
//!
//! ```
//! use pasm::{Constraint, PartialAdaptiveGreedy};
//! use pasm::harness::{generate_instance, Family, GenParams};
//! use pasm::oracle::{exact_expected_utility, optimal_adaptive_value};
//!
//! let instance = generate_instance(Family::WeightedCoverage, 4, 2, 7, &GenParams::default()).unwrap();
//! let policy = PartialAdaptiveGreedy::new(0.5, 2).unwrap();
//! let value = exact_expected_utility(&policy, &instance).unwrap().expected_utility;
//! let best = optimal_adaptive_value(&instance, &Constraint::Cardinality(2)).unwrap();
//! assert!(value <= best + 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod scalar;
pub mod utility;

pub use error::{Error, Result};
pub use model::{is_subrealization, Item, ItemId, PartialRealization, Realization, StateLabel, StateSpace};
pub use policy::{
    BatchTruncated, BestSingleton, Concatenation, DensityGreedy, EmptyPolicy, FixedSet, LevelTruncated, MixedKnapsack,
    PartialAdaptiveGreedy, Policy, Termination,
};
pub use scalar::Scalar;

pub type Instance = instance::Instance<f64>;
pub type Constraint = instance::Constraint<f64>;
pub type Prior = model::Prior<f64>;
pub type CostFunction = model::CostFunction<f64>;
pub type UtilityFunction = utility::UtilityFunction<f64>;
pub type MarginalEngine<'a> = utility::MarginalEngine<'a, f64>;
pub type RunTrace = policy::RunTrace<f64>;
pub type PolicyConfig = policy::PolicyConfig<f64>;
pub type EvalReport = oracle::EvalReport<f64>;
