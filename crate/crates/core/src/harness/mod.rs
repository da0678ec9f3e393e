//! Instance files, generators and experiment sweeps.

mod experiment;
mod generate;
mod schema;

pub use experiment::{
    build_policy, evaluate, run_experiment, theorem_bound, write_csv, write_csv_file, ExperimentConfig,
    ExperimentOutcome, MethodChoice, PolicyKind, ResultRow, Truncation,
};
pub use generate::{generate_instance, Family, GenParams};
pub use schema::{instance_from_json, instance_to_json, parse_instance, write_instance, InstanceDoc};
