use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pasm::harness::{
    generate_instance, parse_instance, run_experiment, write_csv, write_csv_file, write_instance, ExperimentConfig,
    Family, GenParams, MethodChoice, PolicyKind, Truncation,
};
use pasm::oracle::{
    check_adaptive_monotonicity, check_adaptive_submodularity, check_policywise_strong, check_weak_policywise,
    optimal_adaptive_report,
};
use pasm::{Constraint, Error};

const EXIT_BOUND: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pasm",
    version,
    about = "Batch-mode adaptive submodular maximization simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConstraintArgs {
    /// Cardinality budget.
    #[arg(long)]
    k: Option<usize>,
    /// Knapsack budget.
    #[arg(long)]
    budget: Option<f64>,
}

impl ConstraintArgs {
    fn constraint(&self) -> Constraint {
        match (self.k, self.budget) {
            (Some(k), _) => Constraint::Cardinality(k),
            (_, Some(b)) => Constraint::Knapsack(b),
            _ => unreachable!("clap requires one of --k and --budget"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a policy over an alpha grid and write one CSV row per alpha.
    Run {
        /// Instance file; repeat for several instances.
        #[arg(long, required = true)]
        instance: Vec<PathBuf>,
        /// pa-greedy, density-greedy, mixed-knapsack, best-singleton,
        /// fully-adaptive or non-adaptive.
        #[arg(long)]
        policy: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        alpha_grid: Vec<f64>,
        #[command(flatten)]
        constraint: ConstraintArgs,
        /// Monte-Carlo trials when exact evaluation is too large.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the optimal value and the ratio columns.
        #[arg(long)]
        no_oracle: bool,
        /// Force Monte-Carlo evaluation.
        #[arg(long)]
        mc: bool,
        /// Stop each run before it opens batch T + 1.
        #[arg(long, conflicts_with = "auto_t")]
        max_batches: Option<usize>,
        /// Truncate at the batch count that bounds the truncation loss.
        #[arg(long = "auto-T")]
        auto_t: bool,
    },
    /// Print the optimal adaptive value and the value of each first action.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        constraint: ConstraintArgs,
    },
    /// Check adaptive submodularity, monotonicity and weak policywise
    /// submodularity.
    Check {
        #[arg(long)]
        instance: PathBuf,
        /// Budget for the policywise checks (default: k = n).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "k")]
        budget: Option<f64>,
        /// Also run the exhaustive policywise check (n <= 5).
        #[arg(long)]
        strong: bool,
    },
    /// Write a seeded random instance.
    Gen {
        /// weighted_coverage, coverage_penalty or version_space.
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Costs drawn from {1, 2, 3} instead of unit costs.
        #[arg(long)]
        random_costs: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_cap_exceeded() {
        EXIT_CAP
    } else {
        EXIT_INPUT
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    let written = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|()| writeln!(out));
    match written {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run {
            instance,
            policy,
            alpha_grid,
            constraint,
            trials,
            seed,
            out,
            no_oracle,
            mc,
            max_batches,
            auto_t,
        } => {
            let instances = instance.iter().map(parse_instance).collect::<Result<Vec<_>, _>>()?;
            let mut config = ExperimentConfig::new(instances, policy.parse::<PolicyKind>()?, constraint.constraint());
            config.alphas = alpha_grid;
            config.trials = trials;
            config.seed = seed;
            config.oracle = !no_oracle;
            config.method = if mc {
                MethodChoice::MonteCarlo
            } else {
                MethodChoice::Auto
            };
            config.truncation = match (max_batches, auto_t) {
                (Some(t), _) => Truncation::MaxBatches(t),
                (None, true) => Truncation::Auto,
                (None, false) => Truncation::None,
            };
            let outcome = match run_experiment(&config) {
                Err(e) if e.is_cap_exceeded() && config.oracle => {
                    eprintln!("hint: the optimal value is out of reach for this instance; pass --no-oracle");
                    return Err(e);
                }
                other => other?,
            };
            match out {
                Some(path) => write_csv_file(&outcome.rows, path)?,
                None => write_csv(&outcome.rows, std::io::stdout().lock())?,
            }
            for v in &outcome.tradeoff_violations {
                eprintln!("tradeoff violation: {v}");
            }
            let bounds = outcome.bound_violations();
            if bounds > 0 {
                eprintln!("{bounds} row(s) violate their guarantee");
            }
            Ok(if outcome.passed() { 0 } else { EXIT_BOUND })
        }
        Command::Oracle { instance, constraint } => {
            let instance = parse_instance(instance)?;
            print_json(&optimal_adaptive_report(&instance, &constraint.constraint())?)?;
            Ok(0)
        }
        Command::Check {
            instance,
            k,
            budget,
            strong,
        } => {
            let instance = parse_instance(instance)?;
            let constraint = match (k, budget) {
                (_, Some(b)) => Constraint::Knapsack(b),
                (Some(k), None) => Constraint::Cardinality(k),
                (None, None) => Constraint::Cardinality(instance.n().max(1)),
            };
            let tol = 1e-9;
            let mut reports = vec![
                check_adaptive_submodularity(&instance, tol)?,
                check_adaptive_monotonicity(&instance, tol)?,
                check_weak_policywise(&instance, &constraint, tol)?,
            ];
            if strong {
                reports.push(check_policywise_strong(&instance, &constraint, tol)?);
            }
            print_json(&reports)?;
            Ok(0)
        }
        Command::Gen {
            family,
            n,
            states,
            seed,
            random_costs,
            out,
        } => {
            let params = GenParams {
                random_costs,
                ..GenParams::default()
            };
            let instance = generate_instance(family.parse::<Family>()?, n, states, seed, &params)?;
            write_instance(out, &instance)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
