//! α sweeps: evaluate a policy across degrees of adaptivity, compare with
//! the optimal adaptive value and the applicable guarantee, emit CSV.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance};
use crate::oracle::{
    check_adaptive_monotonicity, exact_expected_utility, mc_expected_utility, optimal_adaptive_value, EvalReport,
    Method,
};
use crate::policy::{
    batch_budget_t, truncate_batches, BestSingleton, DensityGreedy, MixedKnapsack, PartialAdaptiveGreedy, Policy,
};
use crate::utility::MarginalMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    PaGreedy,
    DensityGreedy,
    MixedKnapsack,
    BestSingleton,
    /// Greedy with every batch holding one item.
    FullyAdaptive,
    /// Greedy in a single batch.
    NonAdaptive,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::PaGreedy,
        PolicyKind::DensityGreedy,
        PolicyKind::MixedKnapsack,
        PolicyKind::BestSingleton,
        PolicyKind::FullyAdaptive,
        PolicyKind::NonAdaptive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::PaGreedy => "pa-greedy",
            PolicyKind::DensityGreedy => "density-greedy",
            PolicyKind::MixedKnapsack => "mixed-knapsack",
            PolicyKind::BestSingleton => "best-singleton",
            PolicyKind::FullyAdaptive => "fully-adaptive",
            PolicyKind::NonAdaptive => "non-adaptive",
        }
    }

    /// The α actually used: the two aliases pin it.
    pub fn effective_alpha(&self, alpha: f64) -> f64 {
        match self {
            PolicyKind::FullyAdaptive => 1.0,
            PolicyKind::NonAdaptive => 0.0,
            _ => alpha,
        }
    }

    fn is_greedy(&self) -> bool {
        matches!(
            self,
            PolicyKind::PaGreedy | PolicyKind::FullyAdaptive | PolicyKind::NonAdaptive
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    #[default]
    None,
    MaxBatches(usize),
    /// Batch count from [`batch_budget_t`].
    Auto,
}

/// How expected utilities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Exact when enumeration fits the caps, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instances: Vec<Instance<f64>>,
    pub policy: PolicyKind,
    pub alphas: Vec<f64>,
    pub constraint: Constraint<f64>,
    pub trials: usize,
    pub seed: u64,
    pub method: MethodChoice,
    pub oracle: bool,
    pub truncation: Truncation,
}

impl ExperimentConfig {
    pub fn new(instances: Vec<Instance<f64>>, policy: PolicyKind, constraint: Constraint<f64>) -> Self {
        ExperimentConfig {
            instances,
            policy,
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            constraint,
            trials: 10_000,
            seed: 0,
            method: MethodChoice::Auto,
            oracle: true,
            truncation: Truncation::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::Config("alpha grid is empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Config(format!("alpha {a} is outside [0, 1]")));
        }
        for instance in &self.instances {
            instance.validate_for(&self.constraint)?;
        }
        Ok(())
    }
}

/// One CSV row; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub instance_id: String,
    pub policy: String,
    pub alpha: f64,
    pub constraint: String,
    pub method: String,
    pub expected_utility: f64,
    pub stderr: f64,
    pub mean_batches: f64,
    pub max_batches: usize,
    pub oracle_value: Option<f64>,
    pub ratio: Option<f64>,
    pub theorem_bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    /// Descriptions of α steps where utility or batch count decreased
    /// beyond three standard errors.
    pub tradeoff_violations: Vec<String>,
}

impl ExperimentOutcome {
    pub fn bound_violations(&self) -> usize {
        self.rows.iter().filter(|r| r.bound_satisfied == Some(false)).count()
    }

    /// Whether every asserted bound held and the tradeoff trend held.
    pub fn passed(&self) -> bool {
        self.bound_violations() == 0 && self.tradeoff_violations.is_empty()
    }
}

/// Guarantee that applies to `policy` at `alpha`, as a fraction of the
/// optimal adaptive value.
pub fn theorem_bound(policy: PolicyKind, alpha: f64, monotone: bool, truncated: bool) -> Option<f64> {
    if truncated {
        return None;
    }
    match policy {
        p if p.is_greedy() => Some(if monotone {
            1.0 - (-alpha).exp()
        } else {
            alpha / std::f64::consts::E
        }),
        PolicyKind::MixedKnapsack if alpha > 0.0 => Some(1.0 / (6.0 + 4.0 / alpha)),
        _ => None,
    }
}

/// Builds the policy named by `kind` for one α.
pub fn build_policy(
    kind: PolicyKind,
    alpha: f64,
    constraint: &Constraint<f64>,
    truncation: Truncation,
    instance: &Instance<f64>,
) -> Result<Box<dyn Policy<f64>>> {
    let alpha = kind.effective_alpha(alpha);
    let base: Box<dyn Policy<f64>> = match (kind, constraint) {
        (k, Constraint::Cardinality(n)) if k.is_greedy() => Box::new(PartialAdaptiveGreedy::new(alpha, *n)?),
        (k, Constraint::Knapsack(_)) if k.is_greedy() => {
            return Err(Error::Config(format!("{k} needs a cardinality constraint (--k)")))
        }
        (PolicyKind::DensityGreedy, Constraint::Knapsack(b)) => Box::new(DensityGreedy::new(alpha, *b)?),
        (PolicyKind::MixedKnapsack, Constraint::Knapsack(b)) => Box::new(MixedKnapsack::new(alpha, *b)?),
        (PolicyKind::BestSingleton, Constraint::Knapsack(b)) => Box::new(BestSingleton { budget: Some(*b) }),
        (PolicyKind::BestSingleton, Constraint::Cardinality(_)) => Box::new(BestSingleton { budget: None }),
        (k, _) => return Err(Error::Config(format!("{k} needs a knapsack constraint (--budget)"))),
    };
    Ok(match truncation {
        Truncation::None => base,
        Truncation::MaxBatches(t) => Box::new(truncate_batches(base, t)),
        Truncation::Auto => {
            let (budget, c_min) = match constraint {
                Constraint::Cardinality(k) => (*k as f64, 1.0),
                Constraint::Knapsack(b) => (*b, instance.c_min().unwrap_or(1.0)),
            };
            let t = batch_budget_t(instance.n(), budget, c_min, alpha)?;
            Box::new(truncate_batches(base, t.batches))
        }
    })
}

/// Evaluates `policy` exactly when possible, by simulation otherwise.
pub fn evaluate(
    policy: &dyn Policy<f64>,
    instance: &Instance<f64>,
    method: MethodChoice,
    trials: usize,
    seed: u64,
) -> Result<EvalReport<f64>> {
    match method {
        MethodChoice::Exact => exact_expected_utility(policy, instance),
        MethodChoice::MonteCarlo => mc_expected_utility(policy, instance, trials, seed, MarginalMode::Exact),
        MethodChoice::Auto => match exact_expected_utility(policy, instance) {
            Err(e) if e.is_cap_exceeded() => mc_expected_utility(policy, instance, trials, seed, MarginalMode::Exact),
            other => other,
        },
    }
}

fn slack(report: &EvalReport<f64>) -> f64 {
    match report.method {
        Method::Exact => 1e-9,
        Method::MonteCarlo => 3.0 * report.stderr,
    }
}

fn tradeoff_violations(rows: &[ResultRow], reports: &[EvalReport<f64>]) -> Vec<String> {
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[a]
            .instance_id
            .cmp(&rows[b].instance_id)
            .then(rows[a].alpha.total_cmp(&rows[b].alpha))
    });
    for pair in order.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if rows[a].instance_id != rows[b].instance_id || rows[a].alpha == rows[b].alpha {
            continue;
        }
        let (ra, rb) = (&reports[a], &reports[b]);
        let utility_slack = 3.0 * ra.stderr.hypot(rb.stderr) + 1e-9;
        if ra.expected_utility - rb.expected_utility > utility_slack {
            out.push(format!(
                "{}: expected utility drops from {} at alpha={} to {} at alpha={}",
                rows[a].instance_id, ra.expected_utility, rows[a].alpha, rb.expected_utility, rows[b].alpha
            ));
        }
        let batch_slack = 3.0 * ra.batches_stderr.hypot(rb.batches_stderr) + 1e-9;
        if ra.mean_batches - rb.mean_batches > batch_slack {
            out.push(format!(
                "{}: mean batches drop from {} at alpha={} to {} at alpha={}",
                rows[a].instance_id, ra.mean_batches, rows[a].alpha, rb.mean_batches, rows[b].alpha
            ));
        }
    }
    out
}

/// Runs the sweep. Rows come out ordered by instance, then α as given.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let mut alphas: Vec<f64> = Vec::new();
    for &a in &config.alphas {
        let a = config.policy.effective_alpha(a);
        if !alphas.contains(&a) {
            alphas.push(a);
        }
    }
    let truncated = config.truncation != Truncation::None;

    struct Reference {
        oracle: Option<f64>,
        monotone: bool,
    }
    let references: Vec<Reference> = config
        .instances
        .par_iter()
        .map(|instance| {
            if !config.oracle {
                return Ok(Reference {
                    oracle: None,
                    monotone: false,
                });
            }
            let oracle = optimal_adaptive_value(instance, &config.constraint)?;
            let monotone = match check_adaptive_monotonicity(instance, 1e-9) {
                Ok(report) => report.holds,
                Err(e) if e.is_cap_exceeded() => false,
                Err(e) => return Err(e),
            };
            Ok(Reference {
                oracle: Some(oracle),
                monotone,
            })
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, f64)> = (0..config.instances.len())
        .flat_map(|i| alphas.iter().map(move |&a| (i, a)))
        .collect();
    let evaluated: Vec<(ResultRow, EvalReport<f64>)> = jobs
        .par_iter()
        .map(|&(i, alpha)| {
            let instance = &config.instances[i];
            let policy = build_policy(config.policy, alpha, &config.constraint, config.truncation, instance)?;
            let report = evaluate(policy.as_ref(), instance, config.method, config.trials, config.seed)?;
            let reference = &references[i];
            let bound = theorem_bound(config.policy, alpha, reference.monotone, truncated);
            let ratio = reference
                .oracle
                .filter(|&o| o > 0.0)
                .map(|o| report.expected_utility / o);
            let satisfied = match (bound, reference.oracle) {
                (Some(b), Some(o)) => Some(report.expected_utility >= b * o - slack(&report)),
                _ => None,
            };
            let row = ResultRow {
                instance_id: instance.id.clone(),
                policy: config.policy.to_string(),
                alpha,
                constraint: config.constraint.describe(),
                method: report.method.as_str().into(),
                expected_utility: report.expected_utility,
                stderr: report.stderr,
                mean_batches: report.mean_batches,
                max_batches: report.max_batches,
                oracle_value: reference.oracle,
                ratio,
                theorem_bound: bound,
                bound_satisfied: satisfied,
            };
            Ok((row, report))
        })
        .collect::<Result<_>>()?;
    let (rows, reports): (Vec<ResultRow>, Vec<EvalReport<f64>>) = evaluated.into_iter().unzip();
    let tradeoff = if config.policy.is_greedy() && !truncated {
        tradeoff_violations(&rows, &reports)
    } else {
        Vec::new()
    };
    Ok(ExperimentOutcome {
        rows,
        tradeoff_violations: tradeoff,
    })
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer
            .write_record([
                "instance_id",
                "policy",
                "alpha",
                "constraint",
                "method",
                "expected_utility",
                "stderr",
                "mean_batches",
                "max_batches",
                "oracle_value",
                "ratio",
                "theorem_bound",
                "bound_satisfied",
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(rows, std::io::BufWriter::new(file))
}
