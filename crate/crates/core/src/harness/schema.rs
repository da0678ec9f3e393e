//! JSON instance files.
//!
//! ```json
//! {
//!   "id": "toy",
//!   "n": 2,
//!   "costs": [1.0, 1.0],
//!   "states": [[0, 1], [0, 1]],
//!   "prior": {"kind": "independent", "probs": [[0.5, 0.5], [0.2, 0.8]]},
//!   "utility": {"kind": "weighted_coverage", "elements": 2, "weights": [1.0, 2.0],
//!               "covers": [[[], [0]], [[], [0, 1]]]}
//! }
//! ```
//!
//! Explicit priors list rows `{"phi": [...], "p": ...}`. Other utility kinds
//! are `coverage_penalty` (adds `"penalties"`), `version_space`
//! (`"hypotheses": [{"answers": [...], "mass": ...}]`) and `tabular`
//! (`"entries": [{"obs": [[item, state], ...], "value": ...}]`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{CostFunction, ItemId, Prior, Realization, StateLabel, StateSpace};
use crate::scalar::Scalar;
use crate::utility::{CoverageWithPenalty, Hypothesis, Tabular, UtilityFunction, VersionSpace, WeightedCoverage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub id: String,
    pub n: usize,
    pub costs: Vec<f64>,
    pub states: Vec<Vec<StateLabel>>,
    pub prior: PriorDoc,
    pub utility: UtilityDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorDoc {
    Independent { probs: Vec<Vec<f64>> },
    Explicit { rows: Vec<RowDoc> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDoc {
    pub phi: Vec<StateLabel>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityDoc {
    WeightedCoverage {
        elements: usize,
        weights: Vec<f64>,
        covers: Vec<Vec<Vec<usize>>>,
    },
    CoveragePenalty {
        elements: usize,
        weights: Vec<f64>,
        covers: Vec<Vec<Vec<usize>>>,
        penalties: Vec<f64>,
    },
    VersionSpace {
        hypotheses: Vec<HypothesisDoc>,
    },
    Tabular {
        entries: Vec<EntryDoc>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisDoc {
    pub answers: Vec<StateLabel>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub obs: Vec<(ItemId, StateLabel)>,
    pub value: f64,
}

fn at(path: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Schema { .. } => e,
        other => Error::schema(path, other.to_string()),
    }
}

fn coverage(elements: usize, weights: Vec<f64>, covers: Vec<Vec<Vec<usize>>>) -> Result<WeightedCoverage<f64>> {
    if weights.len() != elements {
        return Err(Error::schema(
            "utility.weights",
            format!("{} weights for {elements} elements", weights.len()),
        ));
    }
    Ok(WeightedCoverage { weights, covers })
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance<f64>> {
        if self.states.len() != self.n {
            return Err(Error::schema(
                "states",
                format!("{} entries for n = {}", self.states.len(), self.n),
            ));
        }
        for (e, labels) in self.states.iter().enumerate() {
            if labels.is_empty() || labels.iter().enumerate().any(|(i, &s)| i != s) {
                return Err(Error::schema(format!("states[{e}]"), "labels must be 0, 1, ..., m-1"));
            }
        }
        if self.costs.len() != self.n {
            return Err(Error::schema(
                "costs",
                format!("{} costs for n = {}", self.costs.len(), self.n),
            ));
        }
        if let Some(e) = self.costs.iter().position(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::schema(
                format!("costs[{e}]"),
                "cost must be a nonnegative number",
            ));
        }
        let space = StateSpace::new(self.states.iter().map(Vec::len).collect()).map_err(at("states"))?;
        let costs = CostFunction::new(self.costs).map_err(at("costs"))?;
        let prior = match self.prior {
            PriorDoc::Independent { probs } => Prior::independent(probs),
            PriorDoc::Explicit { rows } => {
                Prior::explicit(rows.into_iter().map(|r| (Realization::new(r.phi), r.p)).collect())
            }
        }
        .map_err(at("prior"))?;
        prior.validate(&space).map_err(at("prior"))?;
        let utility = match self.utility {
            UtilityDoc::WeightedCoverage {
                elements,
                weights,
                covers,
            } => UtilityFunction::WeightedCoverage(coverage(elements, weights, covers)?),
            UtilityDoc::CoveragePenalty {
                elements,
                weights,
                covers,
                penalties,
            } => UtilityFunction::CoverageWithPenalty(CoverageWithPenalty {
                coverage: coverage(elements, weights, covers)?,
                penalties,
            }),
            UtilityDoc::VersionSpace { hypotheses } => UtilityFunction::VersionSpace(VersionSpace {
                hypotheses: hypotheses
                    .into_iter()
                    .map(|h| Hypothesis {
                        answers: h.answers,
                        mass: h.mass,
                    })
                    .collect(),
            }),
            UtilityDoc::Tabular { entries } => {
                UtilityFunction::Tabular(Tabular::new(self.n, entries.into_iter().map(|e| (e.obs, e.value))))
            }
        };
        utility.validate(&space).map_err(at("utility"))?;
        let instance = Instance::new(space, costs, prior, utility).map_err(at("utility"))?;
        Ok(instance.with_id(self.id))
    }

    pub fn from_instance<S: Scalar>(instance: &Instance<S>) -> Self {
        let f = |v: &S| v.as_f64();
        let fs = |v: &[S]| v.iter().map(f).collect::<Vec<_>>();
        let prior = match instance.prior() {
            Prior::Independent(p) => PriorDoc::Independent {
                probs: p.iter().map(|d| fs(d)).collect(),
            },
            Prior::Explicit(rows) => PriorDoc::Explicit {
                rows: rows
                    .iter()
                    .map(|(phi, p)| RowDoc {
                        phi: phi.states().to_vec(),
                        p: f(p),
                    })
                    .collect(),
            },
        };
        let utility = match instance.utility() {
            UtilityFunction::WeightedCoverage(c) => UtilityDoc::WeightedCoverage {
                elements: c.weights.len(),
                weights: fs(&c.weights),
                covers: c.covers.clone(),
            },
            UtilityFunction::CoverageWithPenalty(c) => UtilityDoc::CoveragePenalty {
                elements: c.coverage.weights.len(),
                weights: fs(&c.coverage.weights),
                covers: c.coverage.covers.clone(),
                penalties: fs(&c.penalties),
            },
            UtilityFunction::VersionSpace(v) => UtilityDoc::VersionSpace {
                hypotheses: v
                    .hypotheses
                    .iter()
                    .map(|h| HypothesisDoc {
                        answers: h.answers.clone(),
                        mass: f(&h.mass),
                    })
                    .collect(),
            },
            UtilityFunction::Tabular(t) => {
                let mut entries: Vec<EntryDoc> = t
                    .entries()
                    .map(|(k, v)| EntryDoc {
                        obs: k.clone(),
                        value: f(v),
                    })
                    .collect();
                entries.sort_by(|a, b| a.obs.cmp(&b.obs));
                UtilityDoc::Tabular { entries }
            }
        };
        InstanceDoc {
            id: instance.id.clone(),
            n: instance.n(),
            costs: fs(instance.costs().as_slice()),
            states: instance.states().counts().iter().map(|&m| (0..m).collect()).collect(),
            prior,
            utility,
        }
    }
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<Instance<f64>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(
            if path == "." { String::new() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    doc.into_instance()
}

pub fn instance_to_json<S: Scalar>(instance: &Instance<S>) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from_instance(instance)).expect("instance documents serialize")
}

/// Reads an instance file. A missing `id` defaults to the file stem.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let instance = instance_from_json(&text)?;
    if instance.id.is_empty() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(instance.with_id(stem));
    }
    Ok(instance)
}

pub fn write_instance<S: Scalar>(path: impl AsRef<Path>, instance: &Instance<S>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, instance_to_json(instance) + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
