//! Multiobjective engines (NSGA-II, MOEA/D) and the variation operators
//! they share with the single-objective GA.

pub mod moead;
pub mod nsga2;
pub mod operators;
pub mod sorting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::objective::{ObjectiveVector, NUM_OBJECTIVES};
use crate::solution::DelayRef;

/// A sorted set of objective indices (1-based, `Z1..Z5`) an engine optimizes.
/// Singleton subsets are accepted so the engines double as single-objective
/// searchers in sanity checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveSubset {
    indices: Vec<u8>,
}

impl ObjectiveSubset {
    pub fn new(mut indices: Vec<u8>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("objective subset must be non-empty"));
        }
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::invalid("objective subset must not repeat indices"));
        }
        if indices.iter().any(|&i| i == 0 || i as usize > NUM_OBJECTIVES) {
            return Err(Error::invalid(format!(
                "objective indices must lie in 1..={}",
                NUM_OBJECTIVES
            )));
        }
        Ok(ObjectiveSubset { indices })
    }

    /// All five objectives.
    pub fn full() -> Self {
        ObjectiveSubset {
            indices: (1..=NUM_OBJECTIVES as u8).collect(),
        }
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Mask a full objective vector down to this subset.
    pub fn project(&self, z: &ObjectiveVector) -> Vec<f64> {
        self.indices.iter().map(|&i| z.0[i as usize - 1]).collect()
    }

    /// Compact form used in file names and manifests, e.g. `z1+z3`.
    pub fn tag(&self) -> String {
        let parts: Vec<String> = self.indices.iter().map(|i| format!("z{}", i)).collect();
        parts.join("+")
    }

    pub fn parse_tag(tag: &str) -> Result<Self> {
        let indices = tag
            .split('+')
            .map(|part| {
                part.strip_prefix('z')
                    .and_then(|d| d.parse::<u8>().ok())
                    .ok_or_else(|| Error::invalid(format!("bad subset tag '{}'", tag)))
            })
            .collect::<Result<Vec<u8>>>()?;
        ObjectiveSubset::new(indices)
    }
}

impl std::fmt::Display for ObjectiveSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Which evolutionary engine produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Nsga2,
    Moead,
}

impl EngineKind {
    pub const BOTH: [EngineKind; 2] = [EngineKind::Nsga2, EngineKind::Moead];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Nsga2 => "nsga2",
            EngineKind::Moead => "moead",
        }
    }
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsga2" => Ok(EngineKind::Nsga2),
            "moead" => Ok(EngineKind::Moead),
            other => Err(Error::invalid(format!("unknown engine '{}'", other))),
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shared evolutionary parameters. `mutation_rate = None` selects the
/// per-gene default of `1/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub population: usize,
    pub budget: u64,
    pub crossover_rate: f64,
    pub mutation_rate: Option<f64>,
    pub seed: u64,
    /// Fraction of the population copied unchanged each generation (GA only).
    pub elite_fraction: f64,
    pub tournament_size: usize,
    pub delay_ref: DelayRef,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population: 100,
            budget: 10_000,
            crossover_rate: 0.9,
            mutation_rate: None,
            seed: 0,
            elite_fraction: 0.05,
            tournament_size: 2,
            delay_ref: DelayRef::WindowStart,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("population must be at least 2"));
        }
        if self.budget < self.population as u64 {
            return Err(Error::invalid(
                "evaluation budget must cover at least the initial population",
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::invalid("crossover rate must lie in [0, 1]"));
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid("mutation rate must lie in [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.elite_fraction) {
            return Err(Error::invalid("elite fraction must lie in [0, 1]"));
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid("tournament size must be at least 1"));
        }
        Ok(())
    }

    pub fn mutation_rate_for(&self, instance: &Instance) -> f64 {
        self.mutation_rate.unwrap_or(1.0 / instance.n as f64)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}
