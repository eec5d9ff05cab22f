//! Global tool configuration: a JSON file sets the defaults, command-line
//! flags override per run, and every manifest embeds the resolved values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use movrptw::analysis::ScatterMode;
use movrptw::goalprog::WeightSolverConfig;
use movrptw::moea::EvolutionConfig;
use movrptw::pilot::PilotBudget;
use movrptw::solution::DelayRef;

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population: usize,
    pub budget: u64,
    pub crossover_rate: f64,
    pub mutation_rate: Option<f64>,
    pub elite_fraction: f64,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for GaSection {
    fn default() -> Self {
        GaSection {
            population: 500,
            budget: 50_000,
            crossover_rate: 0.9,
            mutation_rate: None,
            elite_fraction: 0.05,
            tournament_size: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoeaSection {
    pub population: usize,
    pub crossover_rate: f64,
    pub mutation_rate: Option<f64>,
}

impl Default for MoeaSection {
    fn default() -> Self {
        MoeaSection {
            population: 100,
            crossover_rate: 0.9,
            mutation_rate: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PilotSection {
    /// `desk` or `paper`.
    pub preset: String,
    pub per_subset_evals: Option<u64>,
    pub final_evals: Option<u64>,
    pub final_reps: Option<usize>,
}

impl Default for PilotSection {
    fn default() -> Self {
        PilotSection {
            preset: "desk".into(),
            per_subset_evals: None,
            final_evals: None,
            final_reps: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightSolverSection {
    pub restarts: usize,
    pub grid_resolution: usize,
    pub seed: u64,
}

impl Default for WeightSolverSection {
    fn default() -> Self {
        let d = WeightSolverConfig::default();
        WeightSolverSection {
            restarts: d.restarts,
            grid_resolution: d.grid_resolution,
            seed: d.seed,
        }
    }
}

/// The documented configuration key set.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub delay_ref: DelayRef,
    /// Switch threshold of the Euclidean-distance objective.
    pub epsilon: Option<f64>,
    pub ed_normalize: bool,
    pub scatter: Option<String>,
    pub ga: GaSection,
    pub moea: MoeaSection,
    pub pilot: PilotSection,
    pub weight_solver: WeightSolverSection,
}

impl ToolConfig {
    pub fn load(path: Option<&Path>) -> Result<ToolConfig, CliError> {
        match path {
            None => Ok(ToolConfig::default()),
            Some(p) => {
                let body = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&body)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", p.display())))
            }
        }
    }

    pub fn ga_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            population: self.ga.population,
            budget: self.ga.budget,
            crossover_rate: self.ga.crossover_rate,
            mutation_rate: self.ga.mutation_rate,
            seed: self.ga.seed,
            elite_fraction: self.ga.elite_fraction,
            tournament_size: self.ga.tournament_size,
            delay_ref: self.delay_ref,
        }
    }

    pub fn moea_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            population: self.moea.population,
            crossover_rate: self.moea.crossover_rate,
            mutation_rate: self.moea.mutation_rate,
            delay_ref: self.delay_ref,
            ..EvolutionConfig::default()
        }
    }

    pub fn pilot_budget(&self) -> Result<PilotBudget, CliError> {
        let mut budget = match self.pilot.preset.as_str() {
            "desk" => PilotBudget::desk(),
            "paper" => PilotBudget::paper(),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown pilot preset '{other}': expected desk or paper"
                )))
            }
        };
        if let Some(v) = self.pilot.per_subset_evals {
            budget.per_subset_evals = v;
        }
        if let Some(v) = self.pilot.final_evals {
            budget.final_evals = v;
        }
        if let Some(v) = self.pilot.final_reps {
            budget.final_reps = v;
        }
        Ok(budget)
    }

    pub fn weight_solver_config(&self) -> WeightSolverConfig {
        WeightSolverConfig {
            restarts: self.weight_solver.restarts,
            grid_resolution: self.weight_solver.grid_resolution,
            seed: self.weight_solver.seed,
            ..WeightSolverConfig::default()
        }
    }

    pub fn scatter_mode(&self) -> Result<ScatterMode, CliError> {
        match self.scatter.as_deref() {
            None | Some("wide") => Ok(ScatterMode::Wide),
            Some("pairs") => Ok(ScatterMode::Pairs),
            Some(other) => Err(CliError::Usage(format!(
                "unknown scatter mode '{other}': expected wide or pairs"
            ))),
        }
    }
}
