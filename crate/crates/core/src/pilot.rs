//! The pilot pipeline: build one high-quality Pareto approximation set for a
//! representative instance by running both engines across every objective
//! subset, merging the non-dominated union, reseeding from it, and finishing
//! with full five-objective runs. Targets are then sampled from the set.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::{Evaluated, HasObjectives, NondominatedArchive};
use crate::error::{Error, Result};
use crate::goalprog::TargetVector;
use crate::instance::Instance;
use crate::moea::moead::{moead, DecompositionConfig};
use crate::moea::nsga2::nsga2;
use crate::moea::{EngineKind, EvolutionConfig, ObjectiveSubset};
use crate::objective::{ObjectiveVector, NUM_OBJECTIVES};
use crate::seeds::derive_seed;
use crate::solution::{Chromosome, Solution};

/// Which run produced an archive entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: EngineKind,
    pub subset: ObjectiveSubset,
    pub seed: u64,
}

/// One member of the approximation set.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry {
    pub objectives: ObjectiveVector,
    pub solution: Solution,
    pub provenance: Provenance,
}

impl HasObjectives for ArchiveEntry {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

/// A mutually non-dominated set of evaluated solutions with provenance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ApproximationSet {
    pub entries: Vec<ArchiveEntry>,
}

impl ApproximationSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    /// Check mutual non-dominance and duplicate-freeness.
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.entries.iter().enumerate() {
            for (j, b) in self.entries.iter().enumerate() {
                if i == j {
                    continue;
                }
                if a.objectives.dominates(&b.objectives) {
                    return Err(Error::invalid(format!(
                        "approximation set is not mutually non-dominated: entry {} dominates {}",
                        i, j
                    )));
                }
                if i < j && a.objectives.0 == b.objectives.0 {
                    return Err(Error::invalid(format!(
                        "approximation set has duplicate objective vectors at {} and {}",
                        i, j
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Evaluation budgets of the pilot stages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotBudget {
    /// Evaluations per (engine, subset) job in the subset sweep.
    pub per_subset_evals: u64,
    /// Evaluations per final-stage five-objective run.
    pub final_evals: u64,
    /// Final-stage repetitions per engine.
    pub final_reps: usize,
}

impl PilotBudget {
    /// Full-scale budgets (hours per pilot).
    pub fn paper() -> Self {
        PilotBudget {
            per_subset_evals: 1_000_000,
            final_evals: 2_000_000,
            final_reps: 4,
        }
    }

    /// Scaled-down budgets for desk or CI runs (seconds per pilot).
    pub fn desk() -> Self {
        PilotBudget {
            per_subset_evals: 2_000,
            final_evals: 10_000,
            final_reps: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_subset_evals == 0 || self.final_evals == 0 || self.final_reps == 0 {
            return Err(Error::invalid("pilot budgets must be positive"));
        }
        Ok(())
    }
}

/// All size-2, size-3 and size-4 objective subsets in lexicographic order
/// (the full five-objective vector is reserved for the final stage).
pub fn enumerate_subsets() -> Vec<ObjectiveSubset> {
    let mut out = Vec::new();
    let idx: Vec<u8> = (1..=NUM_OBJECTIVES as u8).collect();
    for size in 2..=4usize {
        let mut stack = vec![(Vec::new(), 0usize)];
        while let Some((prefix, next)) = stack.pop() {
            if prefix.len() == size {
                out.push(ObjectiveSubset::new(prefix).expect("valid subset"));
                continue;
            }
            // push in reverse so the pop order is lexicographic
            for k in (next..idx.len()).rev() {
                let mut p = prefix.clone();
                p.push(idx[k]);
                stack.push((p, k + 1));
            }
        }
    }
    out
}

/// Provenance record of one pilot job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotJob {
    /// 1 = subset sweep, 2 = seeded five-objective stage.
    pub stage: u8,
    pub engine: EngineKind,
    pub subset: ObjectiveSubset,
    pub seed: u64,
    pub budget: u64,
}

/// Everything needed to reproduce a pilot run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotManifest {
    pub master_seed: u64,
    pub budget: PilotBudget,
    pub engine_config: EvolutionConfig,
    pub jobs: Vec<PilotJob>,
}

fn run_engine(
    instance: &Instance,
    job: &PilotJob,
    base: &EvolutionConfig,
    initial: Option<&[Chromosome]>,
) -> Result<Vec<ArchiveEntry>> {
    let cfg = EvolutionConfig {
        seed: job.seed,
        budget: job.budget,
        ..base.clone()
    };
    let evaluated: Vec<Evaluated> = match job.engine {
        EngineKind::Nsga2 => nsga2(instance, &job.subset, &cfg, initial)?.archive,
        EngineKind::Moead => moead(
            instance,
            &job.subset,
            &cfg,
            &DecompositionConfig::default(),
            initial,
        )?,
    };
    Ok(evaluated
        .into_iter()
        .map(|e| ArchiveEntry {
            objectives: e.objectives,
            solution: e.solution,
            provenance: Provenance {
                engine: job.engine,
                subset: job.subset.clone(),
                seed: job.seed,
            },
        })
        .collect())
}

/// Draw the archive half of a seeded population: without replacement when
/// the archive is large enough, with replacement otherwise.
fn draw_from_archive(
    entries: &[ArchiveEntry],
    n_customers: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Chromosome> {
    if entries.is_empty() || count == 0 {
        return Vec::new();
    }
    if entries.len() >= count {
        let mut idx: Vec<usize> = (0..entries.len()).collect();
        for i in 0..count {
            let j = rng.random_range(i..idx.len());
            idx.swap(i, j);
        }
        idx[..count]
            .iter()
            .map(|&i| entries[i].solution.to_chromosome(n_customers))
            .collect()
    } else {
        (0..count)
            .map(|_| {
                let i = rng.random_range(0..entries.len());
                entries[i].solution.to_chromosome(n_customers)
            })
            .collect()
    }
}

/// Execute the full pilot pipeline. Deterministic per seed; subset jobs run
/// on the rayon pool and merge in job order.
pub fn run_pilot(
    instance: &Instance,
    budget: &PilotBudget,
    base: &EvolutionConfig,
    seed: u64,
) -> Result<(ApproximationSet, PilotManifest)> {
    budget.validate()?;
    base.validate()?;

    // Stage 1-3: both engines on every 2-, 3- and 4-objective subset.
    let subsets = enumerate_subsets();
    let mut jobs = Vec::new();
    for (si, subset) in subsets.iter().enumerate() {
        for engine in EngineKind::BOTH {
            jobs.push(PilotJob {
                stage: 1,
                engine,
                subset: subset.clone(),
                seed: derive_seed(seed, &[1, engine as u64, si as u64]),
                budget: budget.per_subset_evals,
            });
        }
    }
    let sweep: Vec<Vec<ArchiveEntry>> = jobs
        .par_iter()
        .map(|job| run_engine(instance, job, base, None))
        .collect::<Result<_>>()?;

    // Stage 4: merge into the mid-pilot archive.
    let mut merged = NondominatedArchive::new();
    for entries in sweep {
        merged.extend(entries);
    }

    // Stage 5-6: seeded populations, both engines, full objective vector.
    let full = ObjectiveSubset::full();
    let mid_entries: Vec<ArchiveEntry> = merged.entries().to_vec();
    let mut final_jobs = Vec::new();
    for engine in EngineKind::BOTH {
        for rep in 0..budget.final_reps {
            final_jobs.push(PilotJob {
                stage: 2,
                engine,
                subset: full.clone(),
                seed: derive_seed(seed, &[2, engine as u64, rep as u64]),
                budget: budget.final_evals,
            });
        }
    }
    let final_runs: Vec<Vec<ArchiveEntry>> = final_jobs
        .par_iter()
        .map(|job| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(job.seed, &[0x5eed]));
            let half = base.population / 2;
            let initial = draw_from_archive(&mid_entries, instance.n, half, &mut rng);
            // the engine pads the other half with random chromosomes
            run_engine(instance, job, base, Some(&initial))
        })
        .collect::<Result<_>>()?;

    // Stage 7: non-dominated union of everything.
    let mut union = merged;
    for entries in final_runs {
        union.extend(entries);
    }

    jobs.extend(final_jobs);
    let manifest = PilotManifest {
        master_seed: seed,
        budget: *budget,
        engine_config: base.clone(),
        jobs,
    };
    let set = ApproximationSet {
        entries: union.into_entries(),
    };
    Ok((set, manifest))
}

/// Sample `k` distinct target vectors uniformly from the approximation set.
pub fn select_targets(
    approx: &ApproximationSet,
    k: usize,
    seed: u64,
) -> Result<Vec<TargetVector>> {
    if k > approx.len() {
        return Err(Error::invalid(format!(
            "cannot select {} targets from an approximation set of {}",
            k,
            approx.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..approx.len()).collect();
    for i in 0..k {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    Ok(idx[..k]
        .iter()
        .map(|&i| TargetVector::from_objectives(&approx.entries[i].objectives))
        .collect())
}

// --- persistence ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ArchiveRow {
    #[serde(rename = "Z1")]
    z1: f64,
    #[serde(rename = "Z2")]
    z2: f64,
    #[serde(rename = "Z3")]
    z3: f64,
    #[serde(rename = "Z4")]
    z4: f64,
    #[serde(rename = "Z5")]
    z5: f64,
    solution: String,
    engine: String,
    subset: String,
    seed: u64,
}

/// Persist an approximation set as `archive.csv` plus one solution text file
/// per entry under `solutions/`.
pub fn write_approximation_set(set: &ApproximationSet, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let sol_dir = dir.join("solutions");
    fs::create_dir_all(&sol_dir).map_err(|e| Error::io(&sol_dir, e))?;
    let csv_path = dir.join("archive.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|e| Error::parse(&csv_path, e.to_string()))?;
    for (i, entry) in set.entries.iter().enumerate() {
        let rel = format!("solutions/entry_{:04}.txt", i);
        let z = entry.objectives.0;
        writer
            .serialize(ArchiveRow {
                z1: z[0],
                z2: z[1],
                z3: z[2],
                z4: z[3],
                z5: z[4],
                solution: rel.clone(),
                engine: entry.provenance.engine.to_string(),
                subset: entry.provenance.subset.tag(),
                seed: entry.provenance.seed,
            })
            .map_err(|e| Error::parse(&csv_path, e.to_string()))?;
        let sol_path = dir.join(&rel);
        fs::write(&sol_path, entry.solution.to_text()).map_err(|e| Error::io(&sol_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(&csv_path, e))?;
    Ok(())
}

/// Load an approximation set persisted by [`write_approximation_set`] and
/// re-validate its invariants. `path` may be the directory or the
/// `archive.csv` inside it.
pub fn read_approximation_set(path: impl AsRef<Path>) -> Result<ApproximationSet> {
    let path = path.as_ref();
    let (dir, csv_path) = if path.is_dir() {
        (path.to_path_buf(), path.join("archive.csv"))
    } else {
        (
            path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            path.to_path_buf(),
        )
    };
    let mut reader = csv::Reader::from_path(&csv_path)
        .map_err(|e| Error::parse(&csv_path, e.to_string()))?;
    let mut entries = Vec::new();
    for row in reader.deserialize::<ArchiveRow>() {
        let row = row.map_err(|e| Error::parse(&csv_path, e.to_string()))?;
        let sol_path = dir.join(&row.solution);
        let text = fs::read_to_string(&sol_path).map_err(|e| Error::io(&sol_path, e))?;
        let solution = Solution::from_text(&text)?;
        entries.push(ArchiveEntry {
            objectives: ObjectiveVector([row.z1, row.z2, row.z3, row.z4, row.z5]),
            solution,
            provenance: Provenance {
                engine: row.engine.parse()?,
                subset: ObjectiveSubset::parse_tag(&row.subset)?,
                seed: row.seed,
            },
        });
    }
    let set = ApproximationSet { entries };
    set.validate()
        .map_err(|e| Error::parse(&csv_path, e.to_string()))?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GeneratorSpec, TwProfile};
    use crate::objective::pareto_filter_indices;

    fn mini_budget() -> PilotBudget {
        PilotBudget {
            per_subset_evals: 60,
            final_evals: 120,
            final_reps: 1,
        }
    }

    fn mini_cfg() -> EvolutionConfig {
        EvolutionConfig {
            population: 12,
            ..Default::default()
        }
    }

    #[test]
    fn subset_enumeration_is_lexicographic_and_complete() {
        let subsets = enumerate_subsets();
        assert_eq!(subsets.len(), 25); // C(5,2) + C(5,3) + C(5,4)
        assert_eq!(subsets[0], ObjectiveSubset::new(vec![1, 2]).unwrap());
        assert_eq!(subsets[1], ObjectiveSubset::new(vec![1, 3]).unwrap());
        assert!(subsets.iter().all(|s| s.len() >= 2 && s.len() <= 4));
        let unique: std::collections::HashSet<String> =
            subsets.iter().map(|s| s.tag()).collect();
        assert_eq!(unique.len(), 25);
    }

    #[test]
    fn pilot_output_is_nondominated_and_deterministic() {
        let inst =
            generate_instance(&GeneratorSpec::new(20, TwProfile::Tw4, 60.0, 7).custom()).unwrap();
        let (set_a, manifest_a) = run_pilot(&inst, &mini_budget(), &mini_cfg(), 99).unwrap();
        let (set_b, manifest_b) = run_pilot(&inst, &mini_budget(), &mini_cfg(), 99).unwrap();
        assert_eq!(set_a, set_b);
        assert_eq!(manifest_a, manifest_b);
        set_a.validate().unwrap();
        let objs = set_a.objectives();
        assert_eq!(pareto_filter_indices(&objs).len(), objs.len());
        // 25 subsets x 2 engines + 2 final runs
        assert_eq!(manifest_a.jobs.len(), 52);
    }

    #[test]
    fn pilot_entries_reevaluate_to_their_stored_objectives() {
        let inst =
            generate_instance(&GeneratorSpec::new(15, TwProfile::Tw1, 20.0, 3).custom()).unwrap();
        let (set, _) = run_pilot(&inst, &mini_budget(), &mini_cfg(), 5).unwrap();
        for entry in &set.entries {
            let z = crate::solution::evaluate(
                &entry.solution,
                &inst,
                crate::solution::DelayRef::WindowStart,
            )
            .unwrap();
            assert_eq!(z, entry.objectives);
        }
    }

    #[test]
    fn select_targets_samples_without_replacement() {
        let inst =
            generate_instance(&GeneratorSpec::new(15, TwProfile::Tw4, 60.0, 11).custom()).unwrap();
        let (set, _) = run_pilot(&inst, &mini_budget(), &mini_cfg(), 2).unwrap();
        let k = set.len();
        let targets = select_targets(&set, k, 17).unwrap();
        assert_eq!(targets.len(), k);
        let mut seen: Vec<[f64; 5]> = targets.iter().map(|t| t.0).collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seen.dedup();
        assert_eq!(seen.len(), k);
        for t in &targets {
            assert!(set.entries.iter().any(|e| e.objectives.0 == t.0));
        }
        assert!(select_targets(&set, k + 1, 17).is_err());
    }

    #[test]
    fn select_single_target_varies_with_seed() {
        let inst =
            generate_instance(&GeneratorSpec::new(15, TwProfile::Tw4, 60.0, 11).custom()).unwrap();
        let (set, _) = run_pilot(&inst, &mini_budget(), &mini_cfg(), 2).unwrap();
        assert!(set.len() > 3, "archive too small for the seed-variety check");
        let picks: std::collections::HashSet<u64> = (0..20)
            .map(|s| {
                let t = select_targets(&set, 1, s).unwrap()[0];
                t.0.iter().fold(0u64, |acc, v| acc ^ v.to_bits())
            })
            .collect();
        assert!(picks.len() > 1);
    }

    #[test]
    fn archive_persistence_round_trips() {
        let inst =
            generate_instance(&GeneratorSpec::new(12, TwProfile::Tw2, 5.0, 13).custom()).unwrap();
        let (set, _) = run_pilot(&inst, &mini_budget(), &mini_cfg(), 23).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_approximation_set(&set, dir.path()).unwrap();
        let back = read_approximation_set(dir.path()).unwrap();
        assert_eq!(set, back);
    }
}
