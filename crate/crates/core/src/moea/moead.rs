//! MOEA/D with Tchebycheff aggregation over a projection of the objectives.
//!
//! One scalar subproblem per simplex-lattice weight vector, neighborhood
//! mating and replacement, online ideal-point update, and the same full
//! objective-space running archive the NSGA-II engine keeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{Evaluated, NondominatedArchive};
use crate::error::Result;
use crate::instance::Instance;
use crate::moea::operators::{mutate, random_chromosome, uniform_crossover};
use crate::moea::{EvolutionConfig, ObjectiveSubset};
use crate::solution::Chromosome;

/// Decomposition parameters. The lattice resolution is derived from the
/// configured population size; `neighborhood` is clamped to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionConfig {
    pub neighborhood: usize,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig { neighborhood: 20 }
    }
}

/// Weight vectors on the unit simplex: the densest lattice whose size does
/// not exceed `target`, in lexicographic order. Falls back to the single
/// uniform vector when even the coarsest lattice is too large.
pub fn simplex_lattice(dim: usize, target: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    if dim == 1 {
        return vec![vec![1.0]];
    }
    let count = |h: usize| -> u128 {
        // C(h + dim - 1, dim - 1)
        let mut c: u128 = 1;
        for k in 0..(dim - 1) {
            c = c * (h + k + 1) as u128 / (k + 1) as u128;
        }
        c
    };
    let mut h = 0usize;
    while count(h + 1) <= target as u128 {
        h += 1;
    }
    if h == 0 {
        return vec![vec![1.0 / dim as f64; dim]];
    }
    let mut out = Vec::new();
    let mut parts = vec![0usize; dim];
    fill_compositions(h, 0, &mut parts, &mut out);
    out.iter()
        .map(|k| k.iter().map(|&v| v as f64 / h as f64).collect())
        .collect::<Vec<Vec<f64>>>()
}

fn fill_compositions(remaining: usize, idx: usize, parts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if idx == parts.len() - 1 {
        parts[idx] = remaining;
        out.push(parts.clone());
        return;
    }
    for v in 0..=remaining {
        parts[idx] = v;
        fill_compositions(remaining - v, idx + 1, parts, out);
    }
}

fn neighborhoods(weights: &[Vec<f64>], t: usize) -> Vec<Vec<usize>> {
    let n = weights.len();
    let t = t.min(n).max(1);
    (0..n)
        .map(|i| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                let da: f64 = weights[i]
                    .iter()
                    .zip(&weights[a])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                let db: f64 = weights[i]
                    .iter()
                    .zip(&weights[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                da.total_cmp(&db).then(a.cmp(&b))
            });
            order.truncate(t);
            order
        })
        .collect()
}

/// Tchebycheff aggregation `max_i w_i * (f_i - z*_i)` with a floor on zero
/// lattice weights.
fn tchebycheff(f: &[f64], w: &[f64], ideal: &[f64]) -> f64 {
    f.iter()
        .zip(w)
        .zip(ideal)
        .map(|((&fi, &wi), &zi)| wi.max(1e-6) * (fi - zi))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Run MOEA/D until the evaluation budget is consumed; returns the running
/// non-dominated archive of every evaluated point in full objective space.
/// Deterministic per seed.
pub fn moead(
    instance: &Instance,
    subset: &ObjectiveSubset,
    cfg: &EvolutionConfig,
    decomposition: &DecompositionConfig,
    initial: Option<&[Chromosome]>,
) -> Result<Vec<Evaluated>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mutation_rate = cfg.mutation_rate_for(instance);
    let weights = simplex_lattice(subset.len(), cfg.population);
    let pop_size = weights.len();
    let nbhd = neighborhoods(&weights, decomposition.neighborhood);
    let mut archive = NondominatedArchive::new();
    let mut evaluations = 0u64;

    let mut seeds: Vec<Chromosome> = match initial {
        Some(list) => list.iter().take(pop_size).cloned().collect(),
        None => Vec::new(),
    };
    while seeds.len() < pop_size {
        seeds.push(random_chromosome(instance.n, &mut rng));
    }

    let mut population: Vec<(Evaluated, Vec<f64>)> = Vec::with_capacity(pop_size);
    let m = subset.len();
    let mut ideal = vec![f64::INFINITY; m];
    for genes in seeds {
        let ev = Evaluated::from_genes(genes, instance, cfg.delay_ref)?;
        evaluations += 1;
        archive.insert(ev.clone());
        let proj = subset.project(&ev.objectives);
        for (z, &f) in ideal.iter_mut().zip(&proj) {
            *z = z.min(f);
        }
        population.push((ev, proj));
    }

    'outer: loop {
        for i in 0..pop_size {
            if evaluations >= cfg.budget {
                break 'outer;
            }
            let a = nbhd[i][rng.random_range(0..nbhd[i].len())];
            let b = nbhd[i][rng.random_range(0..nbhd[i].len())];
            let child = if rng.random::<f64>() < cfg.crossover_rate {
                uniform_crossover(&population[a].0.genes, &population[b].0.genes, &mut rng)?
            } else {
                population[a].0.genes.clone()
            };
            let child = mutate(&child, mutation_rate, &mut rng);
            let ev = Evaluated::from_genes(child, instance, cfg.delay_ref)?;
            evaluations += 1;
            archive.insert(ev.clone());
            let proj = subset.project(&ev.objectives);
            for (z, &f) in ideal.iter_mut().zip(&proj) {
                *z = z.min(f);
            }
            for &j in &nbhd[i] {
                let incumbent = tchebycheff(&population[j].1, &weights[j], &ideal);
                let challenger = tchebycheff(&proj, &weights[j], &ideal);
                if challenger < incumbent {
                    population[j] = (ev.clone(), proj.clone());
                }
            }
        }
    }

    Ok(archive.into_entries())
}
