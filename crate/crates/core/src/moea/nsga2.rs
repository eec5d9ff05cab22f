//! NSGA-II over an arbitrary projection of the five objectives.
//!
//! Every individual is evaluated on all five objectives; ranking and
//! crowding operate on the projected subset, while a running archive keeps
//! the non-dominated set of everything evaluated in full objective space so
//! runs on different subsets stay comparable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::archive::{Evaluated, NondominatedArchive};
use crate::error::Result;
use crate::instance::Instance;
use crate::moea::operators::{mutate, random_chromosome, uniform_crossover};
use crate::moea::sorting::{crowding_distance, fast_nondominated_sort};
use crate::moea::{EvolutionConfig, ObjectiveSubset};
use crate::solution::Chromosome;

/// Outcome of one NSGA-II run.
#[derive(Clone, Debug)]
pub struct Nsga2Run {
    /// Final population, full objective vectors attached.
    pub population: Vec<Evaluated>,
    /// Indices into `population` forming its first front in subset space.
    pub front: Vec<usize>,
    /// Non-dominated set of every evaluated point, in full objective space.
    pub archive: Vec<Evaluated>,
    pub evaluations: u64,
}

struct Ranked {
    ev: Evaluated,
    proj: Vec<f64>,
    rank: usize,
    crowd: f64,
}

fn rank_population(pop: &mut [Ranked]) {
    let points: Vec<Vec<f64>> = pop.iter().map(|r| r.proj.clone()).collect();
    let fronts = fast_nondominated_sort(&points);
    for (rank, front) in fronts.iter().enumerate() {
        let front_points: Vec<Vec<f64>> = front.iter().map(|&i| points[i].clone()).collect();
        let crowd = crowding_distance(&front_points);
        for (k, &i) in front.iter().enumerate() {
            pop[i].rank = rank;
            pop[i].crowd = crowd[k];
        }
    }
}

fn tournament<'a, R: Rng>(pop: &'a [Ranked], size: usize, rng: &mut R) -> &'a Ranked {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let challenger = &pop[rng.random_range(0..pop.len())];
        if challenger.rank < best.rank
            || (challenger.rank == best.rank && challenger.crowd > best.crowd)
        {
            best = challenger;
        }
    }
    best
}

/// Run NSGA-II until the evaluation budget is consumed.
///
/// When `initial` is given it seeds the first population (padded with random
/// chromosomes or truncated to the population size). Deterministic per seed.
pub fn nsga2(
    instance: &Instance,
    subset: &ObjectiveSubset,
    cfg: &EvolutionConfig,
    initial: Option<&[Chromosome]>,
) -> Result<Nsga2Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mutation_rate = cfg.mutation_rate_for(instance);
    let mut archive = NondominatedArchive::new();
    let mut evaluations = 0u64;

    let mut seeds: Vec<Chromosome> = match initial {
        Some(list) => list.iter().take(cfg.population).cloned().collect(),
        None => Vec::new(),
    };
    while seeds.len() < cfg.population {
        seeds.push(random_chromosome(instance.n, &mut rng));
    }

    let mut population: Vec<Ranked> = Vec::with_capacity(cfg.population);
    for genes in seeds {
        let ev = Evaluated::from_genes(genes, instance, cfg.delay_ref)?;
        evaluations += 1;
        archive.insert(ev.clone());
        let proj = subset.project(&ev.objectives);
        population.push(Ranked {
            ev,
            proj,
            rank: 0,
            crowd: 0.0,
        });
    }
    rank_population(&mut population);

    while evaluations < cfg.budget {
        let batch = (cfg.budget - evaluations).min(cfg.population as u64) as usize;
        let mut offspring = Vec::with_capacity(batch);
        for _ in 0..batch {
            let p1 = tournament(&population, cfg.tournament_size, &mut rng);
            let p2 = tournament(&population, cfg.tournament_size, &mut rng);
            let child = if rng.random::<f64>() < cfg.crossover_rate {
                uniform_crossover(&p1.ev.genes, &p2.ev.genes, &mut rng)?
            } else {
                p1.ev.genes.clone()
            };
            let child = mutate(&child, mutation_rate, &mut rng);
            let ev = Evaluated::from_genes(child, instance, cfg.delay_ref)?;
            evaluations += 1;
            archive.insert(ev.clone());
            let proj = subset.project(&ev.objectives);
            offspring.push(Ranked {
                ev,
                proj,
                rank: 0,
                crowd: 0.0,
            });
        }

        // elitist environmental selection over parents + offspring
        let mut combined: Vec<Ranked> = population.drain(..).chain(offspring).collect();
        rank_population(&mut combined);
        let mut order: Vec<usize> = (0..combined.len()).collect();
        order.sort_by(|&a, &b| {
            combined[a]
                .rank
                .cmp(&combined[b].rank)
                .then(combined[b].crowd.total_cmp(&combined[a].crowd))
                .then(a.cmp(&b))
        });
        order.truncate(cfg.population);
        order.sort_unstable();
        let mut keep = order.into_iter().peekable();
        population = combined
            .into_iter()
            .enumerate()
            .filter_map(|(i, r)| {
                if keep.peek() == Some(&i) {
                    keep.next();
                    Some(r)
                } else {
                    None
                }
            })
            .collect();
        rank_population(&mut population);
    }

    let front: Vec<usize> = population
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rank == 0)
        .map(|(i, _)| i)
        .collect();
    Ok(Nsga2Run {
        population: population.into_iter().map(|r| r.ev).collect(),
        front,
        archive: archive.into_entries(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GeneratorSpec, TwProfile};
    use crate::objective::pareto_filter_indices;

    fn small_instance() -> Instance {
        generate_instance(&GeneratorSpec::new(50, TwProfile::Tw4, 60.0, 42)).unwrap()
    }

    #[test]
    fn budget_equal_to_population_returns_initial_front() {
        let inst = small_instance();
        let cfg = EvolutionConfig {
            population: 30,
            budget: 30,
            seed: 5,
            ..Default::default()
        };
        let run = nsga2(&inst, &ObjectiveSubset::full(), &cfg, None).unwrap();
        assert_eq!(run.evaluations, 30);
        assert_eq!(run.population.len(), 30);
        assert!(!run.front.is_empty());
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let inst = small_instance();
        let cfg = EvolutionConfig {
            population: 20,
            budget: 400,
            seed: 9,
            ..Default::default()
        };
        let subset = ObjectiveSubset::new(vec![1, 2]).unwrap();
        let a = nsga2(&inst, &subset, &cfg, None).unwrap();
        let b = nsga2(&inst, &subset, &cfg, None).unwrap();
        let objs = |run: &Nsga2Run| -> Vec<[f64; 5]> {
            run.archive.iter().map(|e| e.objectives.0).collect()
        };
        assert_eq!(objs(&a), objs(&b));
        assert_eq!(a.front, b.front);
    }

    #[test]
    fn archive_is_mutually_nondominated_and_budget_respected() {
        let inst = small_instance();
        let cfg = EvolutionConfig {
            population: 24,
            budget: 500,
            seed: 3,
            ..Default::default()
        };
        let subset = ObjectiveSubset::new(vec![2, 4]).unwrap();
        let run = nsga2(&inst, &subset, &cfg, None).unwrap();
        assert!(run.evaluations <= 500);
        let objs: Vec<_> = run.archive.iter().map(|e| e.objectives).collect();
        assert_eq!(pareto_filter_indices(&objs).len(), objs.len());
    }

    /// Exhaustive oracle over every vehicle assignment and every intra-route
    /// order at n = 5: the distance-only optimum.
    fn enumeration_optimum_z2(inst: &Instance) -> f64 {
        fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
            if items.len() <= 1 {
                return vec![items.to_vec()];
            }
            let mut out = Vec::new();
            for (i, &head) in items.iter().enumerate() {
                let mut rest = items.to_vec();
                rest.remove(i);
                for tail in permutations(&rest) {
                    let mut p = vec![head];
                    p.extend(tail);
                    out.push(p);
                }
            }
            out
        }
        let n = inst.n;
        let mut partitions = std::collections::BTreeSet::new();
        for code in 0..(n as u32).pow(n as u32) {
            let mut c = code;
            let mut blocks: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
            for cust in 1..=n {
                blocks.entry(c % n as u32).or_default().push(cust);
                c /= n as u32;
            }
            partitions.insert(blocks.into_values().collect::<Vec<_>>());
        }
        let mut best = f64::INFINITY;
        for part in partitions {
            let feasible = part.iter().all(|b| {
                b.iter().map(|&c| inst.customer(c).demand).sum::<f64>() <= inst.capacity
            });
            if !feasible {
                continue;
            }
            let per_route: Vec<Vec<Vec<usize>>> = part.iter().map(|b| permutations(b)).collect();
            let mut idx = vec![0usize; per_route.len()];
            loop {
                let routes: Vec<Vec<usize>> = per_route
                    .iter()
                    .zip(&idx)
                    .map(|(opts, &i)| opts[i].clone())
                    .collect();
                let sol = crate::solution::Solution { routes };
                let z = crate::solution::evaluate(&sol, inst, crate::solution::DelayRef::WindowStart)
                    .unwrap();
                best = best.min(z.0[1]);
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < per_route[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        best
    }

    #[test]
    fn singleton_distance_subset_reaches_enumeration_optimum() {
        let inst = generate_instance(
            &GeneratorSpec::new(5, TwProfile::Tw4, 60.0, 7).custom(),
        )
        .unwrap();
        let optimum = enumeration_optimum_z2(&inst);
        let cfg = EvolutionConfig {
            population: 30,
            budget: 3_000,
            seed: 11,
            ..Default::default()
        };
        let subset = ObjectiveSubset::new(vec![2]).unwrap();
        let run = nsga2(&inst, &subset, &cfg, None).unwrap();
        let best = run
            .archive
            .iter()
            .map(|e| e.objectives.0[1])
            .fold(f64::INFINITY, f64::min);
        assert!(
            (best - optimum).abs() < 1e-9,
            "best Z2 {best} vs enumeration optimum {optimum}"
        );
    }

    #[test]
    fn seeded_initial_population_is_used() {
        let inst = small_instance();
        let cfg = EvolutionConfig {
            population: 10,
            budget: 10,
            seed: 1,
            ..Default::default()
        };
        // seed with one very specific chromosome; with budget == population the
        // final population is exactly the initial one
        let special = Chromosome::new(vec![0; inst.n]);
        let expected = crate::solution::decode(&special, &inst);
        let run = nsga2(
            &inst,
            &ObjectiveSubset::full(),
            &cfg,
            Some(std::slice::from_ref(&special)),
        )
        .unwrap();
        assert!(run.population.iter().any(|e| e.solution == expected));
    }
}
