//! Variation operators on the assignment genotype.

use rand::Rng;

use crate::error::{Error, Result};
use crate::solution::Chromosome;

/// Uniform crossover: each gene comes from either parent with probability 1/2.
pub fn uniform_crossover<R: Rng>(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut R,
) -> Result<Chromosome> {
    if p1.len() != p2.len() {
        return Err(Error::invalid(format!(
            "parent lengths differ: {} vs {}",
            p1.len(),
            p2.len()
        )));
    }
    let genes = p1
        .genes
        .iter()
        .zip(&p2.genes)
        .map(|(&a, &b)| if rng.random::<bool>() { a } else { b })
        .collect();
    Ok(Chromosome::new(genes))
}

/// Per-gene reassignment: with probability `rate`, a gene is redrawn
/// uniformly from the vehicle ids `[0, n)`.
pub fn mutate<R: Rng>(c: &Chromosome, rate: f64, rng: &mut R) -> Chromosome {
    let n = c.len();
    let genes = c
        .genes
        .iter()
        .map(|&g| {
            if rng.random::<f64>() < rate {
                rng.random_range(0..n)
            } else {
                g
            }
        })
        .collect();
    Chromosome::new(genes)
}

/// A fresh chromosome with every gene drawn uniformly from `[0, n)`.
pub fn random_chromosome<R: Rng>(n: usize, rng: &mut R) -> Chromosome {
    Chromosome::new((0..n).map(|_| rng.random_range(0..n)).collect())
}
