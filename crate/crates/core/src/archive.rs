//! Running archive of mutually non-dominated evaluated points.

use crate::objective::ObjectiveVector;
use crate::solution::{Chromosome, Solution};

/// A fully evaluated individual: genotype, decoded plan and its
/// five-objective vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    pub genes: Chromosome,
    pub solution: Solution,
    pub objectives: ObjectiveVector,
}

pub trait HasObjectives {
    fn objectives(&self) -> &ObjectiveVector;
}

impl Evaluated {
    /// Decode and evaluate a chromosome against an instance.
    ///
    /// The stored genes are the canonical re-encoding of the decoded plan
    /// (vehicle id = route index), which decodes back to the same plan.
    /// Vehicle labels are arbitrary, and canonical labels keep uniform
    /// crossover from inflating the route count when parents happen to use
    /// disjoint label sets.
    pub fn from_genes(
        genes: Chromosome,
        instance: &crate::instance::Instance,
        delay_ref: crate::solution::DelayRef,
    ) -> crate::error::Result<Evaluated> {
        let solution = crate::solution::decode(&genes, instance);
        let objectives = crate::solution::evaluate(&solution, instance, delay_ref)?;
        let genes = solution.to_chromosome(instance.n);
        Ok(Evaluated {
            genes,
            solution,
            objectives,
        })
    }
}

impl HasObjectives for Evaluated {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

impl HasObjectives for ObjectiveVector {
    fn objectives(&self) -> &ObjectiveVector {
        self
    }
}

/// Maintains mutual non-dominance in full objective space. Duplicate
/// objective vectors collapse to the first inserted representative, so
/// insertion order decides representatives deterministically.
#[derive(Clone, Debug, Default)]
pub struct NondominatedArchive<T: HasObjectives> {
    entries: Vec<T>,
}

impl<T: HasObjectives> NondominatedArchive<T> {
    pub fn new() -> Self {
        NondominatedArchive { entries: Vec::new() }
    }

    /// Insert a candidate; returns false when it was dominated by (or
    /// duplicates) an existing entry.
    pub fn insert(&mut self, candidate: T) -> bool {
        let c = candidate.objectives();
        for e in &self.entries {
            let eo = e.objectives();
            if eo.dominates(c) || eo.0 == c.0 {
                return false;
            }
        }
        self.entries
            .retain(|e| !candidate.objectives().dominates(e.objectives()));
        self.entries.push(candidate);
        true
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = T>) {
        for item in items {
            self.insert(item);
        }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: [f64; 5]) -> ObjectiveVector {
        ObjectiveVector(v)
    }

    #[test]
    fn insert_keeps_only_nondominated() {
        let mut archive = NondominatedArchive::new();
        assert!(archive.insert(ov([2.0, 2.0, 0.0, 0.0, 0.0])));
        assert!(archive.insert(ov([1.0, 3.0, 0.0, 0.0, 0.0])));
        // dominated by the first entry
        assert!(!archive.insert(ov([3.0, 3.0, 0.0, 0.0, 0.0])));
        // dominates the first entry, which must drop out
        assert!(archive.insert(ov([2.0, 1.0, 0.0, 0.0, 0.0])));
        assert_eq!(archive.len(), 2);
        let objs: Vec<[f64; 5]> = archive.entries().iter().map(|e| e.0).collect();
        assert!(objs.contains(&[1.0, 3.0, 0.0, 0.0, 0.0]));
        assert!(objs.contains(&[2.0, 1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn duplicates_collapse_to_first() {
        let mut archive = NondominatedArchive::new();
        assert!(archive.insert(ov([1.0, 1.0, 1.0, 1.0, 1.0])));
        assert!(!archive.insert(ov([1.0, 1.0, 1.0, 1.0, 1.0])));
        assert_eq!(archive.len(), 1);
    }

    #[test]
    fn archive_agrees_with_pareto_filter() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<ObjectiveVector> = (0..300)
            .map(|_| ov(std::array::from_fn(|_| rng.random_range(0.0..6.0f64).floor())))
            .collect();
        let mut archive = NondominatedArchive::new();
        archive.extend(pts.iter().copied());
        let mut from_archive: Vec<[f64; 5]> = archive.entries().iter().map(|e| e.0).collect();
        let mut from_filter: Vec<[f64; 5]> =
            crate::objective::pareto_filter(&pts).iter().map(|e| e.0).collect();
        from_archive.sort_by(|a, b| a.partial_cmp(b).unwrap());
        from_filter.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(from_archive, from_filter);
    }
}
