//! Goal-based scalarizers and the derived weight-vector solver.
//!
//! Three ways to chase a target objective vector with a single-objective
//! search: the Chebyshev ratio objective (minimize the worst target ratio),
//! a weighted sum whose weights are derived from the approximation set, and
//! a Euclidean distance objective that switches to improving once the target
//! is met.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{ObjectiveVector, NUM_OBJECTIVES};

/// A decision-maker's target objective vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetVector(pub [f64; NUM_OBJECTIVES]);

impl TargetVector {
    pub fn new(values: [f64; NUM_OBJECTIVES]) -> Result<Self> {
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("target components must be finite and >= 0"));
        }
        Ok(TargetVector(values))
    }

    pub fn from_objectives(z: &ObjectiveVector) -> Self {
        TargetVector(z.0)
    }
}

/// A strictly positive weight vector, each component in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub [f64; NUM_OBJECTIVES]);

impl WeightVector {
    pub fn new(values: [f64; NUM_OBJECTIVES]) -> Result<Self> {
        if values.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::invalid("weights must lie in (0, 1]"));
        }
        Ok(WeightVector(values))
    }
}

/// Denominator used by every target-relative quantity: the target itself,
/// floored to one objective unit when the target is zero so zero targets act
/// as absolute bounds without reweighting the others.
pub fn target_floor(t: f64) -> f64 {
    if t > 0.0 {
        t
    } else {
        1.0
    }
}

/// Chebyshev ratio objective: `max_i Z_i / d_i` with the zero-floored target
/// as denominator. At most 1 exactly when every (positive) target is met.
pub fn chebyshev_lambda(z: &ObjectiveVector, target: &TargetVector) -> f64 {
    z.0.iter()
        .zip(&target.0)
        .map(|(&zi, &ti)| zi / target_floor(ti))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The weighted-sum ordering constraints `w·Z^t <= w·Z^j`, one per
/// approximation-set entry.
#[derive(Clone, Debug)]
pub struct InequalitySystem {
    pub target: TargetVector,
    pub rows: Vec<ObjectiveVector>,
}

impl InequalitySystem {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row_satisfied(&self, w: &[f64; NUM_OBJECTIVES], row: &ObjectiveVector) -> bool {
        dot(w, &self.target.0) <= dot(w, &row.0)
    }

    pub fn satisfied_bitmap(&self, w: &[f64; NUM_OBJECTIVES]) -> Vec<bool> {
        self.rows.iter().map(|r| self.row_satisfied(w, r)).collect()
    }

    pub fn satisfied_count(&self, w: &[f64; NUM_OBJECTIVES]) -> usize {
        self.rows.iter().filter(|r| self.row_satisfied(w, r)).count()
    }

    /// Total signed slack `sum_j w·Z^j - w·Z^t`; the deterministic tie-break
    /// between weight candidates with equal satisfied counts.
    pub fn total_slack(&self, w: &[f64; NUM_OBJECTIVES]) -> f64 {
        let wt = dot(w, &self.target.0);
        self.rows.iter().map(|r| dot(w, &r.0) - wt).sum()
    }

    /// Satisfied count and total slack in a single pass.
    pub fn count_and_slack(&self, w: &[f64; NUM_OBJECTIVES]) -> (usize, f64) {
        let wt = dot(w, &self.target.0);
        let mut count = 0;
        let mut slack = 0.0;
        for r in &self.rows {
            let s = dot(w, &r.0) - wt;
            if s >= 0.0 {
                count += 1;
            }
            slack += s;
        }
        (count, slack)
    }
}

fn dot(w: &[f64; NUM_OBJECTIVES], z: &[f64; NUM_OBJECTIVES]) -> f64 {
    w.iter().zip(z).map(|(a, b)| a * b).sum()
}

/// One inequality per approximation-set entry.
pub fn build_inequality_system(
    approx: &[ObjectiveVector],
    target: &TargetVector,
) -> InequalitySystem {
    InequalitySystem {
        target: *target,
        rows: approx.to_vec(),
    }
}

/// Knobs of the heuristic weight solver: a coarse scan of the positive
/// simplex lattice seeds multi-start hill climbing with multiplicative
/// coordinate steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSolverConfig {
    pub restarts: usize,
    /// Lattice denominator of the coarse scan (points with all-positive parts).
    pub grid_resolution: usize,
    /// Multiplicative step sizes, coarse to fine.
    pub step_schedule: Vec<f64>,
    pub seed: u64,
}

impl Default for WeightSolverConfig {
    fn default() -> Self {
        WeightSolverConfig {
            restarts: 16,
            grid_resolution: 12,
            step_schedule: vec![0.5, 0.2, 0.08, 0.03, 0.01, 0.004, 0.001],
            seed: 0,
        }
    }
}

impl WeightSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("weight solver needs at least one restart"));
        }
        if self.grid_resolution < NUM_OBJECTIVES {
            return Err(Error::invalid(
                "grid resolution must allow all-positive lattice points",
            ));
        }
        if self.step_schedule.is_empty() || self.step_schedule.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("step schedule must be non-empty and positive"));
        }
        Ok(())
    }
}

/// Result of the weight derivation: the weights, the fraction of satisfied
/// inequalities and the per-row bitmap backing it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightDerivation {
    pub weights: WeightVector,
    pub effectiveness: f64,
    pub satisfied_count: usize,
    pub satisfied: Vec<bool>,
}

#[derive(Clone, Copy)]
struct Candidate {
    w: [f64; NUM_OBJECTIVES],
    count: usize,
    slack: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        if self.count != other.count {
            return self.count > other.count;
        }
        if self.slack != other.slack {
            return self.slack > other.slack;
        }
        // lexicographically smallest weight wins for determinism
        self.w
            .iter()
            .zip(&other.w)
            .find_map(|(a, b)| {
                if a < b {
                    Some(true)
                } else if a > b {
                    Some(false)
                } else {
                    None
                }
            })
            .unwrap_or(false)
    }
}

fn normalized(mut w: [f64; NUM_OBJECTIVES]) -> [f64; NUM_OBJECTIVES] {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in &mut w {
        *v = (*v / max).clamp(f64::MIN_POSITIVE, 1.0);
    }
    w
}

fn score(system: &InequalitySystem, w: [f64; NUM_OBJECTIVES]) -> Candidate {
    let w = normalized(w);
    let (count, slack) = system.count_and_slack(&w);
    Candidate { w, count, slack }
}

/// Positive lattice points of the simplex with denominator `g`
/// (compositions of `g` into five parts `>= 1`), evaluated as weight seeds.
fn positive_lattice(g: usize) -> Vec<[f64; NUM_OBJECTIVES]> {
    let mut out = Vec::new();
    let g = g as i64;
    for a in 1..=(g - 4) {
        for b in 1..=(g - a - 3) {
            for c in 1..=(g - a - b - 2) {
                for d in 1..=(g - a - b - c - 1) {
                    let e = g - a - b - c - d;
                    out.push([
                        a as f64 / g as f64,
                        b as f64 / g as f64,
                        c as f64 / g as f64,
                        d as f64 / g as f64,
                        e as f64 / g as f64,
                    ]);
                }
            }
        }
    }
    out
}

fn hill_climb(system: &InequalitySystem, start: [f64; NUM_OBJECTIVES], steps: &[f64]) -> Candidate {
    let mut best = score(system, start);
    for &step in steps {
        loop {
            let mut improved = false;
            let mut sweep_best = best;
            for i in 0..NUM_OBJECTIVES {
                for factor in [1.0 + step, 1.0 / (1.0 + step)] {
                    let mut w = best.w;
                    w[i] = (w[i] * factor).clamp(f64::MIN_POSITIVE, 1.0);
                    let cand = score(system, w);
                    if cand.better_than(&sweep_best) {
                        sweep_best = cand;
                        improved = true;
                    }
                }
            }
            if improved {
                best = sweep_best;
            } else {
                break;
            }
        }
    }
    best
}

/// Find a weight vector satisfying as many ordering inequalities as
/// possible: a coarse simplex-lattice scan ranks seeds, multi-start hill
/// climbing refines them (restarts run in parallel), and candidates reduce
/// deterministically by (count, slack, lexicographic weights).
pub fn derive_weight_vector(
    approx: &[ObjectiveVector],
    target: &TargetVector,
    cfg: &WeightSolverConfig,
) -> Result<WeightDerivation> {
    if approx.is_empty() {
        return Err(Error::invalid(
            "cannot derive weights from an empty approximation set",
        ));
    }
    cfg.validate()?;
    let system = build_inequality_system(approx, target);

    let mut grid: Vec<Candidate> = positive_lattice(cfg.grid_resolution)
        .into_par_iter()
        .map(|w| score(&system, w))
        .collect();
    grid.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(b.slack.total_cmp(&a.slack))
            .then_with(|| a.w.partial_cmp(&b.w).unwrap_or(std::cmp::Ordering::Equal))
    });

    let starts: Vec<[f64; NUM_OBJECTIVES]> = (0..cfg.restarts)
        .map(|r| {
            let base = grid[r % grid.len()].w;
            if r < grid.len() {
                base
            } else {
                // jitter repeated seeds multiplicatively, deterministic per restart
                let mut rng =
                    ChaCha8Rng::seed_from_u64(crate::seeds::derive_seed(cfg.seed, &[r as u64]));
                let mut w = base;
                for v in &mut w {
                    *v = (*v * rng.random_range(0.5..2.0)).clamp(f64::MIN_POSITIVE, 1.0);
                }
                w
            }
        })
        .collect();

    let best = starts
        .into_par_iter()
        .map(|start| hill_climb(&system, start, &cfg.step_schedule))
        .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
        .expect("at least one restart");

    let satisfied = system.satisfied_bitmap(&best.w);
    Ok(WeightDerivation {
        weights: WeightVector::new(best.w)?,
        effectiveness: best.count as f64 / system.len() as f64,
        satisfied_count: best.count,
        satisfied,
    })
}

/// Weighted-sum objective `sum_i w_i Z_i`.
pub fn weighted_objective(z: &ObjectiveVector, w: &WeightVector) -> f64 {
    dot(&w.0, &z.0)
}

/// Parameters of the Euclidean-distance objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdConfig {
    /// Switch threshold on the worse-than-target distance.
    pub epsilon: f64,
    /// Normalize per-objective gaps by the zero-floored target.
    pub normalize: bool,
}

impl Default for EdConfig {
    fn default() -> Self {
        EdConfig {
            epsilon: 1e-6,
            normalize: false,
        }
    }
}

/// Euclidean goal objective: while the distance `z` over worse-than-target
/// objectives exceeds epsilon, minimize it; once the target is (nearly) met,
/// reward further improvement by returning the negated improvement distance.
pub fn euclidean_objective(z: &ObjectiveVector, target: &TargetVector, cfg: &EdConfig) -> f64 {
    debug_assert!(cfg.epsilon >= 0.0);
    let mut worse_sq = 0.0;
    let mut better_sq = 0.0;
    for (&zi, &ti) in z.0.iter().zip(&target.0) {
        let scale = if cfg.normalize { target_floor(ti) } else { 1.0 };
        let gap = (zi - ti) / scale;
        if gap > 0.0 {
            worse_sq += gap * gap;
        } else {
            better_sq += gap * gap;
        }
    }
    let worse = worse_sq.sqrt();
    if worse > cfg.epsilon {
        worse
    } else {
        -better_sq.sqrt()
    }
}
