//! Objective vectors, Pareto dominance and non-dominated filtering.

use serde::{Deserialize, Serialize};

/// Number of objectives in the problem.
pub const NUM_OBJECTIVES: usize = 5;

/// The five minimization objectives of a routing plan:
/// vehicle count, total travel distance, longest route duration,
/// total waiting time and total delay time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(pub [f64; NUM_OBJECTIVES]);

impl ObjectiveVector {
    pub fn vehicles(&self) -> f64 {
        self.0[0]
    }

    pub fn distance(&self) -> f64 {
        self.0[1]
    }

    pub fn makespan(&self) -> f64 {
        self.0[2]
    }

    pub fn waiting(&self) -> f64 {
        self.0[3]
    }

    pub fn delay(&self) -> f64 {
        self.0[4]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Componentwise `<=` with at least one strict `<`.
    pub fn dominates(&self, other: &ObjectiveVector) -> bool {
        dominates_slice(&self.0, &other.0)
    }
}

impl std::fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {:.2}, {:.2}, {:.2}, {:.2})",
            self.0[0] as u64, self.0[1], self.0[2], self.0[3], self.0[4]
        )
    }
}

/// Pareto dominance over raw slices (used for subset-projected vectors too).
pub fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Indices of the non-dominated points. Exact duplicates collapse to the
/// first occurrence.
pub fn pareto_filter_indices(points: &[ObjectiveVector]) -> Vec<usize> {
    let mut keep = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            if q.dominates(p) {
                continue 'outer;
            }
            if j < i && q.0 == p.0 {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    keep
}

/// The non-dominated subset of `points`, duplicates collapsed.
pub fn pareto_filter(points: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    pareto_filter_indices(points)
        .into_iter()
        .map(|i| points[i])
        .collect()
}
