//! Run-quality metrics (target achievement, gap to target, overall
//! comparison, weight-vector effectiveness) and the landscape analysis
//! helpers: Kendall tau-b correlations, objective ranges and scatter export.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goalprog::{build_inequality_system, target_floor, TargetVector, WeightVector};
use crate::objective::{ObjectiveVector, NUM_OBJECTIVES};

/// Fraction of runs reaching the target in each objective.
pub fn target_achievement(
    runs: &[ObjectiveVector],
    target: &TargetVector,
) -> Result<[f64; NUM_OBJECTIVES]> {
    if runs.is_empty() {
        return Err(Error::invalid("target achievement needs at least one run"));
    }
    let mut out = [0.0; NUM_OBJECTIVES];
    for (i, slot) in out.iter_mut().enumerate() {
        let hits = runs.iter().filter(|r| r.0[i] <= target.0[i]).count();
        *slot = hits as f64 / runs.len() as f64;
    }
    Ok(out)
}

/// Mean relative overshoot of the runs that missed each objective's target;
/// zero where nothing missed. Denominators use the zero-floored target.
pub fn gap_to_target(runs: &[ObjectiveVector], target: &TargetVector) -> [f64; NUM_OBJECTIVES] {
    let mut out = [0.0; NUM_OBJECTIVES];
    for (i, slot) in out.iter_mut().enumerate() {
        let misses: Vec<f64> = runs
            .iter()
            .filter(|r| r.0[i] > target.0[i])
            .map(|r| (r.0[i] - target.0[i]) / target_floor(target.0[i]))
            .collect();
        if !misses.is_empty() {
            *slot = misses.iter().sum::<f64>() / misses.len() as f64;
        }
    }
    out
}

/// Mean signed relative difference to the target over all runs; positive
/// means the runs beat the target on average.
pub fn overall_comparison(
    runs: &[ObjectiveVector],
    target: &TargetVector,
) -> [f64; NUM_OBJECTIVES] {
    let mut out = [0.0; NUM_OBJECTIVES];
    if runs.is_empty() {
        return out;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let sum: f64 = runs
            .iter()
            .map(|r| (target.0[i] - r.0[i]) / target_floor(target.0[i]))
            .sum();
        *slot = sum / runs.len() as f64;
    }
    out
}

/// Fraction of approximation-set entries whose weighted sum is not below the
/// target's.
pub fn effectiveness(
    w: &WeightVector,
    approx: &[ObjectiveVector],
    target: &TargetVector,
) -> Result<f64> {
    if approx.is_empty() {
        return Err(Error::invalid("effectiveness needs a non-empty approximation set"));
    }
    let system = build_inequality_system(approx, target);
    Ok(system.satisfied_count(&w.0) as f64 / system.len() as f64)
}

/// Kendall tau-b rank correlation with tie correction:
/// `(P - Q) / sqrt((n0 - n1)(n0 - n2))` where `n1`, `n2` count tied pairs in
/// each argument. Errors on mismatched lengths, fewer than two observations,
/// non-finite values, or an all-tied argument (undefined correlation).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("kendall tau needs at least two observations"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("kendall tau needs finite values"));
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // tied pairs in x and joint ties, over the x-sorted order
    let mut n1 = 0u64;
    let mut n3 = 0u64;
    let mut gx = 1usize;
    let mut gxy = 1usize;
    for k in 1..n {
        if pairs[k].0 == pairs[k - 1].0 {
            gx += 1;
            if pairs[k].1 == pairs[k - 1].1 {
                gxy += 1;
            } else {
                n3 += (gxy * (gxy - 1) / 2) as u64;
                gxy = 1;
            }
        } else {
            n1 += (gx * (gx - 1) / 2) as u64;
            gx = 1;
            n3 += (gxy * (gxy - 1) / 2) as u64;
            gxy = 1;
        }
    }
    n1 += (gx * (gx - 1) / 2) as u64;
    n3 += (gxy * (gxy - 1) / 2) as u64;

    // discordant-ish count: strict inversions of the y sequence
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = count_inversions(&mut ys);

    // tied pairs in y
    let mut sorted_y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    sorted_y.sort_by(f64::total_cmp);
    let mut n2 = 0u64;
    let mut gy = 1usize;
    for k in 1..n {
        if sorted_y[k] == sorted_y[k - 1] {
            gy += 1;
        } else {
            n2 += (gy * (gy - 1) / 2) as u64;
            gy = 1;
        }
    }
    n2 += (gy * (gy - 1) / 2) as u64;

    let n0 = (n * (n - 1) / 2) as u64;
    if n0 == n1 || n0 == n2 {
        return Err(Error::Degenerate(
            "kendall tau is undefined when one argument is completely tied".into(),
        ));
    }
    let p_minus_q = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok((p_minus_q / denom).clamp(-1.0, 1.0))
}

/// Strict inversion count by merge sort.
fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mut buf = values.to_vec();
    let mut inversions = 0u64;
    let mut width = 1usize;
    while width < n {
        let mut lo = 0;
        while lo + width < n {
            let mid = lo + width;
            let hi = (mid + width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid || j < hi {
                if i < mid && (j >= hi || values[i] <= values[j]) {
                    buf[k] = values[i];
                    i += 1;
                } else {
                    inversions += (mid - i) as u64;
                    buf[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            values[lo..hi].copy_from_slice(&buf[lo..hi]);
            lo = hi;
        }
        width *= 2;
    }
    inversions
}

/// Per-objective minima and maxima of an approximation set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRanges {
    pub min: [f64; NUM_OBJECTIVES],
    pub max: [f64; NUM_OBJECTIVES],
}

impl ObjectiveRanges {
    /// Min-max normalize a vector against these ranges; a degenerate range
    /// normalizes to zero.
    pub fn normalize(&self, z: &ObjectiveVector) -> [f64; NUM_OBJECTIVES] {
        std::array::from_fn(|i| {
            let span = self.max[i] - self.min[i];
            if span > 0.0 {
                (z.0[i] - self.min[i]) / span
            } else {
                0.0
            }
        })
    }
}

/// Estimate per-objective ranges and normalized vectors for a front.
pub fn objective_ranges(
    approx: &[ObjectiveVector],
) -> Result<(ObjectiveRanges, Vec<[f64; NUM_OBJECTIVES]>)> {
    if approx.is_empty() {
        return Err(Error::invalid("objective ranges need a non-empty set"));
    }
    let mut min = [f64::INFINITY; NUM_OBJECTIVES];
    let mut max = [f64::NEG_INFINITY; NUM_OBJECTIVES];
    for z in approx {
        for i in 0..NUM_OBJECTIVES {
            min[i] = min[i].min(z.0[i]);
            max[i] = max[i].max(z.0[i]);
        }
    }
    let ranges = ObjectiveRanges { min, max };
    let normalized = approx.iter().map(|z| ranges.normalize(z)).collect();
    Ok((ranges, normalized))
}

/// Pairwise Kendall tau-b matrix over the five objectives: symmetric with a
/// unit diagonal; entries where one objective is completely tied come back
/// as NaN.
pub fn pairwise_correlation_matrix(
    approx: &[ObjectiveVector],
) -> Result<[[f64; NUM_OBJECTIVES]; NUM_OBJECTIVES]> {
    if approx.is_empty() {
        return Err(Error::invalid("correlation matrix needs a non-empty set"));
    }
    let columns: Vec<Vec<f64>> = (0..NUM_OBJECTIVES)
        .map(|i| approx.iter().map(|z| z.0[i]).collect())
        .collect();
    let mut matrix = [[1.0; NUM_OBJECTIVES]; NUM_OBJECTIVES];
    for a in 0..NUM_OBJECTIVES {
        for b in (a + 1)..NUM_OBJECTIVES {
            let tau = match kendall_tau(&columns[a], &columns[b]) {
                Ok(t) => t,
                Err(Error::Degenerate(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            matrix[a][b] = tau;
            matrix[b][a] = tau;
        }
    }
    Ok(matrix)
}

/// Layout of the scatter export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterMode {
    /// One file with the five normalized objective columns.
    Wide,
    /// One two-column file per objective pair (ten files).
    Pairs,
}

impl std::str::FromStr for ScatterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wide" => Ok(ScatterMode::Wide),
            "pairs" => Ok(ScatterMode::Pairs),
            other => Err(Error::invalid(format!(
                "unknown scatter mode '{}': expected wide or pairs",
                other
            ))),
        }
    }
}

/// Export min-max normalized objective values for scatter plotting; returns
/// the written paths.
pub fn export_scatter(
    approx: &[ObjectiveVector],
    dir: impl AsRef<Path>,
    mode: ScatterMode,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (_, normalized) = objective_ranges(approx)?;
    let mut written = Vec::new();
    match mode {
        ScatterMode::Wide => {
            let path = dir.join("scatter.csv");
            let mut writer =
                csv::Writer::from_path(&path).map_err(|e| Error::parse(&path, e.to_string()))?;
            writer
                .write_record(["Z1", "Z2", "Z3", "Z4", "Z5"])
                .map_err(|e| Error::parse(&path, e.to_string()))?;
            for row in &normalized {
                writer
                    .write_record(row.iter().map(|v| format!("{v}")))
                    .map_err(|e| Error::parse(&path, e.to_string()))?;
            }
            writer.flush().map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        ScatterMode::Pairs => {
            for a in 0..NUM_OBJECTIVES {
                for b in (a + 1)..NUM_OBJECTIVES {
                    let path = dir.join(format!("scatter_z{}_z{}.csv", a + 1, b + 1));
                    let mut writer = csv::Writer::from_path(&path)
                        .map_err(|e| Error::parse(&path, e.to_string()))?;
                    writer
                        .write_record([format!("Z{}", a + 1), format!("Z{}", b + 1)])
                        .map_err(|e| Error::parse(&path, e.to_string()))?;
                    for row in &normalized {
                        writer
                            .write_record([format!("{}", row[a]), format!("{}", row[b])])
                            .map_err(|e| Error::parse(&path, e.to_string()))?;
                    }
                    writer.flush().map_err(|e| Error::io(&path, e))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

/// The three chart quantities for one run group, as persisted in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub achievement: [f64; NUM_OBJECTIVES],
    pub gap: [f64; NUM_OBJECTIVES],
    pub overall: [f64; NUM_OBJECTIVES],
    pub n_runs: usize,
}

pub fn method_report(runs: &[ObjectiveVector], target: &TargetVector) -> Result<MethodReport> {
    Ok(MethodReport {
        achievement: target_achievement(runs, target)?,
        gap: gap_to_target(runs, target),
        overall: overall_comparison(runs, target),
        n_runs: runs.len(),
    })
}
