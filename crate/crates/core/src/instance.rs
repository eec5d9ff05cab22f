//! Problem instances: customers with soft time windows, travel costs,
//! vehicle capacity, plus a parameterized benchmark-style generator and
//! JSON persistence.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planning horizon in minutes (an eight-hour day).
pub const DEFAULT_HORIZON: f64 = 480.0;

/// A customer with demand, a soft service window `[a, b]` and a service time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    pub demand: f64,
    #[serde(rename = "a")]
    pub window_start: f64,
    #[serde(rename = "b")]
    pub window_end: f64,
    #[serde(rename = "service")]
    pub service_time: f64,
}

/// A routing problem: `n` customers, a `(n+1) x (n+1)` travel-cost matrix
/// with the depot at vertex 0, and a uniform fleet capacity. One cost unit
/// equals one minute of travel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub horizon: f64,
    pub capacity: f64,
    pub customers: Vec<Customer>,
    pub cost: Vec<Vec<f64>>,
}

impl Instance {
    /// Travel cost/time from vertex `i` to vertex `j` (0 = depot).
    #[inline]
    pub fn leg(&self, i: usize, j: usize) -> f64 {
        self.cost[i][j]
    }

    #[inline]
    pub fn customer(&self, id: usize) -> &Customer {
        &self.customers[id - 1]
    }

    pub fn max_demand(&self) -> f64 {
        self.customers.iter().map(|c| c.demand).fold(0.0, f64::max)
    }

    pub fn total_demand(&self) -> f64 {
        self.customers.iter().map(|c| c.demand).sum()
    }

    /// Check every structural invariant; error messages name the offending
    /// field so file parse failures are actionable.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("instance must have at least one customer (n = 0)"));
        }
        if self.customers.len() != self.n {
            return Err(Error::invalid(format!(
                "customer list has {} entries, expected n = {}",
                self.customers.len(),
                self.n
            )));
        }
        for (k, c) in self.customers.iter().enumerate() {
            if c.id != k + 1 {
                return Err(Error::invalid(format!(
                    "customer ids must be 1..n with no gaps: position {} has id {}",
                    k, c.id
                )));
            }
            if !(c.demand > 0.0) {
                return Err(Error::invalid(format!(
                    "customer {}: demand must be > 0, got {}",
                    c.id, c.demand
                )));
            }
            if c.service_time < 0.0 {
                return Err(Error::invalid(format!(
                    "customer {}: service time must be >= 0, got {}",
                    c.id, c.service_time
                )));
            }
            if !(0.0 <= c.window_start && c.window_start <= c.window_end && c.window_end <= self.horizon)
            {
                return Err(Error::invalid(format!(
                    "customer {}: window [{}, {}] violates 0 <= a <= b <= horizon ({})",
                    c.id, c.window_start, c.window_end, self.horizon
                )));
            }
        }
        let dim = self.n + 1;
        if self.cost.len() != dim {
            return Err(Error::invalid(format!(
                "cost matrix has {} rows, expected {}",
                self.cost.len(),
                dim
            )));
        }
        for (i, row) in self.cost.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "cost matrix row {} has {} columns, expected {}",
                    i,
                    row.len(),
                    dim
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "cost[{}][{}] must be finite and non-negative, got {}",
                        i, j, v
                    )));
                }
            }
            if self.cost[i][i] != 0.0 {
                return Err(Error::invalid(format!(
                    "cost[{}][{}] must be 0 on the diagonal, got {}",
                    i, i, self.cost[i][i]
                )));
            }
        }
        let dmax = self.max_demand();
        if self.capacity < dmax {
            return Err(Error::invalid(format!(
                "capacity {} is below the maximum single demand {}",
                self.capacity, dmax
            )));
        }
        Ok(())
    }
}

/// Time-window profile of the benchmark grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwProfile {
    Tw0,
    Tw1,
    Tw2,
    Tw3,
    Tw4,
}

impl TwProfile {
    pub const ALL: [TwProfile; 5] = [
        TwProfile::Tw0,
        TwProfile::Tw1,
        TwProfile::Tw2,
        TwProfile::Tw3,
        TwProfile::Tw4,
    ];

    /// The candidate windows a customer may be assigned under this profile.
    pub fn windows(self) -> &'static [(f64, f64)] {
        match self {
            TwProfile::Tw0 => &[(0.0, 480.0)],
            TwProfile::Tw1 => &[(0.0, 160.0), (160.0, 320.0), (320.0, 480.0)],
            TwProfile::Tw2 => &[(0.0, 130.0), (175.0, 305.0), (350.0, 480.0)],
            TwProfile::Tw3 => &[(0.0, 100.0), (190.0, 290.0), (350.0, 480.0)],
            TwProfile::Tw4 => &[
                (0.0, 480.0),
                (0.0, 160.0),
                (160.0, 320.0),
                (320.0, 480.0),
                (0.0, 130.0),
                (175.0, 305.0),
                (350.0, 480.0),
                (0.0, 100.0),
                (190.0, 290.0),
                (350.0, 480.0),
            ],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TwProfile::Tw0 => "tw0",
            TwProfile::Tw1 => "tw1",
            TwProfile::Tw2 => "tw2",
            TwProfile::Tw3 => "tw3",
            TwProfile::Tw4 => "tw4",
        }
    }
}

impl std::str::FromStr for TwProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tw0" => Ok(TwProfile::Tw0),
            "tw1" => Ok(TwProfile::Tw1),
            "tw2" => Ok(TwProfile::Tw2),
            "tw3" => Ok(TwProfile::Tw3),
            "tw4" => Ok(TwProfile::Tw4),
            other => Err(Error::invalid(format!(
                "unknown time-window profile '{}': expected one of tw0, tw1, tw2, tw3, tw4",
                other
            ))),
        }
    }
}

impl std::fmt::Display for TwProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Customer counts of the benchmark grid.
pub const GRID_N: [usize; 3] = [50, 150, 250];
/// Capacity slack percentages of the benchmark grid.
pub const GRID_DELTA: [f64; 3] = [60.0, 20.0, 5.0];
/// Demand and service-time choice set shared by the whole grid.
pub const GRID_CHOICES: [f64; 3] = [10.0, 20.0, 30.0];

/// Parameters for [`generate_instance`]. The enumerated fields are locked to
/// the benchmark grid unless `custom` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub tw_profile: TwProfile,
    /// Capacity slack percentage in `Q = Dmax + delta/100 * (Dsum - Dmax)`.
    pub delta: f64,
    pub demand_choices: Vec<f64>,
    pub service_choices: Vec<f64>,
    pub seed: u64,
    /// Allow values outside the benchmark grid.
    #[serde(default)]
    pub custom: bool,
}

impl GeneratorSpec {
    pub fn new(n: usize, tw_profile: TwProfile, delta: f64, seed: u64) -> Self {
        GeneratorSpec {
            n,
            tw_profile,
            delta,
            demand_choices: GRID_CHOICES.to_vec(),
            service_choices: GRID_CHOICES.to_vec(),
            seed,
            custom: false,
        }
    }

    pub fn custom(mut self) -> Self {
        self.custom = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.custom {
            if self.n == 0 {
                return Err(Error::invalid("n must be >= 1"));
            }
            if !(self.delta > 0.0 && self.delta <= 100.0) {
                return Err(Error::invalid(format!(
                    "delta must be in (0, 100], got {}",
                    self.delta
                )));
            }
            for (name, choices) in [
                ("demand_choices", &self.demand_choices),
                ("service_choices", &self.service_choices),
            ] {
                if choices.is_empty() || choices.iter().any(|&v| v <= 0.0) {
                    return Err(Error::invalid(format!(
                        "{} must be non-empty and strictly positive",
                        name
                    )));
                }
            }
            return Ok(());
        }
        if !GRID_N.contains(&self.n) {
            return Err(Error::invalid(format!(
                "n = {} is outside the grid {{50, 150, 250}}; pass custom to override",
                self.n
            )));
        }
        if !GRID_DELTA.contains(&self.delta) {
            return Err(Error::invalid(format!(
                "delta = {} is outside the grid {{60, 20, 5}}; pass custom to override",
                self.delta
            )));
        }
        if self.demand_choices != GRID_CHOICES || self.service_choices != GRID_CHOICES {
            return Err(Error::invalid(
                "demand/service choices are fixed to {10, 20, 30} unless custom is set",
            ));
        }
        Ok(())
    }
}

/// Fleet capacity from the demand profile: `Q = Dmax + delta/100 * (Dsum - Dmax)`,
/// where `Dmax` is the largest single demand and `Dsum` the total demand.
pub fn compute_capacity(demands: &[f64], delta: f64) -> Result<f64> {
    if demands.is_empty() {
        return Err(Error::invalid("cannot compute capacity of an empty demand list"));
    }
    if demands.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::invalid("all demands must be > 0"));
    }
    let dmax = demands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dsum: f64 = demands.iter().sum();
    Ok(dmax + delta * (dsum - dmax) / 100.0)
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Generate an instance: customers placed uniformly on a `[0, 100]^2` grid
/// with the depot at the center, Euclidean travel costs rounded to two
/// decimals, and demands, service times and windows drawn from the profile.
/// Deterministic for a fixed seed.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.n + 1);
    points.push((50.0, 50.0)); // depot
    let mut customers = Vec::with_capacity(spec.n);
    let windows = spec.tw_profile.windows();
    for id in 1..=spec.n {
        let x: f64 = rng.random_range(0.0..100.0);
        let y: f64 = rng.random_range(0.0..100.0);
        points.push((x, y));
        let demand = spec.demand_choices[rng.random_range(0..spec.demand_choices.len())];
        let service_time = spec.service_choices[rng.random_range(0..spec.service_choices.len())];
        let (a, b) = windows[rng.random_range(0..windows.len())];
        customers.push(Customer {
            id,
            demand,
            window_start: a,
            window_end: b,
            service_time,
        });
    }
    let dim = spec.n + 1;
    let mut cost = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (xi, yi) = points[i];
            let (xj, yj) = points[j];
            let d = round2(((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt());
            cost[i][j] = d;
            cost[j][i] = d;
        }
    }
    let demands: Vec<f64> = customers.iter().map(|c| c.demand).collect();
    let capacity = compute_capacity(&demands, spec.delta)?;
    let instance = Instance {
        n: spec.n,
        horizon: DEFAULT_HORIZON,
        capacity,
        customers,
        cost,
    };
    instance.validate()?;
    Ok(instance)
}

/// Write an instance as a pretty-printed JSON document.
pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut body = serde_json::to_string_pretty(instance)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Read and validate an instance from a JSON document.
pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let instance: Instance = serde_json::from_str(&body).map_err(|e| {
        Error::parse(path, format!("{} (line {}, column {})", e, e.line(), e.column()))
    })?;
    instance
        .validate()
        .map_err(|e| Error::parse(path, e.to_string()))?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_formula_worked_examples() {
        let demands = [10.0, 20.0, 30.0, 20.0];
        assert_eq!(compute_capacity(&demands, 60.0).unwrap(), 60.0);
        assert_eq!(compute_capacity(&demands, 20.0).unwrap(), 40.0);
        assert_eq!(compute_capacity(&demands, 5.0).unwrap(), 32.5);
    }

    #[test]
    fn capacity_single_customer_degenerates_to_its_demand() {
        assert_eq!(compute_capacity(&[10.0], 60.0).unwrap(), 10.0);
    }

    #[test]
    fn capacity_rejects_empty_and_nonpositive() {
        assert!(compute_capacity(&[], 60.0).is_err());
        assert!(compute_capacity(&[10.0, 0.0], 60.0).is_err());
    }

    #[test]
    fn tw1_windows_come_from_the_three_slots() {
        let spec = GeneratorSpec::new(50, TwProfile::Tw1, 60.0, 1);
        let inst = generate_instance(&spec).unwrap();
        let slots = TwProfile::Tw1.windows();
        for c in &inst.customers {
            assert!(slots.contains(&(c.window_start, c.window_end)));
        }
    }

    #[test]
    fn tw0_windows_span_the_whole_day() {
        let spec = GeneratorSpec::new(50, TwProfile::Tw0, 60.0, 1);
        let inst = generate_instance(&spec).unwrap();
        for c in &inst.customers {
            assert_eq!((c.window_start, c.window_end), (0.0, 480.0));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::new(50, TwProfile::Tw4, 60.0, 99);
        let a = generate_instance(&spec).unwrap();
        let b = generate_instance(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn capacity_lies_between_max_and_total_demand() {
        for (n, delta) in [(50, 60.0), (50, 20.0), (150, 5.0)] {
            let spec = GeneratorSpec::new(n, TwProfile::Tw4, delta, 3);
            let inst = generate_instance(&spec).unwrap();
            assert!(inst.capacity >= inst.max_demand());
            assert!(inst.capacity <= inst.total_demand());
        }
    }

    #[test]
    fn cost_matrix_is_symmetric_with_near_triangle_inequality() {
        let spec = GeneratorSpec::new(50, TwProfile::Tw0, 60.0, 5);
        let inst = generate_instance(&spec).unwrap();
        let dim = inst.n + 1;
        for i in 0..dim {
            assert_eq!(inst.cost[i][i], 0.0);
            for j in 0..dim {
                assert_eq!(inst.cost[i][j], inst.cost[j][i]);
            }
        }
        // Two-decimal rounding can break the exact triangle inequality by at
        // most 1.5 ulps of the rounding grid.
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    assert!(inst.cost[i][k] <= inst.cost[i][j] + inst.cost[j][k] + 0.015 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn grid_validation_rejects_off_grid_values_without_custom() {
        let spec = GeneratorSpec::new(50, TwProfile::Tw0, 7.0, 1);
        assert!(spec.validate().is_err());
        let spec = GeneratorSpec::new(50, TwProfile::Tw0, 7.0, 1).custom();
        assert!(spec.validate().is_ok());
        let spec = GeneratorSpec::new(5, TwProfile::Tw0, 60.0, 1).custom();
        assert!(generate_instance(&spec).is_ok());
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let spec = GeneratorSpec::new(50, TwProfile::Tw2, 20.0, 11);
        let inst = generate_instance(&spec).unwrap();
        write_instance(&inst, &path).unwrap();
        let back = read_instance(&path).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn read_rejects_bad_matrix_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let spec = GeneratorSpec::new(5, TwProfile::Tw0, 60.0, 1).custom();
        let mut inst = generate_instance(&spec).unwrap();
        inst.cost.pop(); // (n+1) x n-ish: drop a row
        let body = serde_json::to_string_pretty(&inst).unwrap();
        std::fs::write(&path, body).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("rows"), "got: {err}");
    }

    #[test]
    fn read_rejects_inverted_window() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let spec = GeneratorSpec::new(5, TwProfile::Tw1, 60.0, 1).custom();
        let mut inst = generate_instance(&spec).unwrap();
        inst.customers[2].window_start = 400.0;
        inst.customers[2].window_end = 100.0;
        std::fs::write(&path, serde_json::to_string_pretty(&inst).unwrap()).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("window"), "got: {err}");
    }

    #[test]
    fn read_rejects_capacity_below_max_demand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let spec = GeneratorSpec::new(5, TwProfile::Tw0, 60.0, 1).custom();
        let mut inst = generate_instance(&spec).unwrap();
        inst.capacity = 1.0;
        std::fs::write(&path, serde_json::to_string_pretty(&inst).unwrap()).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("capacity"), "got: {err}");
    }

    #[test]
    fn read_reports_malformed_json_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        std::fs::write(&path, "{\"n\": 2, \"horizon\": }").unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("line"), "got: {err}");
    }
}
