//! Assignment genotype, route decoding with capacity repair, schedule
//! simulation under soft time windows, and the five-objective evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::objective::ObjectiveVector;

/// Direct integer encoding: gene `i` is the vehicle id serving customer `i+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub genes: Vec<usize>,
}

impl Chromosome {
    pub fn new(genes: Vec<usize>) -> Self {
        Chromosome { genes }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }
}

/// A routed plan: one ordered customer sequence per used vehicle.
/// Empty routes are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Vec<usize>>,
}

impl Solution {
    /// Re-encode as an assignment chromosome (vehicle id = route index).
    /// For solutions produced by [`decode`] this is a right inverse:
    /// decoding the result reproduces the solution exactly.
    pub fn to_chromosome(&self, n: usize) -> Chromosome {
        let mut genes = vec![0; n];
        for (v, route) in self.routes.iter().enumerate() {
            for &c in route {
                genes[c - 1] = v;
            }
        }
        Chromosome::new(genes)
    }

    /// One route per line, customer ids comma-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for route in &self.routes {
            let ids: Vec<String> = route.iter().map(|c| c.to_string()).collect();
            out.push_str(&ids.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Solution> {
        let mut routes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut route = Vec::new();
            for field in line.split(',') {
                let id: usize = field.trim().parse().map_err(|_| {
                    Error::invalid(format!(
                        "solution line {}: '{}' is not a customer id",
                        lineno + 1,
                        field
                    ))
                })?;
                route.push(id);
            }
            routes.push(route);
        }
        Ok(Solution { routes })
    }
}

/// Reference point for delay accounting. The default charges delay past the
/// window start; `WindowEnd` is the conventional lateness-past-`b` reading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayRef {
    #[default]
    WindowStart,
    WindowEnd,
}

/// Timing of one customer visit along a route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopTiming {
    pub customer: usize,
    pub arrival: f64,
    pub wait: f64,
    pub delay: f64,
    pub service_start: f64,
    pub service_end: f64,
}

/// Simulated schedule of a single route.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RouteSchedule {
    pub stops: Vec<StopTiming>,
    /// Time the vehicle is back at the depot; 0 for an empty route.
    pub return_time: f64,
}

impl RouteSchedule {
    pub fn total_wait(&self) -> f64 {
        self.stops.iter().map(|s| s.wait).sum()
    }

    pub fn total_delay(&self) -> f64 {
        self.stops.iter().map(|s| s.delay).sum()
    }
}

/// Decode a chromosome into a routed plan.
///
/// Customers are grouped by vehicle id and ordered within each route by
/// non-decreasing window start (customer id breaks ties), keeping gene
/// positions meaningful under uniform crossover. Routes whose total demand
/// exceeds capacity are repaired deterministically: the latest customers in
/// window-start order move to a fresh vehicle until every route fits.
pub fn decode(chromosome: &Chromosome, instance: &Instance) -> Solution {
    assert_eq!(
        chromosome.len(),
        instance.n,
        "chromosome length must equal the customer count"
    );
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (idx, &gene) in chromosome.genes.iter().enumerate() {
        groups.entry(gene).or_default().push(idx + 1);
    }
    let mut pending: std::collections::VecDeque<Vec<usize>> = groups
        .into_values()
        .map(|mut route| {
            route.sort_by(|&a, &b| {
                instance
                    .customer(a)
                    .window_start
                    .total_cmp(&instance.customer(b).window_start)
                    .then(a.cmp(&b))
            });
            route
        })
        .collect();
    let mut routes = Vec::new();
    while let Some(mut route) = pending.pop_front() {
        let mut load: f64 = route.iter().map(|&c| instance.customer(c).demand).sum();
        let mut overflow = Vec::new();
        while load > instance.capacity && route.len() > 1 {
            let moved = route.pop().expect("route is non-empty");
            load -= instance.customer(moved).demand;
            overflow.push(moved);
        }
        routes.push(route);
        if !overflow.is_empty() {
            overflow.reverse(); // restore window-start order
            pending.push_back(overflow);
        }
    }
    Solution { routes }
}

/// Simulate one route departing the depot at t = 0: arriving before the
/// window start waits, arriving after the delay reference accrues delay, and
/// service starts at `max(arrival, window_start)`.
pub fn simulate_route(
    route: &[usize],
    instance: &Instance,
    delay_ref: DelayRef,
) -> Result<RouteSchedule> {
    let mut stops = Vec::with_capacity(route.len());
    let mut time = 0.0;
    let mut prev = 0;
    for &c in route {
        if c == 0 || c > instance.n {
            return Err(Error::invalid(format!("unknown customer id {}", c)));
        }
        let cust = instance.customer(c);
        let arrival = time + instance.leg(prev, c);
        let wait = (cust.window_start - arrival).max(0.0);
        let reference = match delay_ref {
            DelayRef::WindowStart => cust.window_start,
            DelayRef::WindowEnd => cust.window_end,
        };
        let delay = (arrival - reference).max(0.0);
        let service_start = arrival.max(cust.window_start);
        let service_end = service_start + cust.service_time;
        stops.push(StopTiming {
            customer: c,
            arrival,
            wait,
            delay,
            service_start,
            service_end,
        });
        time = service_end;
        prev = c;
    }
    let return_time = if route.is_empty() {
        0.0
    } else {
        time + instance.leg(prev, 0)
    };
    Ok(RouteSchedule { stops, return_time })
}

fn route_distance(route: &[usize], instance: &Instance) -> f64 {
    if route.is_empty() {
        return 0.0;
    }
    let mut dist = instance.leg(0, route[0]);
    for w in route.windows(2) {
        dist += instance.leg(w[0], w[1]);
    }
    dist + instance.leg(route[route.len() - 1], 0)
}

/// Evaluate a full plan: vehicle count, total distance (depot legs included),
/// longest route duration, total waiting, total delay.
pub fn evaluate(
    solution: &Solution,
    instance: &Instance,
    delay_ref: DelayRef,
) -> Result<ObjectiveVector> {
    let mut seen = vec![false; instance.n + 1];
    let mut covered = 0usize;
    for route in &solution.routes {
        if route.is_empty() {
            return Err(Error::Coverage("solution stores an empty route".into()));
        }
        for &c in route {
            if c == 0 || c > instance.n {
                return Err(Error::Coverage(format!("unknown customer id {}", c)));
            }
            if seen[c] {
                return Err(Error::Coverage(format!("customer {} appears twice", c)));
            }
            seen[c] = true;
            covered += 1;
        }
    }
    if covered != instance.n {
        let missing: Vec<usize> = (1..=instance.n).filter(|&c| !seen[c]).collect();
        return Err(Error::Coverage(format!("customers not served: {:?}", missing)));
    }
    let mut distance = 0.0;
    let mut makespan: f64 = 0.0;
    let mut waiting = 0.0;
    let mut delay = 0.0;
    for route in &solution.routes {
        let schedule = simulate_route(route, instance, delay_ref)?;
        distance += route_distance(route, instance);
        makespan = makespan.max(schedule.return_time);
        waiting += schedule.total_wait();
        delay += schedule.total_delay();
    }
    Ok(ObjectiveVector([
        solution.routes.len() as f64,
        distance,
        makespan,
        waiting,
        delay,
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Customer;
    use proptest::prelude::*;

    /// Hand-built instance: travel costs and windows set explicitly.
    fn two_customer_instance() -> Instance {
        Instance {
            n: 2,
            horizon: 480.0,
            capacity: 100.0,
            customers: vec![
                Customer {
                    id: 1,
                    demand: 10.0,
                    window_start: 0.0,
                    window_end: 100.0,
                    service_time: 10.0,
                },
                Customer {
                    id: 2,
                    demand: 10.0,
                    window_start: 50.0,
                    window_end: 100.0,
                    service_time: 10.0,
                },
            ],
            cost: vec![
                vec![0.0, 10.0, 20.0],
                vec![10.0, 0.0, 15.0],
                vec![20.0, 15.0, 0.0],
            ],
        }
    }

    fn tiny_instance(demands: &[f64], starts: &[f64], capacity: f64) -> Instance {
        let n = demands.len();
        let customers = (0..n)
            .map(|i| Customer {
                id: i + 1,
                demand: demands[i],
                window_start: starts[i],
                window_end: 480.0,
                service_time: 0.0,
            })
            .collect();
        Instance {
            n,
            horizon: 480.0,
            capacity,
            customers,
            cost: vec![vec![1.0; n + 1]; n + 1]
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &v)| if i == j { 0.0 } else { v })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn decode_sorts_routes_by_window_start() {
        let inst = tiny_instance(&[1.0, 1.0, 1.0], &[10.0, 5.0, 0.0], 10.0);
        let sol = decode(&Chromosome::new(vec![0, 0, 1]), &inst);
        assert_eq!(sol.routes, vec![vec![2, 1], vec![3]]);
    }

    #[test]
    fn decode_single_route_when_demand_fits() {
        let inst = tiny_instance(&[5.0, 5.0, 5.0], &[0.0, 0.0, 0.0], 20.0);
        let sol = decode(&Chromosome::new(vec![3, 3, 3]), &inst);
        assert_eq!(sol.routes, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn decode_repairs_capacity_overflow() {
        let inst = tiny_instance(&[30.0, 30.0, 30.0], &[0.0, 0.0, 0.0], 60.0);
        let sol = decode(&Chromosome::new(vec![0, 0, 0]), &inst);
        assert_eq!(sol.routes, vec![vec![1, 2], vec![3]]);
        for route in &sol.routes {
            let load: f64 = route.iter().map(|&c| inst.customer(c).demand).sum();
            assert!(load <= inst.capacity);
        }
    }

    #[test]
    fn simulate_matches_hand_worked_schedule() {
        let inst = two_customer_instance();
        let sched = simulate_route(&[1, 2], &inst, DelayRef::WindowStart).unwrap();
        let s1 = sched.stops[0];
        assert_eq!((s1.arrival, s1.wait, s1.delay), (10.0, 0.0, 10.0));
        assert_eq!((s1.service_start, s1.service_end), (10.0, 20.0));
        let s2 = sched.stops[1];
        assert_eq!((s2.arrival, s2.wait, s2.delay), (35.0, 15.0, 0.0));
        assert_eq!((s2.service_start, s2.service_end), (50.0, 60.0));
        assert_eq!(sched.return_time, 80.0);
    }

    #[test]
    fn simulate_exact_on_time_arrival_has_no_wait_or_delay() {
        let mut inst = two_customer_instance();
        inst.customers[0].window_start = 10.0; // equals travel time from depot
        let sched = simulate_route(&[1], &inst, DelayRef::WindowStart).unwrap();
        assert_eq!((sched.stops[0].wait, sched.stops[0].delay), (0.0, 0.0));
    }

    #[test]
    fn simulate_empty_route_is_all_zero() {
        let inst = two_customer_instance();
        let sched = simulate_route(&[], &inst, DelayRef::WindowStart).unwrap();
        assert!(sched.stops.is_empty());
        assert_eq!(sched.return_time, 0.0);
    }

    #[test]
    fn simulate_rejects_unknown_customer() {
        let inst = two_customer_instance();
        assert!(simulate_route(&[7], &inst, DelayRef::WindowStart).is_err());
    }

    #[test]
    fn evaluate_matches_hand_worked_vector() {
        let inst = two_customer_instance();
        let sol = Solution {
            routes: vec![vec![1, 2]],
        };
        let z = evaluate(&sol, &inst, DelayRef::WindowStart).unwrap();
        assert_eq!(z.0, [1.0, 45.0, 80.0, 15.0, 10.0]);
    }

    #[test]
    fn evaluate_two_singleton_routes() {
        let mut inst = two_customer_instance();
        // windows wide open so no wait/delay
        inst.customers[1].window_start = 0.0;
        let sol = Solution {
            routes: vec![vec![1], vec![2]],
        };
        let z = evaluate(&sol, &inst, DelayRef::WindowEnd).unwrap();
        // route 1: 10 out + 10 service + 10 back = 30; route 2: 20 + 10 + 20 = 50
        assert_eq!(z.0, [2.0, 60.0, 50.0, 0.0, 0.0]);
    }

    #[test]
    fn evaluate_is_invariant_under_route_order() {
        let mut inst = two_customer_instance();
        inst.customers[1].window_start = 0.0;
        let a = Solution {
            routes: vec![vec![1], vec![2]],
        };
        let b = Solution {
            routes: vec![vec![2], vec![1]],
        };
        assert_eq!(
            evaluate(&a, &inst, DelayRef::WindowStart).unwrap(),
            evaluate(&b, &inst, DelayRef::WindowStart).unwrap()
        );
    }

    #[test]
    fn evaluate_rejects_missing_and_duplicate_customers() {
        let inst = two_customer_instance();
        let missing = Solution {
            routes: vec![vec![1]],
        };
        assert!(matches!(
            evaluate(&missing, &inst, DelayRef::WindowStart),
            Err(Error::Coverage(_))
        ));
        let duplicated = Solution {
            routes: vec![vec![1], vec![1, 2]],
        };
        assert!(matches!(
            evaluate(&duplicated, &inst, DelayRef::WindowStart),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn window_end_reference_only_charges_past_b() {
        let mut inst = two_customer_instance();
        inst.customers[0].window_start = 0.0;
        inst.customers[0].window_end = 5.0; // arrival at 10 is 5 late
        let sched = simulate_route(&[1], &inst, DelayRef::WindowEnd).unwrap();
        assert_eq!(sched.stops[0].delay, 5.0);
        let sched = simulate_route(&[2], &inst, DelayRef::WindowEnd).unwrap();
        assert_eq!(sched.stops[0].delay, 0.0); // arrival 20 < b = 100
    }

    #[test]
    fn solution_text_round_trip() {
        let sol = Solution {
            routes: vec![vec![2, 1], vec![3]],
        };
        let text = sol.to_text();
        assert_eq!(text, "2,1\n3\n");
        assert_eq!(Solution::from_text(&text).unwrap(), sol);
    }

    proptest! {
        /// decode is total: any gene vector yields a capacity-feasible,
        /// full-coverage plan with wait/delay complementarity at every stop.
        #[test]
        fn decode_and_evaluate_are_total(
            genes in proptest::collection::vec(0usize..6, 6),
            seed in 0u64..50,
        ) {
            let spec = crate::instance::GeneratorSpec::new(6, crate::instance::TwProfile::Tw4, 60.0, seed).custom();
            let inst = crate::instance::generate_instance(&spec).unwrap();
            let sol = decode(&Chromosome::new(genes), &inst);
            let mut count = 0;
            for route in &sol.routes {
                prop_assert!(!route.is_empty());
                let load: f64 = route.iter().map(|&c| inst.customer(c).demand).sum();
                prop_assert!(load <= inst.capacity);
                count += route.len();
                let sched = simulate_route(route, &inst, DelayRef::WindowStart).unwrap();
                let mut t = 0.0;
                for stop in &sched.stops {
                    prop_assert!(stop.wait >= 0.0 && stop.delay >= 0.0);
                    prop_assert!(stop.wait * stop.delay == 0.0);
                    prop_assert!(stop.arrival >= t);
                    t = stop.service_end;
                }
            }
            prop_assert_eq!(count, inst.n);
            prop_assert!(evaluate(&sol, &inst, DelayRef::WindowStart).is_ok());
        }

        /// Re-encoding a decoded plan and decoding again is the identity.
        #[test]
        fn encode_decode_identity_on_decode_images(
            genes in proptest::collection::vec(0usize..8, 8),
            seed in 0u64..20,
        ) {
            let spec = crate::instance::GeneratorSpec::new(8, crate::instance::TwProfile::Tw1, 20.0, seed).custom();
            let inst = crate::instance::generate_instance(&spec).unwrap();
            let sol = decode(&Chromosome::new(genes), &inst);
            let again = decode(&sol.to_chromosome(inst.n), &inst);
            prop_assert_eq!(sol, again);
        }
    }
}
