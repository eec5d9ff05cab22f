//! Shared helpers for the benchmark targets.

use movrptw::instance::{generate_instance, GeneratorSpec, TwProfile};
use movrptw::Instance;

pub fn benchmark_instance(n: usize, seed: u64) -> Instance {
    let spec = GeneratorSpec::new(n, TwProfile::Tw4, 60.0, seed);
    let spec = if [50, 150, 250].contains(&n) {
        spec
    } else {
        spec.custom()
    };
    generate_instance(&spec).expect("valid benchmark spec")
}
