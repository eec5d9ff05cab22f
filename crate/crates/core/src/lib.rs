//! Multiobjective vehicle routing with time windows, solved in two phases:
//! an expensive multiobjective pilot run (NSGA-II and MOEA/D over objective
//! subsets) builds a Pareto approximation set once, a decision-maker picks a
//! target objective vector from it, and sibling instances are then solved
//! quickly by a single-objective GA steered by one of three goal-based
//! objective functions (Chebyshev ratio, derived weight vector, Euclidean
//! distance).

pub mod analysis;
pub mod archive;
pub mod error;
pub mod gasolve;
pub mod goalprog;
pub mod instance;
pub mod moea;
pub mod objective;
pub mod pilot;
pub mod seeds;
pub mod solution;

pub use archive::{Evaluated, NondominatedArchive};
pub use error::{Error, Result};
pub use instance::{
    compute_capacity, generate_instance, read_instance, write_instance, Customer, GeneratorSpec,
    Instance, TwProfile,
};
pub use moea::{EngineKind, EvolutionConfig, ObjectiveSubset};
pub use objective::{dominates_slice, pareto_filter, pareto_filter_indices, ObjectiveVector};
pub use solution::{decode, evaluate, simulate_route, Chromosome, DelayRef, RouteSchedule, Solution};
