//! Analog-combiner search: tabu search, projected gradient ascent on the box
//! relaxation, the exhaustive oracle and the random / phase-shifter baselines.

mod baselines;
mod exhaustive;
mod pga;
mod tabu;

pub use baselines::{ps_baseline_combiner, random_combiner, MAX_RANDOM_DRAWS};
pub use exhaustive::{exhaustive_search, MAX_EXHAUSTIVE_BITS};
pub use pga::{pga_aided_tabu, pga_relaxed, relaxed_gradient, round_and_repair, PgaConfig, PgaResult};
pub use tabu::{default_initial_combiner, tabu_search, TabuConfig};

use crate::rxbeam::AnalogCombiner;

/// Outcome of one combiner search.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub combiner: AnalogCombiner,
    pub objective: f64,
    /// Incumbent objective, starting with the initial point.
    pub trajectory: Vec<f64>,
    /// Objective evaluations performed.
    pub evaluations: u64,
    /// Candidates generated (including infeasible and tabu ones).
    pub enumerated: u64,
}

/// Feasible Hamming-distance-one neighbors of `w`, in ascending flip index.
pub fn neighbors(w: &AnalogCombiner, n_streams: usize) -> Vec<AnalogCombiner> {
    (0..w.bits().len())
        .map(|i| w.flipped(i))
        .filter(|nb| nb.is_feasible(n_streams))
        .collect()
}
