use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::rxbeam::{objective_on_basis, range_basis, AnalogCombiner, EffectiveCovarianceSet};

use super::SolveResult;

#[derive(Debug, Clone, PartialEq)]
pub struct TabuConfig {
    /// Maximum number of entries in the FIFO tabu list.
    pub list_length: usize,
    pub max_iterations: usize,
    /// Iterations without incumbent improvement before stopping.
    pub stall_limit: usize,
    /// Only move to neighbors strictly better than the current candidate,
    /// stopping when none exists. When unset the search moves to the best
    /// non-tabu neighbor even if it is worse.
    pub strict_improvement: bool,
}

impl TabuConfig {
    /// Defaults scaled by the neighborhood size `N_r * N_RF`.
    pub fn for_dims(n_rx: usize, n_rf: usize) -> Self {
        TabuConfig {
            list_length: 10 * n_rx,
            max_iterations: 10 * n_rx * n_rf,
            stall_limit: n_rx * n_rf,
            strict_improvement: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.list_length == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "tabu list length and iteration cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// All-ones when a single stream is enough, otherwise distinct unit columns.
pub fn default_initial_combiner(n_rx: usize, n_rf: usize, n_streams: usize) -> AnalogCombiner {
    if n_streams <= 1 {
        AnalogCombiner::all_ones(n_rx, n_rf)
    } else {
        AnalogCombiner::identity_pattern(n_rx, n_rf)
    }
}

struct TabuList {
    order: VecDeque<AnalogCombiner>,
    members: HashSet<AnalogCombiner>,
    capacity: usize,
}

impl TabuList {
    fn new(capacity: usize) -> Self {
        TabuList {
            order: VecDeque::with_capacity(capacity + 1),
            members: HashSet::with_capacity(capacity + 1),
            capacity,
        }
    }

    fn contains(&self, w: &AnalogCombiner) -> bool {
        self.members.contains(w)
    }

    fn push(&mut self, w: AnalogCombiner) {
        if !self.members.insert(w.clone()) {
            return;
        }
        self.order.push_back(w);
        if self.order.len() > self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.members.remove(&old);
            }
        }
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.order.len()
    }
}

/// Tabu search over binary combiners starting from `w0`.
///
/// Each iteration scans the non-tabu feasible neighbors of the current
/// candidate in flip-index order, moves to the best admissible one (lowest
/// flip index on ties), promotes it to incumbent if it beats the incumbent, and
/// appends it to the tabu list. With `strict_improvement` a neighbor is
/// admissible only if it beats the current candidate. Stops at the iteration
/// cap, after `stall_limit` iterations without incumbent improvement, or when
/// no admissible neighbor remains.
pub fn tabu_search(
    cov: &EffectiveCovarianceSet,
    noise: f64,
    w0: &AnalogCombiner,
    n_streams: usize,
    cfg: &TabuConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    if w0.n_rx() != cov.n_rx() {
        return Err(Error::InvalidInput(format!(
            "initial combiner has {} rows, covariances have {}",
            w0.n_rx(),
            cov.n_rx()
        )));
    }
    let q0 = range_basis(&w0.to_real());
    if q0.ncols() < n_streams {
        return Err(Error::Infeasible(format!(
            "initial combiner rank {} < N_s = {n_streams}",
            q0.ncols()
        )));
    }

    let mut evaluations = 1u64;
    let mut enumerated = 0u64;
    let mut current = w0.clone();
    let mut current_val = objective_on_basis(&q0, cov, noise);
    let mut best = current.clone();
    let mut best_val = current_val;
    let mut trajectory = vec![best_val];

    let mut tabu = TabuList::new(cfg.list_length);
    tabu.push(current.clone());
    let mut stall = 0usize;

    for _ in 0..cfg.max_iterations {
        let mut chosen: Option<(AnalogCombiner, f64)> = None;
        for idx in 0..current.bits().len() {
            enumerated += 1;
            let candidate = current.flipped(idx);
            if tabu.contains(&candidate) {
                continue;
            }
            let q = range_basis(&candidate.to_real());
            if q.ncols() < n_streams {
                continue;
            }
            let val = objective_on_basis(&q, cov, noise);
            evaluations += 1;
            if cfg.strict_improvement && val <= current_val {
                continue;
            }
            if chosen.as_ref().is_none_or(|(_, v)| val > *v) {
                chosen = Some((candidate, val));
            }
        }

        let Some((next, next_val)) = chosen else {
            break;
        };
        current = next;
        current_val = next_val;
        if current_val > best_val {
            best = current.clone();
            best_val = current_val;
            stall = 0;
        } else {
            stall += 1;
        }
        trajectory.push(best_val);
        tabu.push(current.clone());
        if stall >= cfg.stall_limit {
            break;
        }
    }

    Ok(SolveResult {
        combiner: best,
        objective: best_val,
        trajectory,
        evaluations,
        enumerated,
    })
}
