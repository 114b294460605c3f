use crate::error::{Error, Result};
use crate::numkernel::RealMatrix;
use crate::rxbeam::{objective_on_basis, range_basis, AnalogCombiner, EffectiveCovarianceSet};

use super::SolveResult;

/// Largest `N_r * N_RF` the oracle will enumerate.
pub const MAX_EXHAUSTIVE_BITS: usize = 20;

/// Enumerates every binary combiner, skipping those with rank below
/// `n_streams`. Candidates are visited in increasing order of their
/// vectorization read as a binary number (first entry most significant), and
/// only a strictly better value replaces the incumbent, so ties resolve to the
/// smallest such number.
pub fn exhaustive_search(
    cov: &EffectiveCovarianceSet,
    noise: f64,
    n_rx: usize,
    n_rf: usize,
    n_streams: usize,
) -> Result<SolveResult> {
    let n_bits = n_rx * n_rf;
    if n_bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::DimensionGuard(format!(
            "exhaustive search over N_r * N_RF = {n_bits} bits exceeds the limit of {MAX_EXHAUSTIVE_BITS}"
        )));
    }
    if n_rx != cov.n_rx() {
        return Err(Error::InvalidInput(format!(
            "N_r = {n_rx} but covariances are {0}x{0}",
            cov.n_rx()
        )));
    }

    let mut w = RealMatrix::zeros(n_rx, n_rf);
    let mut best: Option<(u64, f64)> = None;
    let mut trajectory = Vec::new();
    let mut evaluations = 0u64;
    let total = 1u64 << n_bits;
    for code in 0..total {
        for i in 0..n_bits {
            let bit = (code >> (n_bits - 1 - i)) & 1;
            w[(i % n_rx, i / n_rx)] = bit as f64;
        }
        let q = range_basis(&w);
        if q.ncols() < n_streams {
            continue;
        }
        let val = objective_on_basis(&q, cov, noise);
        evaluations += 1;
        if best.is_none_or(|(_, b)| val > b) {
            best = Some((code, val));
            trajectory.push(val);
        }
    }

    let (code, objective) =
        best.ok_or_else(|| Error::Infeasible(format!("no binary combiner reaches rank {n_streams}")))?;
    let bits = (0..n_bits).map(|i| (code >> (n_bits - 1 - i)) & 1 == 1).collect();
    Ok(SolveResult {
        combiner: AnalogCombiner::from_bits(n_rx, n_rf, bits),
        objective,
        trajectory,
        evaluations,
        enumerated: total,
    })
}
