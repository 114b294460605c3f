use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numkernel::{svd, ComplexMatrix};
use crate::rxbeam::AnalogCombiner;

pub const MAX_RANDOM_DRAWS: usize = 1000;

/// I.i.d. Bernoulli(1/2) switch pattern, redrawn until `rank >= n_streams`.
pub fn random_combiner<R: Rng + ?Sized>(
    rng: &mut R,
    n_rx: usize,
    n_rf: usize,
    n_streams: usize,
) -> Result<AnalogCombiner> {
    for _ in 0..MAX_RANDOM_DRAWS {
        let bits = (0..n_rx * n_rf).map(|_| rng.random_bool(0.5)).collect();
        let w = AnalogCombiner::from_bits(n_rx, n_rf, bits);
        if w.is_feasible(n_streams) {
            return Ok(w);
        }
    }
    Err(Error::Infeasible(format!(
        "{MAX_RANDOM_DRAWS} random {n_rx}x{n_rf} draws never reached rank {n_streams}"
    )))
}

/// Phase-shifter reference combiner: the leading `n_rf` left singular vectors
/// of the center subcarrier channel, each entry forced to unit modulus.
pub fn ps_baseline_combiner(channels: &[ComplexMatrix], n_rf: usize) -> Result<ComplexMatrix> {
    let k = channels.len();
    if k == 0 {
        return Err(Error::InvalidInput("no subcarrier channels".into()));
    }
    let center = &channels[k.div_ceil(2) - 1];
    let dec = svd(center)?;
    let n_rx = center.nrows();
    let one = Complex64::new(1.0, 0.0);
    Ok(ComplexMatrix::from_fn(n_rx, n_rf, |i, j| {
        if j >= dec.u.ncols() {
            return one;
        }
        let z = dec.u[(i, j)];
        let mag = z.norm();
        if mag > 0.0 {
            z / mag
        } else {
            one
        }
    }))
}
