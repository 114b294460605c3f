use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::Rng;

use crate::numkernel::{numerical_rank_real, to_complex, ComplexMatrix, RealMatrix, DEFAULT_RANK_TOL};
use crate::rxbeam::{analog_objective, AnalogCombiner, EffectiveCovarianceSet};

use super::tabu::{tabu_search, TabuConfig};
use super::SolveResult;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PgaConfig {
    /// `c` in the step schedule `c / sqrt(i + 1)`.
    pub step_scale: f64,
    pub max_iterations: usize,
    /// Stop once the relative objective change drops below this.
    pub convergence_tol: f64,
}

impl Default for PgaConfig {
    fn default() -> Self {
        PgaConfig {
            step_scale: 1.0,
            max_iterations: 500,
            convergence_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PgaResult {
    /// Best iterate seen, entries in `[0, 1]`.
    pub w: RealMatrix,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: u64,
}

const PERTURBATIONS: [f64; 3] = [0.0, 1e-9, 1e-6];

/// Gradient of the relaxed objective with respect to the real entries of `W`.
///
/// For full-column-rank `W` with `Y = W (W^T W)^{-1}` and `P = Y W^T`:
/// `grad = 2 / (K ln2 noise) * (I - P) * sum_k Re(A_k S_k^{-1} A_k^H) Y`,
/// `S_k = I + A_k^H P A_k / noise`. Rank-deficient points are nudged along
/// the identity pattern first.
pub fn relaxed_gradient(w: &RealMatrix, cov: &EffectiveCovarianceSet, noise: f64) -> RealMatrix {
    let bump = RealMatrix::from_fn(w.nrows(), w.ncols(), |i, j| if i == j { 1.0 } else { 0.0 });
    for eps in PERTURBATIONS {
        let point = if eps == 0.0 { w.clone() } else { w + &bump * eps };
        if let Some(g) = gradient_full_rank(&point, cov, noise) {
            return g;
        }
    }
    RealMatrix::zeros(w.nrows(), w.ncols())
}

fn gradient_full_rank(w: &RealMatrix, cov: &EffectiveCovarianceSet, noise: f64) -> Option<RealMatrix> {
    let n_rx = w.nrows();
    if numerical_rank_real(w, DEFAULT_RANK_TOL) < w.ncols() {
        return None;
    }
    let gram = Cholesky::new(w.transpose() * w)?;
    let y = gram.solve(&w.transpose()).transpose();
    let p = &y * w.transpose();
    let yc = to_complex(&y);
    let pc = to_complex(&p);

    let mut acc = ComplexMatrix::zeros(n_rx, w.ncols());
    for a in cov.factors() {
        let ns = a.ncols();
        let ah = a.adjoint();
        let s = ComplexMatrix::identity(ns, ns) + (&ah * &pc * a).scale(1.0 / noise);
        let s_inv = Cholesky::new(s)?.inverse();
        acc += a * s_inv * (&ah * &yc);
    }
    let re = acc.map(|z: Complex64| z.re);
    let proj = RealMatrix::identity(n_rx, n_rx) - p;
    let scale = 2.0 / (cov.n_subcarriers() as f64 * std::f64::consts::LN_2 * noise);
    Some(proj * re * scale)
}

fn project_box(w: &mut RealMatrix) {
    w.apply(|x| *x = x.clamp(0.0, 1.0));
}

/// Projected gradient ascent on `[0, 1]^{N_r x N_RF}` with step `c / sqrt(i + 1)`.
pub fn pga_relaxed(cov: &EffectiveCovarianceSet, noise: f64, w_init: &RealMatrix, cfg: &PgaConfig) -> PgaResult {
    let mut w = w_init.clone();
    project_box(&mut w);
    let mut val = analog_objective(&w, cov, noise);
    let mut evaluations = 1u64;
    let mut best = (w.clone(), val);
    let mut iterations = 0;

    for i in 1..=cfg.max_iterations {
        iterations = i;
        let step = cfg.step_scale / ((i + 1) as f64).sqrt();
        let grad = relaxed_gradient(&w, cov, noise);
        let mut next = &w + grad * step;
        project_box(&mut next);
        let next_val = analog_objective(&next, cov, noise);
        evaluations += 1;
        let change = (next_val - val).abs() / val.abs().max(f64::MIN_POSITIVE);
        w = next;
        val = next_val;
        if val > best.1 {
            best = (w.clone(), val);
        }
        if change < cfg.convergence_tol {
            break;
        }
    }

    PgaResult {
        w: best.0,
        objective: best.1,
        iterations,
        evaluations,
    }
}

/// Rounds at 0.5, then restores `rank >= n_streams` by flipping entries in
/// order of closeness to 0.5; falls back to the identity pattern.
pub fn round_and_repair(w_relaxed: &RealMatrix, n_streams: usize) -> AnalogCombiner {
    let (n_rx, n_rf) = w_relaxed.shape();
    // column-major iteration matches the vectorization order
    let values: Vec<f64> = w_relaxed.iter().copied().collect();
    let mut bits: Vec<bool> = values.iter().map(|&x| x >= 0.5).collect();
    let rounded = AnalogCombiner::from_bits(n_rx, n_rf, bits.clone());
    if rounded.is_feasible(n_streams) {
        return rounded;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| (values[a] - 0.5).abs().total_cmp(&(values[b] - 0.5).abs()).then(a.cmp(&b)));
    for idx in order {
        bits[idx] = !bits[idx];
        let candidate = AnalogCombiner::from_bits(n_rx, n_rf, bits.clone());
        if candidate.is_feasible(n_streams) {
            return candidate;
        }
    }
    AnalogCombiner::identity_pattern(n_rx, n_rf)
}

/// PGA from a uniform random start, rounded, then tabu search from there.
pub fn pga_aided_tabu<R: Rng + ?Sized>(
    cov: &EffectiveCovarianceSet,
    noise: f64,
    n_rf: usize,
    n_streams: usize,
    tabu_cfg: &TabuConfig,
    pga_cfg: &PgaConfig,
    rng: &mut R,
) -> Result<SolveResult> {
    let n_rx = cov.n_rx();
    let start = RealMatrix::from_fn(n_rx, n_rf, |_, _| rng.random::<f64>());
    let relaxed = pga_relaxed(cov, noise, &start, pga_cfg);
    let w0 = round_and_repair(&relaxed.w, n_streams);
    let mut res = tabu_search(cov, noise, &w0, n_streams, tabu_cfg)?;
    res.evaluations += relaxed.evaluations;
    Ok(res)
}
