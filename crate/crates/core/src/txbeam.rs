//! Fully digital transmit precoding: per-subcarrier SVD with one water level
//! shared across every subcarrier and stream.


use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::numkernel::{logdet2_eye_plus_gram, svd, ComplexMatrix, DEFAULT_RANK_TOL};

#[derive(Debug, Clone)]
pub struct PrecoderSet {
    /// `F_k`, each `N_t x N_s`.
    pub precoders: Vec<ComplexMatrix>,
    /// `p_{k,i}`, `K` rows of `N_s` entries.
    pub powers: Vec<Vec<f64>>,
    /// Squared singular values used as water-filling gains, same shape as `powers`.
    pub mode_gains: Vec<Vec<f64>>,
    pub water_level: f64,
}

impl PrecoderSet {
    pub fn total_power(&self) -> f64 {
        self.powers.iter().flatten().sum()
    }
}

/// Water-filling over parallel channels with gains `lambda_i`.
///
/// Returns `p_i = max(mu - noise / lambda_i, 0)` with `sum p_i = budget`,
/// solved exactly by scanning the sorted breakpoints `noise / lambda_i`.
pub fn water_fill(gains: &[f64], budget: f64, noise: f64) -> Result<(Vec<f64>, f64)> {
    if gains.is_empty() {
        return Err(Error::InvalidInput("water-filling needs at least one gain".into()));
    }
    if !(budget > 0.0 && budget.is_finite()) || !(noise > 0.0) {
        return Err(Error::InvalidInput(format!(
            "budget and noise must be positive, got {budget} and {noise}"
        )));
    }
    if let Some(g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidInput(format!("gain {g} is not positive")));
    }

    let floors: Vec<f64> = gains.iter().map(|&g| noise / g).collect();
    let mut order: Vec<usize> = (0..floors.len()).collect();
    order.sort_by(|&a, &b| floors[a].total_cmp(&floors[b]));

    // The feasible active sets form a prefix of the sorted floors; keep the longest.
    let mut level = budget + floors[order[0]];
    let mut prefix = floors[order[0]];
    for (m, &idx) in order.iter().enumerate().skip(1) {
        let candidate = (budget + prefix + floors[idx]) / (m + 1) as f64;
        if candidate > floors[idx] {
            prefix += floors[idx];
            level = candidate;
        } else {
            break;
        }
    }

    let powers = floors.iter().map(|&c| (level - c).max(0.0)).collect();
    Ok((powers, level))
}

/// SVD precoders `F_k = V_k Gamma_k^{1/2}` with joint water-filling over all
/// `K * N_s` modes under `sum_k tr(Gamma_k) = P_b`.
pub fn design_precoders(channels: &[ComplexMatrix], cfg: &SystemConfig) -> Result<PrecoderSet> {
    let ns = cfg.n_streams;
    let mut bases = Vec::with_capacity(channels.len());
    let mut mode_gains = Vec::with_capacity(channels.len());
    for h in channels {
        let dec = svd(h)?;
        let take = ns.min(dec.s.len());
        let mut v = ComplexMatrix::zeros(h.ncols(), ns);
        let mut gains = vec![0.0; ns];
        for i in 0..take {
            v.set_column(i, &dec.v.column(i));
            gains[i] = dec.s[i] * dec.s[i];
        }
        bases.push(v);
        mode_gains.push(gains);
    }

    let global_max = mode_gains.iter().flatten().copied().fold(0.0, f64::max);
    let floor = (DEFAULT_RANK_TOL * global_max.sqrt()).powi(2);
    let mut active = Vec::new();
    let mut flat_gains = Vec::new();
    for (k, gains) in mode_gains.iter().enumerate() {
        for (i, &g) in gains.iter().enumerate() {
            if g > floor && g > 0.0 {
                active.push((k, i));
                flat_gains.push(g);
            }
        }
    }

    let mut powers = vec![vec![0.0; ns]; channels.len()];
    let mut water_level = 0.0;
    if !flat_gains.is_empty() {
        let (p, mu) = water_fill(&flat_gains, cfg.power_budget(), cfg.noise_power)?;
        for (&(k, i), pi) in active.iter().zip(p) {
            powers[k][i] = pi;
        }
        water_level = mu;
    }

    let precoders = bases
        .into_iter()
        .zip(&powers)
        .map(|(mut v, p)| {
            for (i, &pi) in p.iter().enumerate() {
                v.column_mut(i).scale_mut(pi.sqrt());
            }
            v
        })
        .collect();

    Ok(PrecoderSet {
        precoders,
        powers,
        mode_gains,
        water_level,
    })
}

/// Fully digital upper bound `(1/K) sum_k log2 det(I + H_k F_k F_k^H H_k^H / noise)`.
pub fn dbf_spectral_efficiency(channels: &[ComplexMatrix], precoders: &[ComplexMatrix], noise: f64) -> f64 {
    if channels.is_empty() {
        return 0.0;
    }
    let total: f64 = channels
        .iter()
        .zip(precoders)
        .map(|(h, f)| logdet2_eye_plus_gram(&(h * f), 1.0 / noise))
        .sum();
    total / channels.len() as f64
}

#[cfg(test)]
fn zero_precoders(cfg: &SystemConfig) -> Vec<ComplexMatrix> {
    vec![ComplexMatrix::from_element(cfg.n_tx, cfg.n_streams, num_complex::Complex64::new(0.0, 0.0)); cfg.n_subcarriers]
}
