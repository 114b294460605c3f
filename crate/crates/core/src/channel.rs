//! Wideband clustered channel with frequency-dependent array responses.
//!
//! Each cluster contributes a rank-one term whose steering vectors are
//! evaluated at the subcarrier frequency rather than the carrier, which is
//! what produces beam squint across a wide band.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numkernel::ComplexMatrix;

/// Scenario scalars shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_rf: usize,
    pub n_streams: usize,
    pub n_subcarriers: usize,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub n_clusters: usize,
    /// Cyclic-prefix length in samples; also the number of channel taps.
    pub cp_length: usize,
    /// Element spacing in carrier wavelengths.
    pub antenna_spacing: f64,
    pub snr_linear: f64,
    pub noise_power: f64,
    /// Raised-cosine roll-off.
    pub rolloff: f64,
    /// Scale cluster gains by `sqrt(N_t N_r / L)`.
    pub normalize_gain: bool,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::small_preset()
    }
}

impl SystemConfig {
    /// 16x8 link with two RF chains and two streams over 64 subcarriers.
    pub fn small_preset() -> Self {
        SystemConfig {
            n_tx: 16,
            n_rx: 8,
            n_rf: 2,
            n_streams: 2,
            n_subcarriers: 64,
            bandwidth_hz: 1e9,
            carrier_hz: 60e9,
            n_clusters: 10,
            cp_length: 16,
            antenna_spacing: 0.5,
            snr_linear: 10.0,
            noise_power: 1.0,
            rolloff: 1.0,
            normalize_gain: false,
            seed: 1,
        }
    }

    /// 64x64 link with four RF chains and four streams.
    pub fn large_preset() -> Self {
        SystemConfig {
            n_tx: 64,
            n_rx: 64,
            n_rf: 4,
            n_streams: 4,
            ..Self::small_preset()
        }
    }

    /// Sets `K` and resets the cyclic prefix to the default `K/4`.
    pub fn with_subcarriers(mut self, k: usize) -> Self {
        self.n_subcarriers = k;
        self.cp_length = default_cp_length(k);
        self
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_linear = 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    /// Total transmit budget `P_b = K * SNR * noise`.
    pub fn power_budget(&self) -> f64 {
        self.n_subcarriers as f64 * self.snr_linear * self.noise_power
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_tx == 0 || self.n_rx == 0 {
            return fail("antenna counts must be positive".into());
        }
        if self.n_streams == 0 || self.n_streams > self.n_rf || self.n_rf > self.n_rx {
            return fail(format!(
                "need 1 <= N_s <= N_RF <= N_r, got N_s={} N_RF={} N_r={}",
                self.n_streams, self.n_rf, self.n_rx
            ));
        }
        if self.n_streams > self.n_tx {
            return fail(format!("N_s={} exceeds N_t={}", self.n_streams, self.n_tx));
        }
        if self.n_subcarriers == 0 {
            return fail("K must be at least 1".into());
        }
        if !(self.bandwidth_hz > 0.0) {
            return fail(format!("bandwidth must be positive, got {}", self.bandwidth_hz));
        }
        if !(self.carrier_hz > self.bandwidth_hz / 2.0) {
            return fail("carrier must exceed half the bandwidth".into());
        }
        if self.n_clusters == 0 || self.cp_length == 0 {
            return fail("cluster count and CP length must be positive".into());
        }
        if !(self.snr_linear > 0.0) || !(self.noise_power > 0.0) {
            return fail("SNR and noise power must be positive".into());
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return fail(format!("roll-off must lie in (0, 1], got {}", self.rolloff));
        }
        if !(self.antenna_spacing > 0.0) {
            return fail("antenna spacing must be positive".into());
        }
        Ok(())
    }
}

pub fn default_cp_length(k: usize) -> usize {
    (k / 4).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub gain: Complex64,
    pub delay_s: f64,
    pub aoa_rad: f64,
    pub aod_rad: f64,
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub clusters: Vec<ClusterParams>,
    pub subcarrier_channels: Vec<ComplexMatrix>,
}

impl ChannelRealization {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> Self {
        let clusters = draw_clusters(rng, cfg);
        let subcarrier_channels = subcarrier_channels(&clusters, cfg);
        ChannelRealization {
            clusters,
            subcarrier_channels,
        }
    }
}

/// Center frequency of subcarrier `k` (1-based).
pub fn subcarrier_frequency(k: usize, cfg: &SystemConfig) -> Result<f64> {
    let n = cfg.n_subcarriers;
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    Ok(subcarrier_frequency_unchecked(k, cfg))
}

fn subcarrier_frequency_unchecked(k: usize, cfg: &SystemConfig) -> f64 {
    let n = cfg.n_subcarriers as f64;
    cfg.carrier_hz + (k as f64 - (n + 1.0) / 2.0) * cfg.bandwidth_hz / n
}

/// ULA response at frequency `f`; element `n` is `exp(-j 2 pi n psi f / f_c)`
/// with `psi = spacing * sin(theta)`.
pub fn steering_vector(
    theta: f64,
    f: f64,
    n_ant: usize,
    spacing: f64,
    carrier_hz: f64,
) -> DVector<Complex64> {
    let phase = -2.0 * PI * spacing * theta.sin() * f / carrier_hz;
    DVector::from_fn(n_ant, |n, _| Complex64::from_polar(1.0, phase * n as f64))
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Raised-cosine pulse sampled at `t` seconds.
pub fn pulse_shape(t: f64, sample_period: f64, beta: f64) -> f64 {
    let x = t / sample_period;
    let edge = 1.0 / (2.0 * beta);
    if ((x.abs() - edge) / edge).abs() < 1e-12 {
        return PI / 4.0 * sinc(edge);
    }
    let bx = 2.0 * beta * x;
    sinc(x) * (PI * beta * x).cos() / (1.0 - bx * bx)
}

/// Draws `L` clusters: CN(0,1) gains, delays uniform on `[0, (D-1) T_s]`,
/// AoA/AoD uniform on `[0, 2 pi)`.
pub fn draw_clusters<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> Vec<ClusterParams> {
    let max_delay = (cfg.cp_length.saturating_sub(1)) as f64 * cfg.sample_period();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    (0..cfg.n_clusters)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let delay_s = max_delay * rng.random::<f64>();
            let aoa_rad = 2.0 * PI * rng.random::<f64>();
            let aod_rad = 2.0 * PI * rng.random::<f64>();
            ClusterParams {
                gain: Complex64::new(re * half, im * half),
                delay_s,
                aoa_rad,
                aod_rad,
            }
        })
        .collect()
}

fn gain_scale(cfg: &SystemConfig, n_clusters: usize) -> f64 {
    if cfg.normalize_gain {
        ((cfg.n_tx * cfg.n_rx) as f64 / n_clusters.max(1) as f64).sqrt()
    } else {
        1.0
    }
}

fn outer_accumulate(h: &mut ComplexMatrix, coef: Complex64, ar: &DVector<Complex64>, at: &DVector<Complex64>) {
    for (j, atj) in at.iter().enumerate() {
        let cj = coef * atj.conj();
        for (i, ari) in ar.iter().enumerate() {
            h[(i, j)] += ari * cj;
        }
    }
}

/// Delay-domain tap `d` of the channel at frequency `f`.
pub fn channel_tap(clusters: &[ClusterParams], d: usize, f: f64, cfg: &SystemConfig) -> ComplexMatrix {
    let ts = cfg.sample_period();
    let scale = gain_scale(cfg, clusters.len());
    let mut h = ComplexMatrix::zeros(cfg.n_rx, cfg.n_tx);
    for c in clusters {
        let p = pulse_shape(d as f64 * ts - c.delay_s, ts, cfg.rolloff);
        if p == 0.0 {
            continue;
        }
        let ar = steering_vector(c.aoa_rad, f, cfg.n_rx, cfg.antenna_spacing, cfg.carrier_hz);
        let at = steering_vector(c.aod_rad, f, cfg.n_tx, cfg.antenna_spacing, cfg.carrier_hz);
        outer_accumulate(&mut h, c.gain * p * scale, &ar, &at);
    }
    h
}

/// Frequency-domain channel of every subcarrier, `H_k = sum_d H_{f_k}[d] e^{-j 2 pi k d / K}`.
///
/// Taps depend on `f_k`, so each subcarrier re-evaluates the array responses;
/// the per-cluster delay sum is folded into one scalar before the outer product.
pub fn subcarrier_channels(clusters: &[ClusterParams], cfg: &SystemConfig) -> Vec<ComplexMatrix> {
    let k_total = cfg.n_subcarriers;
    let ts = cfg.sample_period();
    let scale = gain_scale(cfg, clusters.len());
    // pulse samples are frequency independent
    let pulses: Vec<Vec<f64>> = clusters
        .iter()
        .map(|c| {
            (0..cfg.cp_length)
                .map(|d| pulse_shape(d as f64 * ts - c.delay_s, ts, cfg.rolloff))
                .collect()
        })
        .collect();

    (1..=k_total)
        .map(|k| {
            let f = subcarrier_frequency_unchecked(k, cfg);
            let mut h = ComplexMatrix::zeros(cfg.n_rx, cfg.n_tx);
            for (c, taps) in clusters.iter().zip(&pulses) {
                let mut acc = Complex64::new(0.0, 0.0);
                for (d, &p) in taps.iter().enumerate() {
                    let angle = -2.0 * PI * ((k * d) % k_total) as f64 / k_total as f64;
                    acc += Complex64::from_polar(p, angle);
                }
                let ar = steering_vector(c.aoa_rad, f, cfg.n_rx, cfg.antenna_spacing, cfg.carrier_hz);
                let at = steering_vector(c.aod_rad, f, cfg.n_tx, cfg.antenna_spacing, cfg.carrier_hz);
                outer_accumulate(&mut h, c.gain * acc * scale, &ar, &at);
            }
            h
        })
        .collect()
}

/// Normalized array gain `|a(focus, f_design)^H a(phi, f_eval)| / N` over a grid.
pub fn beam_pattern(
    focus: f64,
    f_design: f64,
    f_eval: f64,
    n_ant: usize,
    angle_grid: &[f64],
    spacing: f64,
    carrier_hz: f64,
) -> Vec<f64> {
    let weights = steering_vector(focus, f_design, n_ant, spacing, carrier_hz);
    angle_grid
        .iter()
        .map(|&phi| {
            let a = steering_vector(phi, f_eval, n_ant, spacing, carrier_hz);
            weights.dotc(&a).norm() / n_ant as f64
        })
        .collect()
}

/// `n` evenly spaced angles strictly inside `(-pi/2, pi/2)`.
pub fn open_angle_grid(n: usize) -> Vec<f64> {
    let step = PI / (n + 1) as f64;
    (1..=n).map(|i| -FRAC_PI_2 + i as f64 * step).collect()
}
