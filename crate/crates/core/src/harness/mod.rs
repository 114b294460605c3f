//! Seeded Monte Carlo experiments over the beamforming pipeline.
//!
//! Every `(axis value, trial)` cell draws its own channel from a seed derived
//! by hashing `(master seed, axis index, trial index)`, so a cell's rows do not
//! depend on how many other cells were run. All requested schemes are scored
//! on the same realization and precoders.

mod config;
mod csv;
mod plot;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{ChannelRealization, SystemConfig};
use crate::error::{Error, Result};
use crate::powermodel::{energy_efficiency, total_power, Architecture, DevicePowers};
use crate::rxbeam::{combiner_objective, effective_covariances, mmse_spectral_efficiency};
use crate::solvers::{
    default_initial_combiner, exhaustive_search, pga_aided_tabu, ps_baseline_combiner, random_combiner, tabu_search,
    PgaConfig, TabuConfig, MAX_EXHAUSTIVE_BITS,
};
use crate::txbeam::{dbf_spectral_efficiency, design_precoders};

pub use config::{ConfigFile, Preset};
pub use csv::{emit_csv, format_sig, parse_csv, read_csv, render_csv, CSV_HEADER};
pub use plot::{compute_beam_pattern, emit_beam_pattern_figure, BeamPatternData, BeamPatternSpec, LineChart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Dbf,
    SwEs,
    SwTs,
    SwPgaTs,
    SwRandom,
    PsBaseline,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Dbf,
        Scheme::SwEs,
        Scheme::SwTs,
        Scheme::SwPgaTs,
        Scheme::SwRandom,
        Scheme::PsBaseline,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Dbf => "dbf",
            Scheme::SwEs => "sw-es",
            Scheme::SwTs => "sw-ts",
            Scheme::SwPgaTs => "sw-pga-ts",
            Scheme::SwRandom => "sw-random",
            Scheme::PsBaseline => "ps-baseline",
        }
    }

    pub fn architecture(self) -> Architecture {
        match self {
            Scheme::Dbf => Architecture::FullyDigital,
            Scheme::PsBaseline => Architecture::PhaseShifterHybrid,
            _ => Architecture::SwitchHybrid,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.label() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// Parses a comma-separated scheme list, dropping repeats.
pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let s: Scheme = item.parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty scheme list".into()));
    }
    Ok(out)
}

/// Schemes run when none are requested. ES is opt-in because of its cost.
pub fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Dbf, Scheme::SwTs, Scheme::SwPgaTs, Scheme::SwRandom, Scheme::PsBaseline]
}

/// Swept parameter. Values are SNR in dB, bandwidth in Hz, or a subcarrier count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Snr,
    Bandwidth,
    Subcarriers,
    None,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr",
            SweepAxis::Bandwidth => "bandwidth",
            SweepAxis::Subcarriers => "subcarriers",
            SweepAxis::None => "none",
        }
    }

    fn unit_label(self) -> &'static str {
        match self {
            SweepAxis::Snr => "SNR (dB)",
            SweepAxis::Bandwidth => "bandwidth (Hz)",
            SweepAxis::Subcarriers => "subcarriers K",
            SweepAxis::None => "(no sweep)",
        }
    }

    /// Scenario for one axis point. Bandwidth changes the sample period only
    /// (the tap count stays `K/4`); a new `K` resets the tap count to `K/4`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let cfg = match self {
            SweepAxis::Snr => base.clone().with_snr_db(value),
            SweepAxis::Bandwidth => SystemConfig {
                bandwidth_hz: value,
                ..base.clone()
            },
            SweepAxis::Subcarriers => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= 1e6) {
                    return Err(Error::Config(format!("subcarrier count must be a positive integer, got {value}")));
                }
                base.clone().with_subcarriers(value as usize)
            }
            SweepAxis::None => base.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "snr" => Ok(SweepAxis::Snr),
            "bandwidth" => Ok(SweepAxis::Bandwidth),
            "subcarriers" => Ok(SweepAxis::Subcarriers),
            "none" => Ok(SweepAxis::None),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// Partial tabu settings; unset fields take the dimension-scaled defaults.
#[derive(Debug, Clone, Default, PartialEq, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TabuOverrides {
    pub list_length: Option<usize>,
    pub max_iterations: Option<usize>,
    pub stall_limit: Option<usize>,
    pub strict_improvement: Option<bool>,
}

impl TabuOverrides {
    pub fn resolve(&self, n_rx: usize, n_rf: usize) -> TabuConfig {
        let d = TabuConfig::for_dims(n_rx, n_rf);
        TabuConfig {
            list_length: self.list_length.unwrap_or(d.list_length),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            stall_limit: self.stall_limit.unwrap_or(d.stall_limit),
            strict_improvement: self.strict_improvement.unwrap_or(d.strict_improvement),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Scenario at every axis point before the swept field is applied; its
    /// `seed` is the master seed.
    pub base: SystemConfig,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub n_trials: usize,
    pub output_dir: PathBuf,
    pub power: DevicePowers,
    pub tabu: TabuOverrides,
    pub pga: PgaConfig,
    /// Measure solver wall time. Off by default so output is byte-stable.
    pub record_timing: bool,
    /// Seed every axis point of trial `t` identically, so sweep points see
    /// the same cluster draws and differ only in the swept parameter.
    pub common_channels: bool,
}

impl ExperimentSpec {
    pub fn new(base: SystemConfig) -> Self {
        ExperimentSpec {
            base,
            sweep_axis: SweepAxis::None,
            sweep_values: Vec::new(),
            schemes: default_schemes(),
            n_trials: 100,
            output_dir: PathBuf::from("results"),
            power: DevicePowers::default(),
            tabu: TabuOverrides::default(),
            pga: PgaConfig::default(),
            record_timing: false,
            common_channels: false,
        }
    }

    /// `(axis value, scenario)` for every sweep point; a single point at
    /// value 0 when there is no sweep.
    pub fn axis_points(&self) -> Result<Vec<(f64, SystemConfig)>> {
        if self.sweep_axis == SweepAxis::None {
            self.base.validate()?;
            return Ok(vec![(0.0, self.base.clone())]);
        }
        self.sweep_values
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    return Err(Error::Config(format!("sweep value {v} is not finite")));
                }
                Ok((v, self.sweep_axis.apply(&self.base, v)?))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes requested".into()));
        }
        if self.sweep_axis != SweepAxis::None && self.sweep_values.is_empty() {
            return Err(Error::Config(format!("sweep over {} needs at least one value", self.sweep_axis)));
        }
        self.power.validate()?;
        if !(self.pga.step_scale > 0.0) || self.pga.max_iterations == 0 {
            return Err(Error::Config("PGA step scale and iteration cap must be positive".into()));
        }
        let points = self.axis_points()?;
        for (_, cfg) in &points {
            let t = self.tabu.resolve(cfg.n_rx, cfg.n_rf);
            if t.list_length == 0 || t.max_iterations == 0 {
                return Err(Error::Config("tabu list length and iteration cap must be at least 1".into()));
            }
            let bits = cfg.n_rx * cfg.n_rf;
            if self.schemes.contains(&Scheme::SwEs) && bits > MAX_EXHAUSTIVE_BITS {
                return Err(Error::DimensionGuard(format!(
                    "sw-es needs N_r * N_RF <= {MAX_EXHAUSTIVE_BITS}, got {} * {} = {bits}",
                    cfg.n_rx, cfg.n_rf
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub trial: usize,
    /// bits/s/Hz
    pub se: f64,
    /// bits/s/Hz/W
    pub ee: f64,
    pub solver_evaluations: u64,
    pub wall_time_s: f64,
}

fn splitmix64(z: u64) -> u64 {
    let z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one `(axis index, trial index)` cell.
pub fn trial_seed(master: u64, axis_index: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ axis_index as u64) ^ trial as u64)
}

const CHANNEL_STREAM: u64 = 0;
const PGA_STREAM: u64 = 1;
const RANDOM_STREAM: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Outcome {
    se: f64,
    evaluations: u64,
    seconds: f64,
}

fn timed<T>(record: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = record.then(Instant::now);
    let out = f()?;
    Ok((out, start.map_or(0.0, |s| s.elapsed().as_secs_f64())))
}

/// Runs one cell: one channel draw scored by every scheme in `spec.schemes`.
pub fn run_trial(spec: &ExperimentSpec, cfg: &SystemConfig, seed: u64) -> Result<Vec<(Scheme, f64, u64, f64)>> {
    let realization = ChannelRealization::generate(&mut stream_rng(seed, CHANNEL_STREAM), cfg);
    let channels = &realization.subcarrier_channels;
    let precoders = design_precoders(channels, cfg)?;
    let noise = cfg.noise_power;
    let needs_cov = spec.schemes.iter().any(|s| !matches!(s, Scheme::Dbf | Scheme::PsBaseline));
    let cov = if needs_cov {
        Some(effective_covariances(channels, &precoders.precoders)?)
    } else {
        None
    };
    let tabu_cfg = spec.tabu.resolve(cfg.n_rx, cfg.n_rf);
    let record = spec.record_timing;

    let mut out = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let cov = || cov.as_ref().expect("covariances computed for switch schemes");
        let o = match scheme {
            Scheme::Dbf => Outcome {
                se: dbf_spectral_efficiency(channels, &precoders.precoders, noise),
                evaluations: 0,
                seconds: 0.0,
            },
            Scheme::SwEs => {
                let (r, seconds) = timed(record, || exhaustive_search(cov(), noise, cfg.n_rx, cfg.n_rf, cfg.n_streams))?;
                Outcome {
                    se: r.objective,
                    evaluations: r.evaluations,
                    seconds,
                }
            }
            Scheme::SwTs => {
                let w0 = default_initial_combiner(cfg.n_rx, cfg.n_rf, cfg.n_streams);
                let (r, seconds) = timed(record, || tabu_search(cov(), noise, &w0, cfg.n_streams, &tabu_cfg))?;
                Outcome {
                    se: r.objective,
                    evaluations: r.evaluations,
                    seconds,
                }
            }
            Scheme::SwPgaTs => {
                let mut rng = stream_rng(seed, PGA_STREAM);
                let (r, seconds) = timed(record, || {
                    pga_aided_tabu(cov(), noise, cfg.n_rf, cfg.n_streams, &tabu_cfg, &spec.pga, &mut rng)
                })?;
                Outcome {
                    se: r.objective,
                    evaluations: r.evaluations,
                    seconds,
                }
            }
            Scheme::SwRandom => {
                let mut rng = stream_rng(seed, RANDOM_STREAM);
                let (w, seconds) = timed(record, || random_combiner(&mut rng, cfg.n_rx, cfg.n_rf, cfg.n_streams))?;
                Outcome {
                    se: combiner_objective(&w, cov(), noise),
                    evaluations: 1,
                    seconds,
                }
            }
            Scheme::PsBaseline => {
                let (se, seconds) = timed(record, || {
                    let w = ps_baseline_combiner(channels, cfg.n_rf)?;
                    Ok(mmse_spectral_efficiency(&w, channels, &precoders.precoders, noise)?.0)
                })?;
                Outcome {
                    se,
                    evaluations: 0,
                    seconds,
                }
            }
        };
        out.push((scheme, o.se.max(0.0), o.evaluations, o.seconds));
    }
    Ok(out)
}

/// Rows in `(axis value, trial, scheme)` generation order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points = spec.axis_points()?;
    let mut rows = Vec::with_capacity(points.len() * spec.n_trials * spec.schemes.len());
    for (axis_index, (value, cfg)) in points.iter().enumerate() {
        let powers: HashMap<Scheme, f64> = spec
            .schemes
            .iter()
            .map(|&s| (s, total_power(s.architecture(), cfg.n_rx, cfg.n_rf, &spec.power)))
            .collect();
        for trial in 0..spec.n_trials {
            let seed_axis = if spec.common_channels { 0 } else { axis_index };
            let seed = trial_seed(spec.base.seed, seed_axis, trial);
            for (scheme, se, evaluations, seconds) in run_trial(spec, cfg, seed)? {
                let ee = energy_efficiency(se, powers[&scheme]).map_err(|e| Error::Config(e.to_string()))?;
                rows.push(ResultRow {
                    scheme,
                    axis: spec.sweep_axis,
                    axis_value: *value,
                    trial,
                    se,
                    ee,
                    solver_evaluations: evaluations,
                    wall_time_s: seconds,
                });
            }
        }
    }
    Ok(rows)
}

fn pinned(spec: &ExperimentSpec, axis: SweepAxis) -> ExperimentSpec {
    ExperimentSpec {
        sweep_axis: axis,
        ..spec.clone()
    }
}

pub fn run_snr_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_experiment(&pinned(spec, SweepAxis::Snr))
}

pub fn run_bandwidth_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_experiment(&pinned(spec, SweepAxis::Bandwidth))
}

pub fn run_subcarrier_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_experiment(&pinned(spec, SweepAxis::Subcarriers))
}

/// Per-scheme means at one axis point.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub axis_value: f64,
    pub mean_se: f64,
    pub mean_ee: f64,
    pub trials: usize,
}

/// Means grouped by `(scheme, axis value)`, sorted like the CSV.
pub fn summarize(rows: &[ResultRow]) -> Vec<SchemeSummary> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.scheme
            .label()
            .cmp(b.scheme.label())
            .then(a.axis_value.total_cmp(&b.axis_value))
            .then(a.trial.cmp(&b.trial))
    });
    let mut out: Vec<SchemeSummary> = Vec::new();
    for r in sorted {
        match out.last_mut() {
            Some(s) if s.scheme == r.scheme && s.axis_value.total_cmp(&r.axis_value).is_eq() => {
                s.mean_se += r.se;
                s.mean_ee += r.ee;
                s.trials += 1;
            }
            _ => out.push(SchemeSummary {
                scheme: r.scheme,
                axis_value: r.axis_value,
                mean_se: r.se,
                mean_ee: r.ee,
                trials: 1,
            }),
        }
    }
    for s in &mut out {
        s.mean_se /= s.trials as f64;
        s.mean_ee /= s.trials as f64;
    }
    out
}

/// Mean SE of `scheme` at `axis_value`, if present.
pub fn mean_se(summary: &[SchemeSummary], scheme: Scheme, axis_value: f64) -> Option<f64> {
    summary
        .iter()
        .find(|s| s.scheme == scheme && s.axis_value == axis_value)
        .map(|s| s.mean_se)
}

/// Mean SE against the sweep axis, one series per scheme.
pub fn se_chart(rows: &[ResultRow], axis: SweepAxis) -> LineChart {
    let summary = summarize(rows);
    let mut series: Vec<Series> = Vec::new();
    for s in &summary {
        match series.last_mut() {
            Some(last) if last.name == s.scheme.label() => last.points.push((s.axis_value, s.mean_se)),
            _ => series.push(Series {
                name: s.scheme.label().to_string(),
                points: vec![(s.axis_value, s.mean_se)],
            }),
        }
    }
    LineChart {
        title: format!("Mean spectral efficiency vs {}", axis.label()),
        x_label: axis.unit_label().to_string(),
        y_label: "SE (bits/s/Hz)".into(),
        series,
        markers: true,
    }
}

/// Writes `results.csv` and `se_vs_<axis>.svg` into `dir`.
pub fn write_outputs(rows: &[ResultRow], axis: SweepAxis, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("results.csv");
    emit_csv(rows, &csv_path)?;
    se_chart(rows, axis).write(&dir.join(format!("se_vs_{}.svg", axis.label())))?;
    Ok(csv_path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub mean: f64,
    pub min: f64,
    /// Fraction of trials with ratio at least 0.95.
    pub frac_near_optimal: f64,
    pub ratios: Vec<f64>,
}

impl RatioStats {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let n = ratios.len().max(1) as f64;
        RatioStats {
            mean: ratios.iter().sum::<f64>() / n,
            min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            frac_near_optimal: ratios.iter().filter(|&&r| r >= NEAR_OPTIMAL).count() as f64 / n,
            ratios,
        }
    }
}

pub const NEAR_OPTIMAL: f64 = 0.95;

/// Heuristic-to-optimum objective ratios over paired instances.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub trials: usize,
    pub ts: RatioStats,
    pub pga_ts: RatioStats,
}

/// Runs ES, TS and PGA-aided TS on the same instances and compares them.
pub fn oracle_compare(spec: &ExperimentSpec) -> Result<OracleSummary> {
    let spec = ExperimentSpec {
        schemes: vec![Scheme::SwEs, Scheme::SwTs, Scheme::SwPgaTs],
        ..spec.clone()
    };
    let rows = run_experiment(&spec)?;
    let mut ts = Vec::new();
    let mut pga = Vec::new();
    // generation order groups the three schemes of a cell together
    for cell in rows.chunks(3) {
        let es = cell[0].se;
        if !(es > 0.0) {
            return Err(Error::Infeasible(format!("optimal objective {es} is not positive")));
        }
        ts.push(cell[1].se / es);
        pga.push(cell[2].se / es);
    }
    Ok(OracleSummary {
        trials: ts.len(),
        ts: RatioStats::from_ratios(ts),
        pga_ts: RatioStats::from_ratios(pga),
    })
}

pub fn render_oracle_summary(s: &OracleSummary) -> String {
    let mut out = String::from("scheme,mean_ratio,min_ratio,frac_ratio_ge_0.95,trials\n");
    out.push_str(&format!("sw-es,1,1,1,{}\n", s.trials));
    for (name, r) in [("sw-ts", &s.ts), ("sw-pga-ts", &s.pga_ts)] {
        out.push_str(&format!(
            "{name},{},{},{},{}\n",
            format_sig(r.mean),
            format_sig(r.min),
            format_sig(r.frac_near_optimal),
            s.trials
        ));
    }
    out
}

pub fn write_oracle_summary(s: &OracleSummary, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("oracle_summary.csv");
    fs::write(&path, render_oracle_summary(s)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Dimensions of the scaled-down oracle comparison: 4 receive antennas, 2 RF
/// chains, 2 streams, 4 subcarriers at 10 dB.
pub fn oracle_base() -> SystemConfig {
    SystemConfig {
        n_tx: 16,
        n_rx: 4,
        n_rf: 2,
        n_streams: 2,
        ..SystemConfig::small_preset().with_subcarriers(4)
    }
    .with_snr_db(10.0)
}
