use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swhbf::harness::{
    emit_beam_pattern_figure, oracle_base, oracle_compare, parse_schemes, run_experiment, summarize, write_oracle_summary,
    write_outputs, BeamPatternSpec, ConfigFile, ExperimentSpec, Preset, SweepAxis,
};
use swhbf::{Error, Result};

/// Switch-based hybrid beamforming experiments.
#[derive(Parser)]
#[command(name = "swhbf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of dbf,sw-es,sw-ts,sw-pga-ts,sw-random,ps-baseline.
    #[arg(long)]
    schemes: Option<String>,
    /// Base scenario: small (16x8, 2 RF chains) or large (64x64, 4 RF chains).
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated sweep values (SNR in dB, bandwidth in Hz, or K).
    #[arg(long)]
    values: Option<String>,
    /// Record solver wall time (makes results.csv run-dependent).
    #[arg(long)]
    timing: bool,
    /// Reuse each trial's channel draw at every sweep point.
    #[arg(long)]
    common_channels: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run over an SNR sweep (or the axis given by --axis / the config).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// snr, bandwidth, subcarriers or none.
        #[arg(long)]
        axis: Option<String>,
    },
    /// Spectral efficiency against signal bandwidth.
    SweepBandwidth {
        #[command(flatten)]
        common: Common,
    },
    /// Spectral efficiency against the number of subcarriers.
    SweepSubcarriers {
        #[command(flatten)]
        common: Common,
    },
    /// Beam-squint figure: array gain across frequencies for a fixed focus.
    Beampattern {
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        n_ant: usize,
        /// Focus angle in radians (default pi/6).
        #[arg(long)]
        focus: Option<f64>,
        /// Comma-separated evaluation frequencies in Hz.
        #[arg(long, default_value = "58e9,60e9,62e9")]
        freqs: String,
        #[arg(long, default_value_t = 60e9)]
        carrier: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Tabu and PGA-aided tabu against the exhaustive optimum.
    OracleCompare {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_values(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad numeric value {s:?}")))
        })
        .collect()
}

/// defaults < config file < flags
fn build_spec(mut spec: ExperimentSpec, common: &Common, axis: Option<&str>) -> Result<ExperimentSpec> {
    let preset = common.preset.as_deref().map(str::parse::<Preset>).transpose()?;
    match &common.config {
        Some(path) => ConfigFile::load(path)?.apply_to(&mut spec, preset)?,
        None => {
            if let Some(p) = preset {
                let seed = spec.base.seed;
                spec.base = swhbf::channel::SystemConfig { seed, ..p.config() };
            }
        }
    }
    if let Some(a) = axis {
        spec.sweep_axis = a.parse()?;
    }
    if let Some(v) = &common.values {
        spec.sweep_values = parse_values(v)?;
    }
    if let Some(s) = common.seed {
        spec.base.seed = s;
    }
    if let Some(n) = common.trials {
        spec.n_trials = n;
    }
    if let Some(o) = &common.out {
        spec.output_dir = o.clone();
    }
    if let Some(s) = &common.schemes {
        spec.schemes = parse_schemes(s)?;
    }
    if common.timing {
        spec.record_timing = true;
    }
    if common.common_channels {
        spec.common_channels = true;
    }
    Ok(spec)
}

fn sweep_defaults(axis: SweepAxis, values: &[f64]) -> ExperimentSpec {
    ExperimentSpec {
        sweep_axis: axis,
        sweep_values: values.to_vec(),
        ..ExperimentSpec::new(Preset::Small.config())
    }
}

fn run_and_write(spec: &ExperimentSpec) -> Result<()> {
    let rows = run_experiment(spec)?;
    let path = write_outputs(&rows, spec.sweep_axis, &spec.output_dir)?;
    println!("{:<12} {:>14} {:>12} {:>14}", "scheme", spec.sweep_axis.label(), "mean SE", "mean EE");
    for s in summarize(&rows) {
        println!(
            "{:<12} {:>14} {:>12.4} {:>14.4}",
            s.scheme.label(),
            swhbf::harness::format_sig(s.axis_value),
            s.mean_se,
            s.mean_ee
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, axis } => {
            let defaults = sweep_defaults(SweepAxis::Snr, &[-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]);
            run_and_write(&build_spec(defaults, &common, axis.as_deref())?)
        }
        Command::SweepBandwidth { common } => {
            let defaults = sweep_defaults(SweepAxis::Bandwidth, &[0.5e9, 1e9, 2e9, 4e9]);
            let spec = build_spec(defaults, &common, None)?;
            run_and_write(&ExperimentSpec {
                sweep_axis: SweepAxis::Bandwidth,
                ..spec
            })
        }
        Command::SweepSubcarriers { common } => {
            let defaults = sweep_defaults(SweepAxis::Subcarriers, &[16.0, 32.0, 64.0, 128.0]);
            let spec = build_spec(defaults, &common, None)?;
            run_and_write(&ExperimentSpec {
                sweep_axis: SweepAxis::Subcarriers,
                ..spec
            })
        }
        Command::Beampattern {
            out,
            n_ant,
            focus,
            freqs,
            carrier,
            points,
        } => {
            let spec = BeamPatternSpec {
                n_ant,
                carrier_hz: carrier,
                focus_rad: focus.unwrap_or(std::f64::consts::PI / 6.0),
                frequencies_hz: parse_values(&freqs)?,
                grid_points: points,
                ..BeamPatternSpec::default()
            };
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            let svg = out.join("beam_pattern.svg");
            let data = emit_beam_pattern_figure(&spec, &svg)?;
            for (i, (f, _)) in data.curves.iter().enumerate() {
                println!("{:>8.3} GHz  peak at {:+.5} rad", f / 1e9, data.peak_angle(i));
            }
            println!("wrote {}", svg.display());
            Ok(())
        }
        Command::OracleCompare { common } => {
            let defaults = ExperimentSpec {
                n_trials: 50,
                ..ExperimentSpec::new(oracle_base())
            };
            let spec = build_spec(defaults, &common, None)?;
            let summary = oracle_compare(&spec)?;
            println!("{:<10} {:>10} {:>10} {:>14}", "scheme", "mean", "min", "frac >= 0.95");
            for (name, r) in [("sw-ts", &summary.ts), ("sw-pga-ts", &summary.pga_ts)] {
                println!("{name:<10} {:>10.5} {:>10.5} {:>14.3}", r.mean, r.min, r.frac_near_optimal);
            }
            let path = write_oracle_summary(&summary, &spec.output_dir)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) => 2,
        Error::DimensionGuard(_) => 3,
        Error::Io { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
