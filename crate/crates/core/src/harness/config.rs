//! TOML experiment files. Sections: `[system]`, `[experiment]`, `[power]`,
//! `[tabu]`, `[pga]`. Unknown keys are rejected. Precedence when building a
//! spec is command-line flags over file values over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::powermodel::DevicePowers;

use super::{parse_schemes, ExperimentSpec, TabuOverrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Small,
    Large,
}

impl Preset {
    pub fn config(self) -> SystemConfig {
        match self {
            Preset::Small => SystemConfig::small_preset(),
            Preset::Large => SystemConfig::large_preset(),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "small" => Ok(Preset::Small),
            "large" => Ok(Preset::Large),
            other => Err(Error::Config(format!("unknown preset {other:?} (expected small or large)"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub preset: Option<String>,
    pub n_tx: Option<usize>,
    pub n_rx: Option<usize>,
    pub n_rf: Option<usize>,
    pub n_streams: Option<usize>,
    pub n_subcarriers: Option<usize>,
    pub bandwidth_hz: Option<f64>,
    pub carrier_hz: Option<f64>,
    pub n_clusters: Option<usize>,
    pub cp_length: Option<usize>,
    pub antenna_spacing: Option<f64>,
    pub snr_db: Option<f64>,
    pub noise_power: Option<f64>,
    pub rolloff: Option<f64>,
    pub normalize_gain: Option<bool>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub sweep_axis: Option<String>,
    pub sweep_values: Option<Vec<f64>>,
    pub schemes: Option<Vec<String>>,
    pub n_trials: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub record_timing: Option<bool>,
    pub common_channels: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PgaSection {
    pub step_scale: Option<f64>,
    pub max_iterations: Option<usize>,
    pub convergence_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSection,
    pub experiment: ExperimentSection,
    pub power: Option<DevicePowers>,
    pub tabu: TabuOverrides,
    pub pga: PgaSection,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Layers this file over `spec`. A preset, from `preset_override` or the
    /// file, replaces the whole base scenario before individual fields apply.
    pub fn apply_to(&self, spec: &mut ExperimentSpec, preset_override: Option<Preset>) -> Result<()> {
        let file_preset = self.system.preset.as_deref().map(str::parse::<Preset>).transpose()?;
        if let Some(p) = preset_override.or(file_preset) {
            let seed = spec.base.seed;
            spec.base = SystemConfig { seed, ..p.config() };
        }
        apply_system(&self.system, &mut spec.base);

        let e = &self.experiment;
        if let Some(axis) = &e.sweep_axis {
            spec.sweep_axis = axis.parse()?;
        }
        if let Some(v) = &e.sweep_values {
            spec.sweep_values = v.clone();
        }
        if let Some(list) = &e.schemes {
            spec.schemes = parse_schemes(&list.join(","))?;
        }
        if let Some(n) = e.n_trials {
            spec.n_trials = n;
        }
        if let Some(dir) = &e.output_dir {
            spec.output_dir = dir.clone();
        }
        if let Some(t) = e.record_timing {
            spec.record_timing = t;
        }
        if let Some(c) = e.common_channels {
            spec.common_channels = c;
        }
        if let Some(p) = self.power {
            spec.power = p;
        }
        let t = &self.tabu;
        spec.tabu = TabuOverrides {
            list_length: t.list_length.or(spec.tabu.list_length),
            max_iterations: t.max_iterations.or(spec.tabu.max_iterations),
            stall_limit: t.stall_limit.or(spec.tabu.stall_limit),
            strict_improvement: t.strict_improvement.or(spec.tabu.strict_improvement),
        };
        let p = &self.pga;
        if let Some(v) = p.step_scale {
            spec.pga.step_scale = v;
        }
        if let Some(v) = p.max_iterations {
            spec.pga.max_iterations = v;
        }
        if let Some(v) = p.convergence_tol {
            spec.pga.convergence_tol = v;
        }
        Ok(())
    }
}

fn apply_system(s: &SystemSection, cfg: &mut SystemConfig) {
    if let Some(k) = s.n_subcarriers {
        *cfg = cfg.clone().with_subcarriers(k);
    }
    if let Some(v) = s.snr_db {
        *cfg = cfg.clone().with_snr_db(v);
    }
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = s.$field {
                cfg.$field = v;
            })*
        };
    }
    set!(
        n_tx,
        n_rx,
        n_rf,
        n_streams,
        bandwidth_hz,
        carrier_hz,
        n_clusters,
        cp_length,
        antenna_spacing,
        noise_power,
        rolloff,
        normalize_gain,
        seed
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Scheme, SweepAxis};

    #[test]
    fn full_file_applies_every_section() {
        let text = r#"
            [system]
            preset = "small"
            n_rx = 4
            n_subcarriers = 32
            snr_db = 20
            seed = 99

            [experiment]
            sweep_axis = "bandwidth"
            sweep_values = [1e9, 2e9]
            schemes = ["dbf", "sw-ts"]
            n_trials = 7
            output_dir = "out/x"

            [power]
            adc_mw = 100

            [tabu]
            stall_limit = 3

            [pga]
            max_iterations = 50
        "#;
        let file = ConfigFile::from_toml_str(text).unwrap();
        let mut spec = ExperimentSpec::new(SystemConfig::small_preset());
        file.apply_to(&mut spec, None).unwrap();
        assert_eq!(spec.base.n_rx, 4);
        assert_eq!((spec.base.n_subcarriers, spec.base.cp_length), (32, 8));
        assert!((spec.base.snr_linear - 100.0).abs() < 1e-9);
        assert_eq!(spec.base.seed, 99);
        assert_eq!(spec.sweep_axis, SweepAxis::Bandwidth);
        assert_eq!(spec.sweep_values, vec![1e9, 2e9]);
        assert_eq!(spec.schemes, vec![Scheme::Dbf, Scheme::SwTs]);
        assert_eq!(spec.n_trials, 7);
        assert_eq!(spec.output_dir, PathBuf::from("out/x"));
        assert_eq!(spec.power.adc_mw, 100.0);
        assert_eq!(spec.power.lna_mw, DevicePowers::default().lna_mw);
        assert_eq!(spec.tabu.stall_limit, Some(3));
        assert_eq!(spec.pga.max_iterations, 50);
    }

    #[test]
    fn explicit_cp_length_wins_over_reset() {
        let file = ConfigFile::from_toml_str("[system]\nn_subcarriers = 32\ncp_length = 5\n").unwrap();
        let mut spec = ExperimentSpec::new(SystemConfig::small_preset());
        file.apply_to(&mut spec, None).unwrap();
        assert_eq!(spec.base.cp_length, 5);
    }

    #[test]
    fn preset_override_then_file_fields() {
        let file = ConfigFile::from_toml_str("[system]\npreset = \"small\"\nn_rf = 3\n").unwrap();
        let mut spec = ExperimentSpec::new(SystemConfig::small_preset());
        file.apply_to(&mut spec, Some(Preset::Large)).unwrap();
        assert_eq!((spec.base.n_rx, spec.base.n_rf), (64, 3));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        for text in [
            "[system]\nbogus = 1\n",
            "[nope]\n",
            "[experiment]\nschemes = [\"sw-xyz\"]\n",
            "[system]\npreset = \"medium\"\n",
            "[power]\nadc = 3\n",
            "[system]\nn_rx = \"eight\"\n",
        ] {
            let res = ConfigFile::from_toml_str(text)
                .and_then(|f| f.apply_to(&mut ExperimentSpec::new(SystemConfig::small_preset()), None));
            assert!(matches!(res, Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ConfigFile::load(Path::new("/nonexistent/dir/cfg.toml")),
            Err(Error::Io { .. })
        ));
    }
}
