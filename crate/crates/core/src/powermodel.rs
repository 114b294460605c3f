//! Receiver power consumption and energy efficiency. All powers are in mW.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-device power draw in milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DevicePowers {
    pub lna_mw: f64,
    pub splitter_mw: f64,
    pub combiner_mw: f64,
    pub phase_shifter_mw: f64,
    pub switch_mw: f64,
    pub mixer_mw: f64,
    pub lo_mw: f64,
    pub lpf_mw: f64,
    pub bb_amp_mw: f64,
    pub adc_mw: f64,
}

impl Default for DevicePowers {
    fn default() -> Self {
        DevicePowers {
            lna_mw: 39.0,
            splitter_mw: 19.5,
            combiner_mw: 19.5,
            phase_shifter_mw: 30.0,
            switch_mw: 5.0,
            mixer_mw: 19.0,
            lo_mw: 5.0,
            lpf_mw: 14.0,
            bb_amp_mw: 5.0,
            adc_mw: 240.0,
        }
    }
}

impl DevicePowers {
    pub fn zero() -> Self {
        DevicePowers {
            lna_mw: 0.0,
            splitter_mw: 0.0,
            combiner_mw: 0.0,
            phase_shifter_mw: 0.0,
            switch_mw: 0.0,
            mixer_mw: 0.0,
            lo_mw: 0.0,
            lpf_mw: 0.0,
            bb_amp_mw: 0.0,
            adc_mw: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.lna_mw,
            self.splitter_mw,
            self.combiner_mw,
            self.phase_shifter_mw,
            self.switch_mw,
            self.mixer_mw,
            self.lo_mw,
            self.lpf_mw,
            self.bb_amp_mw,
            self.adc_mw,
        ];
        if all.iter().all(|p| *p >= 0.0 && p.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("device powers must be finite and non-negative".into()))
        }
    }

    #[cfg(test)]
    fn scaled(&self, s: f64) -> Self {
        DevicePowers {
            lna_mw: self.lna_mw * s,
            splitter_mw: self.splitter_mw * s,
            combiner_mw: self.combiner_mw * s,
            phase_shifter_mw: self.phase_shifter_mw * s,
            switch_mw: self.switch_mw * s,
            mixer_mw: self.mixer_mw * s,
            lo_mw: self.lo_mw * s,
            lpf_mw: self.lpf_mw * s,
            bb_amp_mw: self.bb_amp_mw * s,
            adc_mw: self.adc_mw * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    FullyDigital,
    PhaseShifterHybrid,
    SwitchHybrid,
}

/// Mixer + local oscillator + low-pass filter + baseband amplifier.
pub fn rf_chain_power(p: &DevicePowers) -> f64 {
    p.mixer_mw + p.lo_mw + p.lpf_mw + p.bb_amp_mw
}

/// Total receiver power in mW. `n_rf` is ignored for the fully digital case.
pub fn total_power(arch: Architecture, n_rx: usize, n_rf: usize, p: &DevicePowers) -> f64 {
    let nr = n_rx as f64;
    let nrf = n_rf as f64;
    let p_rf = rf_chain_power(p);
    let back_end = nrf * (p_rf + p.combiner_mw + 2.0 * p.adc_mw);
    match arch {
        Architecture::FullyDigital => nr * (p.lna_mw + p_rf + 2.0 * p.adc_mw),
        Architecture::PhaseShifterHybrid => nr * (p.lna_mw + p.splitter_mw + nrf * p.phase_shifter_mw) + back_end,
        Architecture::SwitchHybrid => nr * (p.lna_mw + p.splitter_mw + nrf * p.switch_mw) + back_end,
    }
}

/// Spectral efficiency per watt.
pub fn energy_efficiency(se: f64, total_power_mw: f64) -> Result<f64> {
    if !(total_power_mw > 0.0) {
        return Err(Error::InvalidInput(format!(
            "total power must be positive, got {total_power_mw} mW"
        )));
    }
    Ok(se / (total_power_mw / 1000.0))
}
