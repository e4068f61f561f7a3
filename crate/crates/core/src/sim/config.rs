//! Physical-layer constants of the sensing base station and the jammer.
//!
//! All quantities are SI and angles are radians. Unit conversion from the
//! degree/dB values used in configuration files happens in [`crate::config`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.38e-23;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Bandwidth over which the thermal noise power is integrated for each
/// post-FFT symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseBandwidth {
    /// `N0 * K * Δf`, the full sensing bandwidth.
    #[default]
    FullBand,
    /// `N0 * Δf`, a single subcarrier.
    PerSubcarrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub carrier_freq_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub num_subcarriers: usize,
    pub num_tx_antennas: usize,
    pub num_rx_antennas: usize,
    /// Transmit EIRP `P_T G_T` in watts.
    pub eirp_watts: f64,
    /// Fraction of the EIRP devoted to the sensing beam.
    pub sensing_power_fraction: f64,
    pub scan_half_angle_rad: f64,
    pub beamwidth_rad: f64,
    pub ssir_db: f64,
    pub mean_rcs_m2: f64,
    pub noise_figure_db: f64,
    pub reference_temp_k: f64,
    pub boltzmann: f64,
    pub noise_bandwidth: NoiseBandwidth,
}

impl Default for SystemConfig {
    /// 5G NR FR2 sensing setup: 28 GHz, 120 kHz spacing, 500 subcarriers,
    /// 50-element arrays, 13 dBW EIRP.
    fn default() -> Self {
        Self {
            carrier_freq_hz: 28e9,
            subcarrier_spacing_hz: 120e3,
            num_subcarriers: 500,
            num_tx_antennas: 50,
            num_rx_antennas: 50,
            eirp_watts: db_to_linear(13.0),
            sensing_power_fraction: 0.5,
            scan_half_angle_rad: 60f64.to_radians(),
            beamwidth_rad: 5.3f64.to_radians(),
            ssir_db: 20.0,
            mean_rcs_m2: 1.0,
            noise_figure_db: 8.0,
            reference_temp_k: 290.0,
            boltzmann: BOLTZMANN,
            noise_bandwidth: NoiseBandwidth::FullBand,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("eirp_watts", self.eirp_watts),
            ("scan_half_angle_rad", self.scan_half_angle_rad),
            ("beamwidth_rad", self.beamwidth_rad),
            ("mean_rcs_m2", self.mean_rcs_m2),
            ("reference_temp_k", self.reference_temp_k),
            ("boltzmann", self.boltzmann),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        for (name, value) in [
            ("num_subcarriers", self.num_subcarriers),
            ("num_tx_antennas", self.num_tx_antennas),
            ("num_rx_antennas", self.num_rx_antennas),
        ] {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.sensing_power_fraction) {
            return Err(Error::InvalidConfig(format!(
                "sensing_power_fraction must lie in [0, 1], got {}",
                self.sensing_power_fraction
            )));
        }
        if !self.ssir_db.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(Error::InvalidConfig("ssir_db and noise_figure_db must be finite".into()));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Number of beam positions needed to sweep `[-θ0, θ0]`.
    pub fn beam_steps(&self) -> usize {
        let ratio = 2.0 * self.scan_half_angle_rad / self.beamwidth_rad;
        // Guard against 22.999999 style roundoff when the ratio is integral.
        let steps = (ratio - 1e-9).ceil();
        (steps as usize).max(1)
    }

    /// Length of the real observation vector, `2K`.
    pub fn observation_len(&self) -> usize {
        2 * self.num_subcarriers
    }

    /// EIRP of the sensing beam, `ρ P_T G_T`.
    pub fn sensing_eirp_watts(&self) -> f64 {
        self.sensing_power_fraction * self.eirp_watts
    }

    pub fn self_interference_ratio(&self) -> f64 {
        10f64.powf(-self.ssir_db / 20.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JammerConfig {
    pub num_jam_antennas: usize,
    pub range_m: f64,
    pub sjr_db: f64,
    pub false_delay_s: f64,
    pub aod_spread_rad: f64,
}

impl Default for JammerConfig {
    fn default() -> Self {
        Self {
            num_jam_antennas: 10,
            range_m: 90.0,
            sjr_db: 27.0,
            false_delay_s: 0.17e-6,
            aod_spread_rad: 14f64.to_radians(),
        }
    }
}

impl JammerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_jam_antennas == 0 {
            return Err(Error::InvalidConfig("num_jam_antennas must be at least 1".into()));
        }
        if !(self.range_m.is_finite() && self.range_m > 0.0) {
            return Err(Error::InvalidConfig(format!("jammer range must be positive, got {}", self.range_m)));
        }
        if !(self.false_delay_s.is_finite() && self.false_delay_s >= 0.0) {
            return Err(Error::InvalidConfig(format!("false delay must be non-negative, got {}", self.false_delay_s)));
        }
        if !self.sjr_db.is_finite() || !(self.aod_spread_rad.is_finite() && self.aod_spread_rad >= 0.0) {
            return Err(Error::InvalidConfig("sjr_db and aod_spread_rad must be finite".into()));
        }
        Ok(())
    }

    /// Jammer EIRP `P_J G_J` implied by the signal-to-jammer ratio.
    pub fn eirp_watts(&self, cfg: &SystemConfig) -> f64 {
        cfg.sensing_eirp_watts() / db_to_linear(self.sjr_db)
    }
}
