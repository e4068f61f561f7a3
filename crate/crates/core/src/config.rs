//! Run configuration file.
//!
//! TOML with one section per configuration type. Angles are given in
//! degrees and powers in dB; they are converted to radians and linear units
//! once, by [`RunConfig::system`] and [`RunConfig::jammer`]. Every omitted
//! key falls back to the 28 GHz reference setup.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::NullMethod;
use crate::error::{Error, Result};
use crate::sim::config::{db_to_linear, linear_to_db};
use crate::sim::{JammerConfig, NoiseBandwidth, SystemConfig};
use crate::vae::{AeArchitecture, TrainConfig, VaeArchitecture};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub carrier_freq_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub num_subcarriers: usize,
    pub num_tx_antennas: usize,
    pub num_rx_antennas: usize,
    pub eirp_dbw: f64,
    pub sensing_power_fraction: f64,
    pub scan_half_angle_deg: f64,
    pub beamwidth_deg: f64,
    pub ssir_db: f64,
    pub mean_rcs_m2: f64,
    pub noise_figure_db: f64,
    pub reference_temp_k: f64,
    pub boltzmann: f64,
    pub noise_bandwidth: NoiseBandwidth,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self::from(&SystemConfig::default())
    }
}

impl From<&SystemConfig> for SystemSection {
    fn from(c: &SystemConfig) -> Self {
        Self {
            carrier_freq_hz: c.carrier_freq_hz,
            subcarrier_spacing_hz: c.subcarrier_spacing_hz,
            num_subcarriers: c.num_subcarriers,
            num_tx_antennas: c.num_tx_antennas,
            num_rx_antennas: c.num_rx_antennas,
            eirp_dbw: round_db(linear_to_db(c.eirp_watts)),
            sensing_power_fraction: c.sensing_power_fraction,
            scan_half_angle_deg: round_deg(c.scan_half_angle_rad.to_degrees()),
            beamwidth_deg: round_deg(c.beamwidth_rad.to_degrees()),
            ssir_db: c.ssir_db,
            mean_rcs_m2: c.mean_rcs_m2,
            noise_figure_db: c.noise_figure_db,
            reference_temp_k: c.reference_temp_k,
            boltzmann: c.boltzmann,
            noise_bandwidth: c.noise_bandwidth,
        }
    }
}

// Unit round trips lose the last ulp; snap back to the short decimal.
fn round_db(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn round_deg(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

impl SystemSection {
    pub fn to_config(&self) -> SystemConfig {
        SystemConfig {
            carrier_freq_hz: self.carrier_freq_hz,
            subcarrier_spacing_hz: self.subcarrier_spacing_hz,
            num_subcarriers: self.num_subcarriers,
            num_tx_antennas: self.num_tx_antennas,
            num_rx_antennas: self.num_rx_antennas,
            eirp_watts: db_to_linear(self.eirp_dbw),
            sensing_power_fraction: self.sensing_power_fraction,
            scan_half_angle_rad: self.scan_half_angle_deg.to_radians(),
            beamwidth_rad: self.beamwidth_deg.to_radians(),
            ssir_db: self.ssir_db,
            mean_rcs_m2: self.mean_rcs_m2,
            noise_figure_db: self.noise_figure_db,
            reference_temp_k: self.reference_temp_k,
            boltzmann: self.boltzmann,
            noise_bandwidth: self.noise_bandwidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammerSection {
    pub num_jam_antennas: usize,
    pub range_m: f64,
    pub sjr_db: f64,
    pub false_delay_us: f64,
    pub aod_spread_deg: f64,
}

impl Default for JammerSection {
    fn default() -> Self {
        Self { num_jam_antennas: 10, range_m: 90.0, sjr_db: 27.0, false_delay_us: 0.17, aod_spread_deg: 14.0 }
    }
}

impl JammerSection {
    pub fn to_config(&self) -> JammerConfig {
        JammerConfig {
            num_jam_antennas: self.num_jam_antennas,
            range_m: self.range_m,
            sjr_db: self.sjr_db,
            false_delay_s: self.false_delay_us * 1e-6,
            aod_spread_rad: self.aod_spread_deg.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeSection {
    pub hidden: Vec<usize>,
    pub latent_dim: usize,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for VaeSection {
    fn default() -> Self {
        let arch = VaeArchitecture::reference(0);
        Self { hidden: arch.hidden, latent_dim: arch.latent_dim, train: TrainConfig::vae_reference() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeSection {
    pub hidden: Vec<usize>,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for AeSection {
    fn default() -> Self {
        Self { hidden: AeArchitecture::reference(0).hidden, train: TrainConfig::ae_reference() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(deserialize_with = "overlay")]
    pub vae: VaeSection,
    #[serde(deserialize_with = "overlay")]
    pub ae: AeSection,
}

// The VAE and AE share field names but not defaults, so a partial table is
// laid over the model's own default rather than deserialised directly.
fn overlay<'de, D, T>(deserializer: D) -> std::result::Result<T, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Default + Serialize + serde::de::DeserializeOwned,
{
    use serde::de::Error as _;
    let given = toml::Table::deserialize(deserializer)?;
    let mut table = toml::Table::try_from(T::default()).map_err(D::Error::custom)?;
    for (key, value) in given {
        if !table.contains_key(&key) {
            return Err(D::Error::custom(format!("unknown field `{key}`")));
        }
        table.insert(key, value);
    }
    table.try_into().map_err(D::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub sjr_db: Vec<f64>,
    pub latent_dims: Vec<usize>,
    pub pfa: Vec<f64>,
    pub train_count: usize,
    pub test_count: usize,
    pub train_seed: u64,
    pub test_seed: u64,
    pub score_seed: u64,
    pub null_method: NullMethod,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            sjr_db: vec![21.0, 24.0, 27.0, 30.0],
            latent_dims: vec![5, 10, 15, 20],
            pfa: vec![0.05],
            train_count: 57_500,
            test_count: 4_600,
            train_seed: 1,
            test_seed: 2,
            score_seed: 4,
            null_method: NullMethod::Empirical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub dataset_dir: PathBuf,
    pub checkpoint_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self::under(Path::new("runs"))
    }
}

impl PathsSection {
    pub fn under(root: &Path) -> Self {
        Self {
            dataset_dir: root.join("datasets"),
            checkpoint_dir: root.join("checkpoints"),
            output_dir: root.join("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub jammer: JammerSection,
    pub training: TrainingSection,
    pub experiment: ExperimentSection,
    pub paths: PathsSection,
}

impl RunConfig {
    /// Reduced setup for quick end-to-end runs: K = 64, 16-element arrays,
    /// 4000 training observations, 300 epochs, L = 8 and correspondingly
    /// narrower networks.
    pub fn desk_scale() -> Self {
        let mut cfg = Self::default();
        cfg.system.num_subcarriers = 64;
        cfg.system.num_tx_antennas = 16;
        cfg.system.num_rx_antennas = 16;
        cfg.training.vae.hidden = vec![96, 64, 32, 16, 8];
        cfg.training.vae.latent_dim = 8;
        cfg.training.vae.train.epochs = 300;
        cfg.training.vae.train.batch_size = 32;
        cfg.training.ae.hidden = vec![96, 64, 48, 32, 16, 8];
        cfg.training.ae.train.epochs = 300;
        cfg.training.ae.train.batch_size = 16;
        cfg.experiment.train_count = 4000;
        cfg.experiment.test_count = 4600;
        cfg.experiment.sjr_db = vec![0.0, 5.0, 10.0, 20.0, 30.0];
        cfg.experiment.latent_dims = vec![4, 8, 16];
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn system(&self) -> SystemConfig {
        self.system.to_config()
    }

    pub fn jammer(&self) -> JammerConfig {
        self.jammer.to_config()
    }

    pub fn jammer_at(&self, sjr_db: f64) -> JammerConfig {
        JammerConfig { sjr_db, ..self.jammer() }
    }

    pub fn vae_architecture(&self, latent_dim: Option<usize>) -> VaeArchitecture {
        VaeArchitecture {
            input_dim: self.system().observation_len(),
            hidden: self.training.vae.hidden.clone(),
            latent_dim: latent_dim.unwrap_or(self.training.vae.latent_dim),
        }
    }

    pub fn ae_architecture(&self) -> AeArchitecture {
        AeArchitecture { input_dim: self.system().observation_len(), hidden: self.training.ae.hidden.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.system().validate()?;
        self.jammer().validate()?;
        self.training.vae.train.validate()?;
        self.training.ae.train.validate()?;
        let e = &self.experiment;
        if e.sjr_db.is_empty() || e.latent_dims.is_empty() || e.pfa.is_empty() {
            return Err(Error::InvalidConfig("experiment lists must not be empty".into()));
        }
        if e.latent_dims.contains(&0) || self.training.vae.latent_dim == 0 {
            return Err(Error::InvalidConfig("latent dimensions must be positive".into()));
        }
        for &p in &e.pfa {
            crate::detect::threshold::check_probability(p)?;
        }
        if e.train_count == 0 || e.test_count < 2 {
            return Err(Error::InvalidConfig("dataset sizes too small".into()));
        }
        if self.training.vae.hidden.contains(&0)
            || self.training.ae.hidden.contains(&0)
            || self.training.ae.hidden.is_empty()
        {
            return Err(Error::InvalidConfig("hidden layer widths must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_setup() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.system(), SystemConfig::default());
        let jam = cfg.jammer();
        let reference = JammerConfig::default();
        assert_eq!(jam.num_jam_antennas, reference.num_jam_antennas);
        assert!((jam.false_delay_s - reference.false_delay_s).abs() < 1e-20);
        assert!((jam.aod_spread_rad - reference.aod_spread_rad).abs() < 1e-15);
        assert_eq!(cfg.training.vae.train, TrainConfig::vae_reference());
        assert_eq!(cfg.training.ae.train, TrainConfig::ae_reference());
        assert_eq!(cfg.training.vae.hidden, vec![728, 256, 64, 32, 10]);
        assert_eq!(cfg.training.ae.hidden, vec![728, 512, 256, 128, 64, 32, 10]);
        assert_eq!(cfg.experiment.latent_dims, vec![5, 10, 15, 20]);
        assert_eq!((cfg.experiment.train_count, cfg.experiment.test_count), (57_500, 4_600));
    }

    #[test]
    fn partial_training_table_keeps_model_defaults() {
        let cfg = RunConfig::from_toml("[training.ae]\nepochs = 5\n[training.vae]\nlatent_dim = 3\n").unwrap();
        assert_eq!(cfg.training.ae.train.epochs, 5);
        assert_eq!(cfg.training.ae.train.learning_rate, 0.001);
        assert_eq!(cfg.training.ae.train.batch_size, 200);
        assert_eq!(cfg.training.vae.latent_dim, 3);
        assert_eq!(cfg.training.vae.train.learning_rate, 0.005);
    }

    #[test]
    fn degrees_and_db_are_converted() {
        let cfg = RunConfig::from_toml("[system]\nbeamwidth_deg = 10.0\neirp_dbw = 0.0\n").unwrap();
        let sys = cfg.system();
        assert!((sys.beamwidth_rad - 10f64.to_radians()).abs() < 1e-15);
        assert_eq!(sys.eirp_watts, 1.0);
        assert_eq!(sys.beam_steps(), 12);
    }

    #[test]
    fn serialised_config_round_trips() {
        for cfg in [RunConfig::default(), RunConfig::desk_scale()] {
            let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn unknown_keys_and_empty_lists_are_rejected() {
        assert!(RunConfig::from_toml("[system]\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("[training.ae]\nlatent_dim = 3\n").is_err());
        assert!(RunConfig::from_toml("[experiment]\nsjr_db = []\n").is_err());
        assert!(RunConfig::from_toml("[experiment]\npfa = [1.5]\n").is_err());
    }

    #[test]
    fn desk_scale_values() {
        let cfg = RunConfig::desk_scale();
        let sys = cfg.system();
        assert_eq!((sys.num_subcarriers, sys.num_tx_antennas, sys.num_rx_antennas), (64, 16, 16));
        assert_eq!(cfg.experiment.train_count, 4000);
        assert_eq!(cfg.training.vae.train.epochs, 300);
        assert_eq!(cfg.training.vae.latent_dim, 8);
        assert!(cfg.validate().is_ok());
    }
}
