//! Post-FFT, spatially combined, reciprocal-filtered observations and labelled datasets.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::array::{dot, jammer_beamformer, rx_combiner, steering_vector, tx_beamformer};
use super::channel::{jammer_gain, noise_std, target_gain};
use super::config::{JammerConfig, SystemConfig};
use super::scenario::{draw_scenario, ScenarioDraw};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Target echo only.
    H0,
    /// Target echo plus deceptive jammer.
    H1,
}

impl Label {
    pub fn as_byte(self) -> u8 {
        match self {
            Label::H0 => 0,
            Label::H1 => 1,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Label::H0),
            1 => Ok(Label::H1),
            other => Err(Error::Format(format!("invalid label byte {other}"))),
        }
    }
}

/// Unit-modulus QPSK symbols `x_{k,n}` for one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    symbols: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn random_qpsk<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let symbols = (0..k)
            .map(|_| {
                let re = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                let im = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                Complex64::new(re, im)
            })
            .collect();
        Self { symbols }
    }

    /// Rejects symbols that are not unit modulus.
    pub fn from_symbols(symbols: Vec<Complex64>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|s| (s.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidConfig(format!("symbol {bad} is not unit modulus")));
        }
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Which of the four contributions to `g_{k,n}` are synthesised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalTerms {
    pub target: bool,
    pub jammer: bool,
    pub self_interference: bool,
    pub noise: bool,
}

impl Default for SignalTerms {
    fn default() -> Self {
        Self { target: true, jammer: true, self_interference: true, noise: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// 1-based observation index `n`.
    pub index: usize,
    pub label: Label,
    pub beam_angle_rad: f64,
    /// `K` real parts followed by `K` imaginary parts.
    pub g: Vec<f64>,
    /// Generating state; absent when the observation was loaded from disk.
    pub scenario: Option<ScenarioDraw>,
}

fn split_re_im(values: &[Complex64]) -> Vec<f64> {
    values.iter().map(|c| c.re).chain(values.iter().map(|c| c.im)).collect()
}

/// Complex reciprocal-filtered grid `g_{k,n}`, `k = 1..=K`.
pub fn synth_complex<R: Rng + ?Sized>(
    scn: &ScenarioDraw,
    symbols: &SymbolGrid,
    cfg: &SystemConfig,
    jcfg: &JammerConfig,
    terms: SignalTerms,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let k_count = cfg.num_subcarriers;
    if symbols.len() != k_count {
        return Err(Error::DimensionMismatch { expected: k_count, actual: symbols.len() });
    }
    let n_rx = cfg.num_rx_antennas;
    let delta_f = cfg.subcarrier_spacing_hz;

    let w_r = rx_combiner(scn.beam_angle_rad, n_rx);
    let w_t = tx_beamformer(scn.beam_angle_rad, cfg);

    let alpha_t = target_gain(scn.target_range_m, scn.target_rcs_m2, cfg)?;
    let target_coeff = if terms.target {
        let rx = dot(&w_r, &steering_vector(scn.target_angle_rad, n_rx));
        let tx = dot(&steering_vector(scn.target_angle_rad, cfg.num_tx_antennas), &w_t);
        Complex64::from_polar(alpha_t, scn.target_phase_rad) * rx * tx
    } else {
        Complex64::new(0.0, 0.0)
    };

    let (jammer_coeff, jammer_delay) = match (&scn.jammer, terms.jammer) {
        (Some(j), true) => {
            let alpha_j = jammer_gain(jcfg, cfg)?;
            let w_j = jammer_beamformer(j.steer_rad, jcfg, cfg);
            let rx = dot(&w_r, &steering_vector(j.aoa_rad, n_rx));
            let tx = dot(&steering_vector(j.aod_rad, jcfg.num_jam_antennas), &w_j);
            (Complex64::from_polar(alpha_j, j.phase_rad) * rx * tx, j.delay_s + jcfg.false_delay_s)
        }
        _ => (Complex64::new(0.0, 0.0), 0.0),
    };

    // The symbol cancels in w_Rᵀ ν / x, so self-interference is flat across subcarriers.
    let si = if terms.self_interference {
        let alpha_si = alpha_t * cfg.self_interference_ratio();
        let summed: Complex64 =
            w_r.iter().zip(&scn.si_phases_rad).map(|(w, &phi)| w * Complex64::from_polar(1.0, phi)).sum();
        summed * alpha_si
    } else {
        Complex64::new(0.0, 0.0)
    };

    let noise_scale = noise_std(cfg) * FRAC_1_SQRT_2;
    let mut g = Vec::with_capacity(k_count);
    for (idx, x) in symbols.symbols().iter().enumerate() {
        let k = (idx + 1) as f64;
        let mut value = si;
        if terms.target {
            value += target_coeff * Complex64::from_polar(1.0, -2.0 * PI * k * delta_f * scn.target_delay_s);
        }
        if terms.jammer && scn.jammer.is_some() {
            value += jammer_coeff * Complex64::from_polar(1.0, -2.0 * PI * k * delta_f * jammer_delay);
        }
        if terms.noise {
            let combined: Complex64 = w_r
                .iter()
                .map(|w| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    w * Complex64::new(re, im) * noise_scale
                })
                .sum();
            value += combined / x;
        }
        g.push(value);
    }
    Ok(g)
}

pub fn synth_observation<R: Rng + ?Sized>(
    scn: &ScenarioDraw,
    symbols: &SymbolGrid,
    cfg: &SystemConfig,
    jcfg: &JammerConfig,
    rng: &mut R,
) -> Result<Observation> {
    synth_observation_with(scn, symbols, cfg, jcfg, SignalTerms::default(), rng)
}

pub fn synth_observation_with<R: Rng + ?Sized>(
    scn: &ScenarioDraw,
    symbols: &SymbolGrid,
    cfg: &SystemConfig,
    jcfg: &JammerConfig,
    terms: SignalTerms,
    rng: &mut R,
) -> Result<Observation> {
    let g = split_re_im(&synth_complex(scn, symbols, cfg, jcfg, terms, rng)?);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite observation {}", scn.index)));
    }
    Ok(Observation {
        index: scn.index,
        label: if scn.jammer_present() { Label::H1 } else { Label::H0 },
        beam_angle_rad: scn.beam_angle_rad,
        g,
        scenario: Some(scn.clone()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetMode {
    /// Jammer-free observations only.
    Train,
    /// First half H0, second half H1.
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub observations: Vec<Observation>,
    pub system: SystemConfig,
    pub jammer: Option<JammerConfig>,
    pub seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observation_len(&self) -> usize {
        self.observations.first().map_or(self.system.observation_len(), |o| o.g.len())
    }

    pub fn label_counts(&self) -> (usize, usize) {
        let h1 = self.observations.iter().filter(|o| o.label == Label::H1).count();
        (self.observations.len() - h1, h1)
    }

    /// Split into the leading `fraction` and the remainder.
    pub fn split(&self, fraction: f64) -> (Vec<&Observation>, Vec<&Observation>) {
        let cut = ((self.len() as f64) * fraction).round() as usize;
        let cut = cut.min(self.len());
        let (a, b) = self.observations.split_at(cut);
        (a.iter().collect(), b.iter().collect())
    }
}

/// Random stream for observation `n` of the master `seed`.
pub fn observation_rng(seed: u64, n: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    rng
}

pub fn generate_dataset(
    mode: DatasetMode,
    count: usize,
    cfg: &SystemConfig,
    jcfg: &JammerConfig,
    seed: u64,
) -> Result<Dataset> {
    cfg.validate()?;
    jcfg.validate()?;
    match mode {
        DatasetMode::Train if count == 0 => {
            return Err(Error::InvalidConfig("dataset must contain at least one observation".into()))
        }
        DatasetMode::Test if count < 2 => {
            return Err(Error::InvalidConfig("test dataset needs at least two observations".into()))
        }
        _ => {}
    }
    let h0_count = match mode {
        DatasetMode::Train => count,
        DatasetMode::Test => count - count / 2,
    };

    let observations = (1..=count)
        .into_par_iter()
        .map(|n| {
            let mut rng = observation_rng(seed, n);
            let scn = draw_scenario(n, cfg, jcfg, n > h0_count, &mut rng);
            let symbols = SymbolGrid::random_qpsk(cfg.num_subcarriers, &mut rng);
            synth_observation(&scn, &symbols, cfg, jcfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Dataset { observations, system: cfg.clone(), jammer: (mode == DatasetMode::Test).then(|| jcfg.clone()), seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SystemConfig {
        SystemConfig { num_subcarriers: 8, num_tx_antennas: 4, num_rx_antennas: 4, ..SystemConfig::default() }
    }

    #[test]
    fn qpsk_symbols_are_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let grid = SymbolGrid::random_qpsk(64, &mut rng);
        assert!(grid.symbols().iter().all(|s| (s.norm() - 1.0).abs() < 1e-15));
        assert!(SymbolGrid::from_symbols(vec![Complex64::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn train_dataset_is_all_h0() {
        let ds = generate_dataset(DatasetMode::Train, 10, &small_cfg(), &JammerConfig::default(), 4).unwrap();
        assert_eq!(ds.len(), 10);
        assert_eq!(ds.label_counts(), (10, 0));
        assert!(ds.observations.iter().all(|o| o.g.len() == 16));
        assert_eq!(ds.observations[3].index, 4);
    }

    #[test]
    fn test_dataset_halves() {
        let ds = generate_dataset(DatasetMode::Test, 4600, &small_cfg(), &JammerConfig::default(), 4).unwrap();
        assert_eq!(ds.label_counts(), (2300, 2300));
        assert!(ds.observations[..2300].iter().all(|o| o.label == Label::H0));
        assert!(ds.observations[2300..].iter().all(|o| o.label == Label::H1));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = small_cfg();
        let jam = JammerConfig::default();
        let a = generate_dataset(DatasetMode::Test, 50, &cfg, &jam, 99).unwrap();
        let b = generate_dataset(DatasetMode::Test, 50, &cfg, &jam, 99).unwrap();
        for (x, y) in a.observations.iter().zip(&b.observations) {
            assert_eq!(x.g, y.g);
        }
        let c = generate_dataset(DatasetMode::Test, 50, &cfg, &jam, 100).unwrap();
        assert_ne!(a.observations[0].g, c.observations[0].g);
    }

    #[test]
    fn rejects_empty_counts() {
        let cfg = small_cfg();
        let jam = JammerConfig::default();
        assert!(generate_dataset(DatasetMode::Train, 0, &cfg, &jam, 1).is_err());
        assert!(generate_dataset(DatasetMode::Test, 1, &cfg, &jam, 1).is_err());
    }

    #[test]
    fn symbol_count_must_match() {
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scn = draw_scenario(1, &cfg, &JammerConfig::default(), false, &mut rng);
        let grid = SymbolGrid::random_qpsk(3, &mut rng);
        assert!(synth_observation(&scn, &grid, &cfg, &JammerConfig::default(), &mut rng).is_err());
    }
}
