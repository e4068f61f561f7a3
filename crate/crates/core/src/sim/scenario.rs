//! Per-observation random geometry: beam position, target and jammer state.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::draw_rcs;
use super::config::{JammerConfig, SystemConfig, SPEED_OF_LIGHT};

pub const TARGET_RANGE_MIN_M: f64 = 20.0;
pub const TARGET_RANGE_MAX_M: f64 = 85.0;

/// Latent state of the jammer for one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JammerDraw {
    pub phase_rad: f64,
    /// Direction the jammer steers its own array towards.
    pub steer_rad: f64,
    /// Angle of arrival of the jammer signal at the BS.
    pub aoa_rad: f64,
    /// Angle of departure from the jammer towards the BS.
    pub aod_rad: f64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDraw {
    pub index: usize,
    pub beam_angle_rad: f64,
    pub target_range_m: f64,
    pub target_angle_rad: f64,
    pub target_phase_rad: f64,
    pub target_rcs_m2: f64,
    pub target_delay_s: f64,
    pub si_phases_rad: Vec<f64>,
    pub jammer: Option<JammerDraw>,
}

impl ScenarioDraw {
    pub fn jammer_present(&self) -> bool {
        self.jammer.is_some()
    }
}

/// Beam direction of observation `n` (1-based): `-θ0 + mod(n - 1, N_step) ΔΘ`.
pub fn beam_schedule(n: usize, cfg: &SystemConfig) -> f64 {
    assert!(n >= 1, "observation index is 1-based");
    let step = (n - 1) % cfg.beam_steps();
    -cfg.scan_half_angle_rad + step as f64 * cfg.beamwidth_rad
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn draw_scenario<R: Rng + ?Sized>(
    n: usize,
    cfg: &SystemConfig,
    jcfg: &JammerConfig,
    jammer_present: bool,
    rng: &mut R,
) -> ScenarioDraw {
    let beam = beam_schedule(n, cfg);
    let spread = cfg.beamwidth_rad;

    let target_phase_rad = uniform(rng, 0.0, TAU);
    let si_phases_rad = (0..cfg.num_rx_antennas).map(|_| uniform(rng, 0.0, TAU)).collect();
    let target_range_m = uniform(rng, TARGET_RANGE_MIN_M, TARGET_RANGE_MAX_M);
    let target_angle_rad = uniform(rng, beam - spread, beam + spread);
    let target_rcs_m2 = draw_rcs(cfg.mean_rcs_m2, rng);

    let jammer = jammer_present.then(|| {
        let aoa_rad = uniform(rng, beam - spread, beam + spread);
        let phase_rad = uniform(rng, 0.0, TAU);
        let steer_rad = uniform(rng, 0.0, TAU);
        let aod_rad = uniform(rng, steer_rad - jcfg.aod_spread_rad, steer_rad + jcfg.aod_spread_rad);
        JammerDraw { phase_rad, steer_rad, aoa_rad, aod_rad, delay_s: jcfg.range_m / SPEED_OF_LIGHT }
    });

    ScenarioDraw {
        index: n,
        beam_angle_rad: beam,
        target_range_m,
        target_angle_rad,
        target_phase_rad,
        target_rcs_m2,
        target_delay_s: 2.0 * target_range_m / SPEED_OF_LIGHT,
        si_phases_rad,
        jammer,
    }
}
