//! Half-wavelength ULA steering vectors and beamforming weights.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::config::{JammerConfig, SystemConfig};

/// `a(θ)` with element `m` equal to `exp(iπ m sin θ)`.
pub fn steering_vector(theta: f64, n_elements: usize) -> Vec<Complex64> {
    let phase_step = PI * theta.sin();
    (0..n_elements).map(|m| Complex64::from_polar(1.0, phase_step * m as f64)).collect()
}

fn scaled_conjugate_steering(theta: f64, n_elements: usize, amplitude: f64) -> Vec<Complex64> {
    steering_vector(theta, n_elements).into_iter().map(|a| a.conj() * amplitude).collect()
}

/// Sensing beam `w_T = sqrt(ρ P_T G_T) / N_T · a_T*(θ)`.
pub fn tx_beamformer(theta: f64, cfg: &SystemConfig) -> Vec<Complex64> {
    let n = cfg.num_tx_antennas;
    let amplitude = cfg.sensing_eirp_watts().sqrt() / n as f64;
    scaled_conjugate_steering(theta, n, amplitude)
}

/// Jammer beam `w_J = sqrt(P_J G_J) / N_J · a_J*(θ)`, with `P_J G_J` set by the SJR.
pub fn jammer_beamformer(theta: f64, jcfg: &JammerConfig, cfg: &SystemConfig) -> Vec<Complex64> {
    let n = jcfg.num_jam_antennas;
    let amplitude = jcfg.eirp_watts(cfg).sqrt() / n as f64;
    scaled_conjugate_steering(theta, n, amplitude)
}

/// Receive combiner `w_R = a_R*(θ)`.
pub fn rx_combiner(theta: f64, n_rx: usize) -> Vec<Complex64> {
    scaled_conjugate_steering(theta, n_rx, 1.0)
}

/// Unconjugated bilinear product `uᵀ v`.
pub fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}
