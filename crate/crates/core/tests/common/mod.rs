//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use jamdet::sim::{ScenarioDraw, SystemConfig};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

const C: f64 = 299_792_458.0;

pub fn small_system() -> SystemConfig {
    SystemConfig { num_subcarriers: 4, num_tx_antennas: 6, num_rx_antennas: 5, ..SystemConfig::default() }
}

fn ula(theta: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|m| Complex64::new(0.0, PI * m as f64 * theta.sin()).exp()).collect()
}

/// `w_Rᵀ H_k w_T` with the full `N_R × N_T` target channel matrix built
/// entry by entry, for subcarrier `k` (1-based).
pub fn full_matrix_target_term(scn: &ScenarioDraw, cfg: &SystemConfig, k: usize) -> Complex64 {
    full_matrix_target_sum(scn, cfg, k).0
}

/// As [`full_matrix_target_term`], also returning `Σ |w_R,i H_ij w_T,j|`,
/// the scale of the rounding error of the double sum.
pub fn full_matrix_target_sum(scn: &ScenarioDraw, cfg: &SystemConfig, k: usize) -> (Complex64, f64) {
    let (nr, nt) = (cfg.num_rx_antennas, cfg.num_tx_antennas);
    let a_r = ula(scn.target_angle_rad, nr);
    let a_t = ula(scn.target_angle_rad, nt);
    let w_r: Vec<Complex64> = ula(scn.beam_angle_rad, nr).iter().map(|a| a.conj()).collect();
    let amp = (cfg.sensing_power_fraction * cfg.eirp_watts).sqrt() / nt as f64;
    let w_t: Vec<Complex64> = ula(scn.beam_angle_rad, nt).iter().map(|a| a.conj() * amp).collect();

    let alpha = (C * C * scn.target_rcs_m2
        / ((4.0 * PI).powi(3) * cfg.carrier_freq_hz.powi(2) * scn.target_range_m.powi(4)))
    .sqrt();
    let tau = 2.0 * scn.target_range_m / C;
    let scalar = alpha
        * Complex64::new(0.0, scn.target_phase_rad).exp()
        * Complex64::new(0.0, -2.0 * PI * k as f64 * cfg.subcarrier_spacing_hz * tau).exp();

    let mut h = vec![vec![Complex64::new(0.0, 0.0); nt]; nr];
    for (i, row) in h.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = scalar * a_r[i] * a_t[j];
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for i in 0..nr {
        for j in 0..nt {
            let term = w_r[i] * h[i][j] * w_t[j];
            total += term;
            magnitude += term.norm();
        }
    }
    (total, magnitude)
}

/// Central finite-difference gradient of `f` at `x`.
pub fn finite_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a - b‖ / max(‖b‖, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(floor)
}

/// Monte-Carlo estimate of `KL(N(β, ϑ²) ‖ N(0, I))` as the mean of
/// `log q(z) - log p(z)` over draws from `q`.
pub fn kl_monte_carlo<R: Rng>(beta: &[f64], theta: &[f64], samples: usize, rng: &mut R) -> f64 {
    let mut total = 0.0;
    for _ in 0..samples {
        let mut log_ratio = 0.0;
        for (&b, &t) in beta.iter().zip(theta) {
            let e: f64 = rng.sample(StandardNormal);
            let z = b + t * e;
            // log q - log p; the 2π terms cancel.
            log_ratio += -t.ln() - 0.5 * e * e + 0.5 * z * z;
        }
        total += log_ratio;
    }
    total / samples as f64
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
