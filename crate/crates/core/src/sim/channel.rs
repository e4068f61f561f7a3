//! Propagation gains, target fluctuation and receiver noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::config::{db_to_linear, JammerConfig, NoiseBandwidth, SystemConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Two-way radar-equation amplitude of a point target at range `r` with cross section `rcs`.
pub fn target_gain(r: f64, rcs: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Singular("target range must be positive"));
    }
    if !(rcs >= 0.0) {
        return Err(Error::InvalidConfig(format!("negative RCS {rcs}")));
    }
    let fc = cfg.carrier_freq_hz;
    let power = SPEED_OF_LIGHT.powi(2) * rcs / ((4.0 * PI).powi(3) * fc * fc * r.powi(4));
    Ok(power.sqrt())
}

/// Swerling I cross section: exponential with the given mean.
pub fn draw_rcs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    Exp::new(1.0 / mean).expect("mean RCS must be positive").sample(rng)
}

/// One-way free-space amplitude of the jammer-to-BS direct path.
pub fn jammer_gain(jcfg: &JammerConfig, cfg: &SystemConfig) -> Result<f64> {
    if !(jcfg.range_m > 0.0) {
        return Err(Error::Singular("jammer range must be positive"));
    }
    Ok(SPEED_OF_LIGHT / (4.0 * PI * cfg.carrier_freq_hz * jcfg.range_m))
}

pub fn noise_power(cfg: &SystemConfig) -> f64 {
    let n0 = cfg.boltzmann * cfg.reference_temp_k * db_to_linear(cfg.noise_figure_db);
    let bandwidth = match cfg.noise_bandwidth {
        NoiseBandwidth::FullBand => cfg.num_subcarriers as f64 * cfg.subcarrier_spacing_hz,
        NoiseBandwidth::PerSubcarrier => cfg.subcarrier_spacing_hz,
    };
    n0 * bandwidth
}

/// Standard deviation `σ_N` of the complex receiver noise per antenna and subcarrier.
pub fn noise_std(cfg: &SystemConfig) -> f64 {
    noise_power(cfg).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rcs_gives_zero_gain() {
        assert_eq!(target_gain(50.0, 0.0, &SystemConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn target_gain_inverse_square_amplitude() {
        let cfg = SystemConfig::default();
        let near = target_gain(30.0, 1.0, &cfg).unwrap();
        let far = target_gain(60.0, 1.0, &cfg).unwrap();
        assert!((near / far - 4.0).abs() < 1e-12);
    }

    #[test]
    fn target_gain_regression_value() {
        let cfg = SystemConfig::default();
        // sqrt(c² / ((4π)³ f_c² r⁴)) evaluated independently at r = 50 m, f_c = 28 GHz.
        let c: f64 = 299_792_458.0;
        let four_pi_cubed = (4.0 * std::f64::consts::PI).powi(3);
        let expected = (c * c / (four_pi_cubed * 28e9f64.powi(2) * 50f64.powi(4))).sqrt();
        let got = target_gain(50.0, 1.0, &cfg).unwrap();
        assert!((got - expected).abs() <= 1e-15 * expected);
        assert!((got - 9.614_083e-8).abs() < 1e-13, "{got}");
    }

    #[test]
    fn zero_range_is_rejected() {
        let cfg = SystemConfig::default();
        assert!(matches!(target_gain(0.0, 1.0, &cfg), Err(Error::Singular(_))));
        let jam = JammerConfig { range_m: 0.0, ..JammerConfig::default() };
        assert!(matches!(jammer_gain(&jam, &cfg), Err(Error::Singular(_))));
    }

    #[test]
    fn jammer_gain_one_way_law() {
        let cfg = SystemConfig::default();
        let base = JammerConfig::default();
        let g90 = jammer_gain(&base, &cfg).unwrap();
        let g180 = jammer_gain(&JammerConfig { range_m: 180.0, ..base.clone() }, &cfg).unwrap();
        assert!((g90 / g180 - 2.0).abs() < 1e-12);
        let expected = 299_792_458.0 / (4.0 * std::f64::consts::PI * 28e9 * 90.0);
        assert!((g90 - expected).abs() < 1e-18);
        assert!(g90 > 0.0);
    }

    #[test]
    fn noise_power_values() {
        let unit = SystemConfig {
            noise_figure_db: 0.0,
            num_subcarriers: 1,
            subcarrier_spacing_hz: 1.0,
            ..SystemConfig::default()
        };
        assert!((noise_power(&unit) - 1.38e-23 * 290.0).abs() < 1e-35);
        assert!((noise_power(&unit) - 4.0e-21).abs() < 0.01e-21);

        let reference = SystemConfig::default();
        let expected = 1.38e-23 * 290.0 * 10f64.powf(0.8) * 500.0 * 120e3;
        assert!((noise_power(&reference) - expected).abs() < 1e-12 * expected);

        let doubled = SystemConfig { num_subcarriers: 1000, ..reference.clone() };
        assert!((noise_power(&doubled) / noise_power(&reference) - 2.0).abs() < 1e-12);

        let per_sc = SystemConfig { noise_bandwidth: NoiseBandwidth::PerSubcarrier, ..reference.clone() };
        assert!((noise_power(&reference) / noise_power(&per_sc) - 500.0).abs() < 1e-9);
    }

    #[test]
    fn swerling_draws_are_nonnegative_with_exponential_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..200_000).map(|_| draw_rcs(1.0, &mut rng)).collect();
        assert!(draws.iter().all(|&x| x >= 0.0));
        let below_mean = draws.iter().filter(|&&x| x <= 1.0).count() as f64 / draws.len() as f64;
        assert!((below_mean - (1.0 - (-1.0f64).exp())).abs() < 0.01);
    }
}
