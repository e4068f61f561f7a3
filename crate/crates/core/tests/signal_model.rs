mod common;

use std::f64::consts::PI;

use common::{full_matrix_target_term, mean_var, small_system};
use jamdet::sim::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TARGET_ONLY: SignalTerms = SignalTerms { target: true, jammer: false, self_interference: false, noise: false };

fn scenario(seed: u64, n: usize, cfg: &SystemConfig, jammer: bool) -> ScenarioDraw {
    let mut rng = observation_rng(seed, n);
    draw_scenario(n, cfg, &JammerConfig::default(), jammer, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_one_form_matches_full_channel_matrix(seed in any::<u64>(), n in 1usize..200) {
        let cfg = small_system();
        let scn = scenario(seed, n, &cfg, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let symbols = SymbolGrid::random_qpsk(cfg.num_subcarriers, &mut rng);
        let g = synth_complex(&scn, &symbols, &cfg, &JammerConfig::default(), TARGET_ONLY, &mut rng).unwrap();
        for (idx, value) in g.iter().enumerate() {
            let reference = full_matrix_target_term(&scn, &cfg, idx + 1);
            prop_assert!((value - reference).norm() <= 1e-12 * reference.norm());
        }
    }

    #[test]
    fn noise_free_output_ignores_the_symbols(seed in any::<u64>(), n in 1usize..200, jammer in any::<bool>()) {
        let cfg = small_system();
        let jcfg = JammerConfig::default();
        let scn = scenario(seed, n, &cfg, jammer);
        let terms = SignalTerms { noise: false, ..SignalTerms::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x1 = SymbolGrid::random_qpsk(cfg.num_subcarriers, &mut rng);
        let x2 = SymbolGrid::random_qpsk(cfg.num_subcarriers, &mut rng);
        let g1 = synth_complex(&scn, &x1, &cfg, &jcfg, terms, &mut rng).unwrap();
        let g2 = synth_complex(&scn, &x2, &cfg, &jcfg, terms, &mut rng).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            prop_assert!((a - b).norm() <= 1e-15 * a.norm().max(1e-30));
        }
    }

    #[test]
    fn steering_entries_have_unit_modulus(theta in -PI..PI, n in 1usize..64) {
        let a = steering_vector(theta, n);
        prop_assert!(a.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
        let gain: Complex64 = rx_combiner(theta, n).iter().zip(&a).map(|(w, x)| w * x).sum();
        prop_assert!((gain - Complex64::new(n as f64, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn matched_beam_maximises_the_target_term(seed in any::<u64>(), step in 0usize..23) {
        let cfg = SystemConfig { num_subcarriers: 2, ..SystemConfig::default() };
        let mut scn = scenario(seed, step + 1, &cfg, false);
        let beam = scn.beam_angle_rad;
        let grid: Vec<f64> = (-200..=200).map(|i| beam + i as f64 * cfg.beamwidth_rad / 200.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let symbols = SymbolGrid::random_qpsk(2, &mut rng);
        let best = grid
            .iter()
            .map(|&theta| {
                scn.target_angle_rad = theta;
                let g = synth_complex(&scn, &symbols, &cfg, &JammerConfig::default(), TARGET_ONLY, &mut rng).unwrap();
                (theta, g[0].norm())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        prop_assert!((best.0 - beam).abs() <= cfg.beamwidth_rad / 200.0 + 1e-12);
    }
}

#[test]
fn broadside_two_subcarrier_hand_expansion() {
    let cfg = SystemConfig { num_subcarriers: 2, ..SystemConfig::default() };
    let mut scn = scenario(3, 1, &cfg, false);
    scn.beam_angle_rad = 0.0;
    scn.target_angle_rad = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let symbols = SymbolGrid::random_qpsk(2, &mut rng);
    let g = synth_complex(&scn, &symbols, &cfg, &JammerConfig::default(), TARGET_ONLY, &mut rng).unwrap();
    let alpha = target_gain(scn.target_range_m, scn.target_rcs_m2, &cfg).unwrap();
    let eirp = (cfg.sensing_power_fraction * cfg.eirp_watts).sqrt();
    for (idx, value) in g.iter().enumerate() {
        let k = (idx + 1) as f64;
        let tau = 2.0 * scn.target_range_m / 299_792_458.0;
        let expected = Complex64::from_polar(
            alpha * cfg.num_rx_antennas as f64 * eirp,
            scn.target_phase_rad - 2.0 * PI * k * cfg.subcarrier_spacing_hz * tau,
        );
        assert!((value - expected).norm() <= 1e-12 * expected.norm());
    }
}

#[test]
fn aligned_jammer_looks_like_a_target_at_its_path_delay() {
    let cfg = SystemConfig { num_subcarriers: 16, ..SystemConfig::default() };
    let jcfg = JammerConfig { false_delay_s: 0.0, ..JammerConfig::default() };
    let mut scn = scenario(11, 5, &cfg, true);
    let j = scn.jammer.as_mut().unwrap();
    j.aoa_rad = scn.target_angle_rad;
    j.aod_rad = j.steer_rad;
    let terms = SignalTerms { target: false, jammer: true, self_interference: false, noise: false };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let symbols = SymbolGrid::random_qpsk(16, &mut rng);
    let g = synth_complex(&scn, &symbols, &cfg, &jcfg, terms, &mut rng).unwrap();
    let expected_slope = -2.0 * PI * cfg.subcarrier_spacing_hz * jcfg.range_m / 299_792_458.0;
    for w in g.windows(2) {
        let slope = (w[1] / w[0]).arg();
        assert!((slope - expected_slope).abs() < 1e-9, "{slope} vs {expected_slope}");
        assert!((w[1].norm() - w[0].norm()).abs() < 1e-12 * w[0].norm());
    }
}

#[test]
fn noise_only_entries_have_the_combined_variance() {
    let cfg = small_system();
    let jcfg = JammerConfig::default();
    let terms = SignalTerms { target: false, jammer: false, self_interference: false, noise: true };
    let draws = 20_000;
    let mut columns = vec![Vec::with_capacity(draws); 2 * cfg.num_subcarriers];
    for n in 1..=draws {
        let mut rng = observation_rng(17, n);
        let scn = draw_scenario(n, &cfg, &jcfg, false, &mut rng);
        let symbols = SymbolGrid::random_qpsk(cfg.num_subcarriers, &mut rng);
        let obs = synth_observation_with(&scn, &symbols, &cfg, &jcfg, terms, &mut rng).unwrap();
        for (col, v) in columns.iter_mut().zip(&obs.g) {
            col.push(*v);
        }
    }
    let expected = noise_power(&cfg) * cfg.num_rx_antennas as f64 / 2.0;
    for col in &columns {
        let (mean, var) = mean_var(col);
        assert!(mean.abs() < 5.0 * (expected / draws as f64).sqrt());
        assert!((var / expected - 1.0).abs() < 0.05, "variance ratio {}", var / expected);
    }
}

#[test]
fn swerling_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (0..200_000).map(|_| draw_rcs(2.0, &mut rng)).collect();
    let (mean, var) = mean_var(&xs);
    assert!((mean / 2.0 - 1.0).abs() < 0.01);
    assert!((var / 4.0 - 1.0).abs() < 0.03);
}

#[test]
fn scenario_draws_respect_their_supports() {
    let cfg = SystemConfig::default();
    let jcfg = JammerConfig::default();
    for n in 1..=2000 {
        let scn = scenario(9, n, &cfg, n % 2 == 0);
        assert_eq!(scn.beam_angle_rad, beam_schedule(n, &cfg));
        assert!((scn.target_angle_rad - scn.beam_angle_rad).abs() <= cfg.beamwidth_rad);
        assert!((20.0..=85.0).contains(&scn.target_range_m));
        assert!((scn.target_delay_s - 2.0 * scn.target_range_m / 299_792_458.0).abs() < 1e-20);
        match &scn.jammer {
            Some(j) => {
                assert!((j.aoa_rad - scn.beam_angle_rad).abs() <= cfg.beamwidth_rad);
                assert!((0.0..2.0 * PI).contains(&j.steer_rad));
                assert!((j.aod_rad - j.steer_rad).abs() <= jcfg.aod_spread_rad);
                assert!((j.delay_s - jcfg.range_m / 299_792_458.0).abs() < 1e-20);
            }
            None => assert_eq!(n % 2, 1),
        }
    }
    assert_eq!(beam_schedule(24, &cfg), -cfg.scan_half_angle_rad);
}

#[test]
fn parallel_generation_matches_serial_synthesis() {
    let cfg = small_system();
    let jcfg = JammerConfig::default();
    let ds = generate_dataset(DatasetMode::Test, 101, &cfg, &jcfg, 77).unwrap();
    assert_eq!(ds.label_counts(), (51, 50));
    for (i, obs) in ds.observations.iter().enumerate() {
        let n = i + 1;
        let mut rng = observation_rng(77, n);
        let scn = draw_scenario(n, &cfg, &jcfg, n > 51, &mut rng);
        let symbols = SymbolGrid::random_qpsk(cfg.num_subcarriers, &mut rng);
        let serial = synth_observation(&scn, &symbols, &cfg, &jcfg, &mut rng).unwrap();
        assert_eq!(obs.g, serial.g);
        assert_eq!(obs.label, serial.label);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let again = pool.install(|| generate_dataset(DatasetMode::Test, 101, &cfg, &jcfg, 77).unwrap());
    assert_eq!(again, ds);
}
