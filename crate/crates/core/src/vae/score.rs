//! Anomaly scores: Monte-Carlo reconstruction probability for the VAE,
//! reconstruction MSE for the AE.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ae::{mse, AeModel};
use super::model::{normalize_with, Normalization, VaeModel};
use crate::error::{Error, Result};
use crate::nn::ModelKind;
use crate::sim::{observation_rng, Label, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalScore {
    pub index: usize,
    pub label: Label,
    pub value: f64,
}

/// Mean reconstruction probability `V` over the given latent noise draws.
pub fn score_vae_with_noise(model: &VaeModel, g_norm: &[f64], draws: &[Vec<f64>]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::InvalidConfig("at least one latent draw is required".into()));
    }
    let q = model.encode(g_norm)?;
    let mut z = Array2::zeros((draws.len(), model.latent_dim));
    for (mut row, eps) in z.rows_mut().into_iter().zip(draws) {
        if eps.len() != model.latent_dim {
            return Err(Error::DimensionMismatch { expected: model.latent_dim, actual: eps.len() });
        }
        row.assign(&ArrayView1::from(&super::model::reparameterize(&q.beta, &q.theta, eps)));
    }
    let (mu, sigma) = model.decode_rows(z.view())?;
    let (mu, sigma) = (mu.as_standard_layout(), sigma.as_standard_layout());
    let total: f64 = mu
        .rows()
        .into_iter()
        .zip(sigma.rows())
        .map(|(m, s)| super::model::reconstruction_v(g_norm, m.as_slice().unwrap(), s.as_slice().unwrap()))
        .sum();
    Ok(total / draws.len() as f64)
}

pub fn score_vae<R: Rng + ?Sized>(model: &VaeModel, g_norm: &[f64], n_mc: usize, rng: &mut R) -> Result<f64> {
    if !model.is_finite() {
        return Err(Error::Numeric("model has non-finite parameters".into()));
    }
    let draws: Vec<Vec<f64>> =
        (0..n_mc).map(|_| (0..model.latent_dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let v = score_vae_with_noise(model, g_norm, &draws)?;
    if !v.is_finite() {
        return Err(Error::Numeric("non-finite reconstruction probability".into()));
    }
    Ok(v)
}

pub fn score_ae(model: &AeModel, g_norm: &[f64]) -> Result<f64> {
    if !model.is_finite() {
        return Err(Error::Numeric("model has non-finite parameters".into()));
    }
    Ok(mse(g_norm, &model.reconstruct(g_norm)?))
}

/// Scores each observation with latent noise drawn from a stream keyed by
/// the observation index, so results do not depend on ordering or batching.
pub fn score_observations_vae(
    model: &VaeModel,
    observations: &[Observation],
    n_mc: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<Vec<EvalScore>> {
    observations
        .par_iter()
        .map(|o| {
            let g = normalize_with(normalization, &o.g)?;
            let mut rng = observation_rng(seed, o.index);
            Ok(EvalScore { index: o.index, label: o.label, value: score_vae(model, &g, n_mc, &mut rng)? })
        })
        .collect()
}

pub fn score_observations_ae(
    model: &AeModel,
    observations: &[Observation],
    normalization: Normalization,
) -> Result<Vec<EvalScore>> {
    observations
        .par_iter()
        .map(|o| {
            let g = normalize_with(normalization, &o.g)?;
            Ok(EvalScore { index: o.index, label: o.label, value: score_ae(model, &g)? })
        })
        .collect()
}

/// `index,label,score,model_kind`.
pub fn write_scores_csv(path: impl AsRef<Path>, scores: &[EvalScore], kind: ModelKind) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "index,label,score,model_kind")?;
    for s in scores {
        writeln!(out, "{},{},{},{}", s.index, s.label.as_byte(), s.value, kind)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_dataset, DatasetMode, JammerConfig, SystemConfig};
    use crate::vae::model::{normalize_observation, VaeArchitecture};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (VaeModel, Vec<Observation>) {
        let cfg =
            SystemConfig { num_subcarriers: 8, num_tx_antennas: 4, num_rx_antennas: 4, ..SystemConfig::default() };
        let ds = generate_dataset(DatasetMode::Test, 20, &cfg, &JammerConfig::default(), 5).unwrap();
        let arch = VaeArchitecture { input_dim: 16, hidden: vec![8], latent_dim: 3 };
        (VaeModel::new(&arch, &mut ChaCha8Rng::seed_from_u64(1)).unwrap(), ds.observations)
    }

    #[test]
    fn single_draw_matches_elbo_v_term() {
        let (model, obs) = setup();
        let g = normalize_observation(&obs[0].g).unwrap();
        let eps = vec![0.4, -1.1, 0.3];
        let v = score_vae_with_noise(&model, &g, std::slice::from_ref(&eps)).unwrap();
        assert_eq!(v, model.evaluate(&g, &eps).unwrap().v);
    }

    #[test]
    fn scores_are_order_invariant() {
        let (model, obs) = setup();
        let forward = score_observations_vae(&model, &obs, 4, 9, Normalization::UnitNorm).unwrap();
        let mut reversed_obs = obs.clone();
        reversed_obs.reverse();
        let mut reversed = score_observations_vae(&model, &reversed_obs, 4, 9, Normalization::UnitNorm).unwrap();
        reversed.reverse();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn nan_model_is_rejected() {
        let (mut model, obs) = setup();
        for layer in model.decoder.layers_mut() {
            layer.biases.fill(f64::NAN);
        }
        let g = normalize_observation(&obs[0].g).unwrap();
        assert!(matches!(score_vae(&model, &g, 2, &mut ChaCha8Rng::seed_from_u64(0)), Err(Error::Numeric(_))));
    }

    #[test]
    fn ae_scores_are_nonnegative() {
        let (_, obs) = setup();
        let arch = crate::vae::AeArchitecture { input_dim: 16, hidden: vec![8, 4] };
        let ae = AeModel::new(&arch, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let scores = score_observations_ae(&ae, &obs, Normalization::UnitNorm).unwrap();
        assert!(scores.iter().all(|s| s.value >= 0.0));
    }
}
