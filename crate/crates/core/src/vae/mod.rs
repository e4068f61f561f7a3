//! Variational autoencoder detector and the conventional autoencoder baseline.

pub mod ae;
pub mod model;
pub mod score;
pub mod train;

use serde::{Deserialize, Serialize};

pub use ae::{mse, AeArchitecture, AeGrads, AeModel};
pub use model::{
    elbo_terms, kl_to_standard_normal, normalize_observation, normalize_with, reconstruction_v, reparameterize,
    BatchLoss, ElboTerms, Likelihood, Normalization, Posterior, VaeArchitecture, VaeGrads, VaeModel,
    DEFAULT_LOGVAR_CLAMP,
};
pub use score::{
    score_ae, score_observations_ae, score_observations_vae, score_vae, score_vae_with_noise, write_scores_csv,
    EvalScore,
};
pub use train::{
    ae_mean_loss, train_ae, train_ae_observed, train_vae, train_vae_observed, training_split, vae_mean_loss,
    write_loss_csv, AeRun, EpochRecord, TrainConfig, VaeRun,
};

use crate::error::{Error, Result};
use crate::nn::{AdagradState, Checkpoint, CheckpointEntry, ModelKind};
use crate::sim::Observation;

/// A trained detector of either kind, as stored in a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Vae(VaeModel),
    Ae(AeModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointMeta {
    training: TrainConfig,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Vae(_) => ModelKind::Vae,
            TrainedModel::Ae(_) => ModelKind::Ae,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TrainedModel::Vae(m) => m.input_dim(),
            TrainedModel::Ae(m) => m.input_dim(),
        }
    }

    /// VAE: mean `V` over `tcfg.mc_samples_test` draws; AE: reconstruction MSE.
    pub fn score(&self, observations: &[Observation], tcfg: &TrainConfig, score_seed: u64) -> Result<Vec<EvalScore>> {
        if let Some(o) = observations.iter().find(|o| o.g.len() != self.input_dim()) {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), actual: o.g.len() });
        }
        match self {
            TrainedModel::Vae(m) => {
                score_observations_vae(m, observations, tcfg.mc_samples_test, score_seed, tcfg.normalization)
            }
            TrainedModel::Ae(m) => score_observations_ae(m, observations, tcfg.normalization),
        }
    }

    pub fn to_checkpoint(
        &self,
        optimizers: Option<(&AdagradState, &AdagradState)>,
        tcfg: &TrainConfig,
        epochs_completed: u64,
    ) -> Result<Checkpoint> {
        let (enc, dec) = match self {
            TrainedModel::Vae(m) => (&m.encoder, &m.decoder),
            TrainedModel::Ae(m) => (&m.encoder, &m.decoder),
        };
        let (enc_opt, dec_opt) = match optimizers {
            Some((a, b)) => (Some(a.clone()), Some(b.clone())),
            None => (None, None),
        };
        let metadata =
            toml::to_string(&CheckpointMeta { training: tcfg.clone() }).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Checkpoint {
            kind: self.kind(),
            entries: vec![
                CheckpointEntry { network: enc.clone(), optimizer: enc_opt },
                CheckpointEntry { network: dec.clone(), optimizer: dec_opt },
            ],
            epochs_completed,
            seed: tcfg.seed,
            metadata,
        })
    }

    /// Rebuilds the model and the training configuration recorded with it.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<(Self, TrainConfig)> {
        if ckpt.entries.len() != 2 {
            return Err(Error::Format(format!("expected 2 networks, found {}", ckpt.entries.len())));
        }
        let meta: CheckpointMeta = toml::from_str(&ckpt.metadata).map_err(|e| Error::Format(e.to_string()))?;
        let enc = ckpt.entries[0].network.clone();
        let dec = ckpt.entries[1].network.clone();
        let model = match ckpt.kind {
            ModelKind::Vae => {
                let mut m = VaeModel::from_networks(enc, dec)?;
                m.logvar_clamp = (meta.training.logvar_min, meta.training.logvar_max);
                TrainedModel::Vae(m)
            }
            ModelKind::Ae => TrainedModel::Ae(AeModel::from_networks(enc, dec)?),
            ModelKind::Mlp => return Err(Error::Format("checkpoint holds a plain MLP, not a detector".into())),
        };
        Ok((model, meta.training))
    }
}
