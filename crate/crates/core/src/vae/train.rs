//! Minibatch Adagrad training loops for the VAE and the AE baseline.
//!
//! Each minibatch is split into fixed-size row chunks whose gradients are
//! computed in parallel and then reduced in chunk order, so results do not
//! depend on the number of worker threads.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ae::{AeGrads, AeModel};
use super::model::{normalize_with, Normalization, VaeGrads, VaeModel, DEFAULT_LOGVAR_CLAMP};
use crate::error::{Error, Result};
use crate::nn::{AdagradConfig, AdagradState, DEFAULT_EPSILON};
use crate::sim::{observation_rng, Dataset, Label};

const CHUNK_ROWS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adagrad_epsilon: f64,
    pub seed: u64,
    /// Latent draws averaged per test-time VAE score.
    pub mc_samples_test: usize,
    pub logvar_min: f64,
    pub logvar_max: f64,
    /// Trailing fraction of the training set held out for validation.
    pub validation_fraction: f64,
    pub normalization: Normalization,
}

impl TrainConfig {
    /// η = 0.005, 4000 epochs, batches of 460.
    pub fn vae_reference() -> Self {
        Self {
            epochs: 4000,
            batch_size: 460,
            learning_rate: 0.005,
            adagrad_epsilon: DEFAULT_EPSILON,
            seed: 0,
            mc_samples_test: 16,
            logvar_min: DEFAULT_LOGVAR_CLAMP.0,
            logvar_max: DEFAULT_LOGVAR_CLAMP.1,
            validation_fraction: 0.2,
            normalization: Normalization::UnitNorm,
        }
    }

    /// η = 0.001, 2000 epochs, batches of 200.
    pub fn ae_reference() -> Self {
        Self { epochs: 2000, batch_size: 200, learning_rate: 0.001, ..Self::vae_reference() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs and batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.adagrad_epsilon > 0.0) {
            return Err(Error::InvalidConfig("learning rate and epsilon must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidConfig("validation_fraction must lie in [0, 1)".into()));
        }
        if self.mc_samples_test == 0 {
            return Err(Error::InvalidConfig("mc_samples_test must be at least 1".into()));
        }
        if !(self.logvar_min < self.logvar_max) {
            return Err(Error::InvalidConfig("logvar_min must be below logvar_max".into()));
        }
        Ok(())
    }

    fn adagrad(&self) -> AdagradConfig {
        AdagradConfig { learning_rate: self.learning_rate, epsilon: self.adagrad_epsilon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeRun {
    pub model: VaeModel,
    pub encoder_opt: AdagradState,
    pub decoder_opt: AdagradState,
    pub trace: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeRun {
    pub model: AeModel,
    pub encoder_opt: AdagradState,
    pub decoder_opt: AdagradState,
    pub trace: Vec<EpochRecord>,
}

/// Normalised training and validation matrices (one observation per row).
pub fn training_split(ds: &Dataset, tcfg: &TrainConfig) -> Result<(Array2<f64>, Array2<f64>)> {
    let (_, h1) = ds.label_counts();
    if h1 > 0 {
        return Err(Error::JammedTrainingData(h1));
    }
    if ds.is_empty() {
        return Err(Error::InvalidConfig("empty training dataset".into()));
    }
    let (train, val) = ds.split(1.0 - tcfg.validation_fraction);
    if train.is_empty() {
        return Err(Error::InvalidConfig("validation split leaves no training data".into()));
    }
    let to_matrix = |obs: &[&crate::sim::Observation]| -> Result<Array2<f64>> {
        let width = ds.observation_len();
        let mut flat = Vec::with_capacity(obs.len() * width);
        for o in obs {
            debug_assert_eq!(o.label, Label::H0);
            flat.extend(normalize_with(tcfg.normalization, &o.g)?);
        }
        Ok(Array2::from_shape_vec((obs.len(), width), flat).expect("rows have equal width"))
    };
    Ok((to_matrix(&train)?, to_matrix(&val)?))
}

fn gather(rows: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    rows.select(Axis(0), idx)
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

fn chunks(n: usize) -> Vec<(usize, usize)> {
    (0..n).step_by(CHUNK_ROWS).map(|s| (s, (s + CHUNK_ROWS).min(n))).collect()
}

fn vae_grads(model: &VaeModel, g: ArrayView2<'_, f64>, eps: ArrayView2<'_, f64>) -> Result<(VaeGrads, f64)> {
    let parts = chunks(g.nrows())
        .into_par_iter()
        .map(|(a, b)| model.grads_summed(g.slice(ndarray::s![a..b, ..]), eps.slice(ndarray::s![a..b, ..])))
        .collect::<Result<Vec<_>>>()?;
    let mut iter = parts.into_iter();
    let (mut total, first) = iter.next().expect("non-empty batch");
    let mut loss = first.loss;
    for (g, l) in iter {
        total.encoder.accumulate(&g.encoder);
        total.decoder.accumulate(&g.decoder);
        loss += l.loss;
    }
    let scale = 1.0 / g.nrows() as f64;
    total.encoder.scale(scale);
    total.decoder.scale(scale);
    Ok((total, loss * scale))
}

/// Mean negative ELBO of the rows of `g` under the noise draws `eps`.
pub fn vae_mean_loss(model: &VaeModel, g: ArrayView2<'_, f64>, eps: ArrayView2<'_, f64>) -> Result<f64> {
    let sums = chunks(g.nrows())
        .into_par_iter()
        .map(|(a, b)| model.batch_loss_summed(g.slice(ndarray::s![a..b, ..]), eps.slice(ndarray::s![a..b, ..])))
        .collect::<Result<Vec<_>>>()?;
    Ok(sums.iter().map(|l| l.loss).sum::<f64>() / g.nrows() as f64)
}

fn check_finite(loss: f64, epoch: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("training loss became {loss} at epoch {epoch}")))
    }
}

pub fn train_vae(ds: &Dataset, model: VaeModel, tcfg: &TrainConfig) -> Result<VaeRun> {
    train_vae_observed(ds, model, tcfg, |_| {})
}

pub fn train_vae_observed(
    ds: &Dataset,
    mut model: VaeModel,
    tcfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<VaeRun> {
    tcfg.validate()?;
    if model.input_dim() != ds.observation_len() {
        return Err(Error::DimensionMismatch { expected: model.input_dim(), actual: ds.observation_len() });
    }
    model.logvar_clamp = (tcfg.logvar_min, tcfg.logvar_max);
    let (train, val) = training_split(ds, tcfg)?;
    let latent = model.latent_dim;
    let mut encoder_opt = AdagradState::new(&model.encoder, tcfg.adagrad());
    let mut decoder_opt = AdagradState::new(&model.decoder, tcfg.adagrad());
    let mut rng = observation_rng(tcfg.seed, 0);
    let mut order: Vec<usize> = (0..train.nrows()).collect();
    let mut trace = Vec::with_capacity(tcfg.epochs);

    for epoch in 1..=tcfg.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for batch in order.chunks(tcfg.batch_size) {
            let g = gather(&train, batch);
            let eps = normal_matrix(batch.len(), latent, &mut rng);
            let (grads, loss) = vae_grads(&model, g.view(), eps.view())?;
            check_finite(loss, epoch)?;
            encoder_opt.step(&mut model.encoder, &grads.encoder)?;
            decoder_opt.step(&mut model.decoder, &grads.decoder)?;
            weighted += loss * batch.len() as f64;
        }
        let train_loss = weighted / train.nrows() as f64;
        let validation_loss = if val.nrows() > 0 {
            let mut val_rng = observation_rng(tcfg.seed ^ 0x005e_ed0f_0a11_da7e, epoch);
            let eps = normal_matrix(val.nrows(), latent, &mut val_rng);
            Some(vae_mean_loss(&model, val.view(), eps.view())?)
        } else {
            None
        };
        let record = EpochRecord { epoch, train_loss, validation_loss };
        on_epoch(&record);
        trace.push(record);
    }
    Ok(VaeRun { model, encoder_opt, decoder_opt, trace })
}

fn ae_grads(model: &AeModel, g: ArrayView2<'_, f64>) -> Result<(AeGrads, f64)> {
    let parts = chunks(g.nrows())
        .into_par_iter()
        .map(|(a, b)| model.grads_summed(g.slice(ndarray::s![a..b, ..])))
        .collect::<Result<Vec<_>>>()?;
    let mut iter = parts.into_iter();
    let (mut total, mut loss) = iter.next().expect("non-empty batch");
    for (g, l) in iter {
        total.encoder.accumulate(&g.encoder);
        total.decoder.accumulate(&g.decoder);
        loss += l;
    }
    let scale = 1.0 / g.nrows() as f64;
    total.encoder.scale(scale);
    total.decoder.scale(scale);
    Ok((total, loss * scale))
}

pub fn ae_mean_loss(model: &AeModel, g: ArrayView2<'_, f64>) -> Result<f64> {
    Ok(ae_grads(model, g)?.1)
}

pub fn train_ae(ds: &Dataset, model: AeModel, tcfg: &TrainConfig) -> Result<AeRun> {
    train_ae_observed(ds, model, tcfg, |_| {})
}

pub fn train_ae_observed(
    ds: &Dataset,
    mut model: AeModel,
    tcfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<AeRun> {
    tcfg.validate()?;
    if model.input_dim() != ds.observation_len() {
        return Err(Error::DimensionMismatch { expected: model.input_dim(), actual: ds.observation_len() });
    }
    let (train, val) = training_split(ds, tcfg)?;
    let mut encoder_opt = AdagradState::new(&model.encoder, tcfg.adagrad());
    let mut decoder_opt = AdagradState::new(&model.decoder, tcfg.adagrad());
    let mut rng = observation_rng(tcfg.seed, 0);
    let mut order: Vec<usize> = (0..train.nrows()).collect();
    let mut trace = Vec::with_capacity(tcfg.epochs);

    for epoch in 1..=tcfg.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for batch in order.chunks(tcfg.batch_size) {
            let g = gather(&train, batch);
            let (grads, loss) = ae_grads(&model, g.view())?;
            check_finite(loss, epoch)?;
            encoder_opt.step(&mut model.encoder, &grads.encoder)?;
            decoder_opt.step(&mut model.decoder, &grads.decoder)?;
            weighted += loss * batch.len() as f64;
        }
        let train_loss = weighted / train.nrows() as f64;
        let validation_loss = if val.nrows() > 0 { Some(ae_mean_loss(&model, val.view())?) } else { None };
        let record = EpochRecord { epoch, train_loss, validation_loss };
        on_epoch(&record);
        trace.push(record);
    }
    Ok(AeRun { model, encoder_opt, decoder_opt, trace })
}

/// `epoch,train_loss,validation_loss` with one row per epoch.
pub fn write_loss_csv(path: impl AsRef<Path>, trace: &[EpochRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epoch,train_loss,validation_loss")?;
    for r in trace {
        match r.validation_loss {
            Some(v) => writeln!(out, "{},{},{}", r.epoch, r.train_loss, v)?,
            None => writeln!(out, "{},{},", r.epoch, r.train_loss)?,
        }
    }
    out.flush()?;
    Ok(())
}
