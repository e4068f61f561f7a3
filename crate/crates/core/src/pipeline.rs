//! End-to-end experiment steps shared by the command-line tool and tests:
//! dataset generation, training, calibration, evaluation and sweeps.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::detect::{operating_point, NullMethod, OperatingPoint, RocCurve, ScoreSet, Threshold};
use crate::error::{Error, Result};
use crate::nn::{AdagradState, Checkpoint, ModelKind};
use crate::sim::{generate_dataset, Dataset, DatasetMode, Observation};
use crate::vae::{
    train_ae_observed, train_vae_observed, AeModel, EpochRecord, EvalScore, TrainConfig, TrainedModel, VaeModel,
};

pub fn generate(cfg: &RunConfig, mode: DatasetMode, count: usize, seed: u64, sjr_db: Option<f64>) -> Result<Dataset> {
    let jcfg = match sjr_db {
        Some(sjr) => cfg.jammer_at(sjr),
        None => cfg.jammer(),
    };
    generate_dataset(mode, count, &cfg.system(), &jcfg, seed)
}

pub fn train_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let e = &cfg.experiment;
    generate(cfg, DatasetMode::Train, e.train_count, e.train_seed, None)
}

pub fn test_dataset(cfg: &RunConfig, sjr_db: f64) -> Result<Dataset> {
    let e = &cfg.experiment;
    generate(cfg, DatasetMode::Test, e.test_count, e.test_seed, Some(sjr_db))
}

/// A trained model together with its training configuration and history.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub model: TrainedModel,
    pub train_config: TrainConfig,
    pub trace: Vec<EpochRecord>,
    pub optimizers: Option<(AdagradState, AdagradState)>,
}

impl Detector {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn latent_dim(&self) -> Option<usize> {
        match &self.model {
            TrainedModel::Vae(m) => Some(m.latent_dim),
            TrainedModel::Ae(_) => None,
        }
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let opts = self.optimizers.as_ref().map(|(a, b)| (a, b));
        self.model.to_checkpoint(opts, &self.train_config, self.trace.len() as u64)
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (model, train_config) = TrainedModel::from_checkpoint(ckpt)?;
        let optimizers = match (&ckpt.entries[0].optimizer, &ckpt.entries[1].optimizer) {
            (Some(a), Some(b)) => Some((a.clone(), b.clone())),
            _ => None,
        };
        Ok(Self { model, train_config, trace: Vec::new(), optimizers })
    }

    pub fn score(&self, observations: &[Observation], score_seed: u64) -> Result<Vec<EvalScore>> {
        self.model.score(observations, &self.train_config, score_seed)
    }

    /// Scores of the validation tail of the (jammer-free) training set.
    pub fn calibration_scores(&self, train: &Dataset, score_seed: u64) -> Result<Vec<f64>> {
        let (_, h1) = train.label_counts();
        if h1 > 0 {
            return Err(Error::JammedTrainingData(h1));
        }
        let (_, validation) = train.split(1.0 - self.train_config.validation_fraction);
        let observations: Vec<Observation> = validation.into_iter().cloned().collect();
        Ok(self.score(&observations, score_seed)?.into_iter().map(|s| s.value).collect())
    }
}

pub fn train_config_for(cfg: &RunConfig, kind: ModelKind) -> Result<TrainConfig> {
    match kind {
        ModelKind::Vae => Ok(cfg.training.vae.train.clone()),
        ModelKind::Ae => Ok(cfg.training.ae.train.clone()),
        ModelKind::Mlp => Err(Error::InvalidConfig("only vae and ae detectors can be trained".into())),
    }
}

/// Trains a fresh detector of `kind`; `latent_dim` overrides the VAE setting.
pub fn train(
    cfg: &RunConfig,
    kind: ModelKind,
    data: &Dataset,
    latent_dim: Option<usize>,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<Detector> {
    let tcfg = train_config_for(cfg, kind)?;
    // Initialisation and training use distinct streams of the same seed.
    let mut init_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    init_rng.set_stream(u64::MAX);
    match kind {
        ModelKind::Vae => {
            let model = VaeModel::new(&cfg.vae_architecture(latent_dim), &mut init_rng)?;
            let run = train_vae_observed(data, model, &tcfg, on_epoch)?;
            Ok(Detector {
                model: TrainedModel::Vae(run.model),
                train_config: tcfg,
                trace: run.trace,
                optimizers: Some((run.encoder_opt, run.decoder_opt)),
            })
        }
        ModelKind::Ae => {
            let model = AeModel::new(&cfg.ae_architecture(), &mut init_rng)?;
            let run = train_ae_observed(data, model, &tcfg, on_epoch)?;
            Ok(Detector {
                model: TrainedModel::Ae(run.model),
                train_config: tcfg,
                trace: run.trace,
                optimizers: Some((run.encoder_opt, run.decoder_opt)),
            })
        }
        ModelKind::Mlp => unreachable!("rejected by train_config_for"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub scores: Vec<EvalScore>,
    pub point: OperatingPoint,
    pub threshold: Threshold,
    pub roc: RocCurve,
}

pub fn evaluate(
    detector: &Detector,
    calibration: &[f64],
    test: &Dataset,
    pfa: f64,
    method: NullMethod,
    score_seed: u64,
) -> Result<Evaluation> {
    let scores = detector.score(&test.observations, score_seed)?;
    let sjr = test.jammer.as_ref().map(|j| j.sjr_db);
    let set = ScoreSet::from_scores(&scores, detector.kind())?;
    let (point, threshold, roc) = operating_point(calibration, &set, pfa, method, sjr)?;
    Ok(Evaluation { scores, point, threshold, roc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Sjr,
    LatentDim,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Sjr => "sjr",
            SweepAxis::LatentDim => "latent-dim",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub model_kind: ModelKind,
    pub sjr_db: f64,
    pub latent_dim: Option<usize>,
    pub target_pfa: f64,
    pub omega: f64,
    pub pd: f64,
    pub pfa: f64,
    pub auc: f64,
}

/// One test set per configured SJR, shared by all `detectors`.
pub fn sjr_sweep(cfg: &RunConfig, detectors: &[&Detector], train: &Dataset) -> Result<Vec<SweepRow>> {
    let e = &cfg.experiment;
    let calibrations =
        detectors.iter().map(|d| d.calibration_scores(train, e.score_seed)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &sjr in &e.sjr_db {
        let test = test_dataset(cfg, sjr)?;
        for (det, cal) in detectors.iter().zip(&calibrations) {
            rows.extend(rows_for(SweepAxis::Sjr, sjr, det, cal, &test, cfg)?);
        }
    }
    Ok(rows)
}

/// Retrains the VAE for each configured latent dimension and evaluates it
/// at every configured SJR.
pub fn latent_sweep(
    cfg: &RunConfig,
    train_data: &Dataset,
    mut on_trained: impl FnMut(&Detector),
) -> Result<Vec<SweepRow>> {
    let e = &cfg.experiment;
    let tests = e.sjr_db.iter().map(|&s| test_dataset(cfg, s)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &l in &e.latent_dims {
        let det = train(cfg, ModelKind::Vae, train_data, Some(l), |_| {})?;
        on_trained(&det);
        let cal = det.calibration_scores(train_data, e.score_seed)?;
        for test in &tests {
            rows.extend(rows_for(SweepAxis::LatentDim, l as f64, &det, &cal, test, cfg)?);
        }
    }
    Ok(rows)
}

fn rows_for(
    axis: SweepAxis,
    axis_value: f64,
    det: &Detector,
    calibration: &[f64],
    test: &Dataset,
    cfg: &RunConfig,
) -> Result<Vec<SweepRow>> {
    let e = &cfg.experiment;
    let scores = det.score(&test.observations, e.score_seed)?;
    let set = ScoreSet::from_scores(&scores, det.kind())?;
    let sjr = test.jammer.as_ref().map(|j| j.sjr_db);
    e.pfa
        .iter()
        .map(|&pfa| {
            let (p, _, _) = operating_point(calibration, &set, pfa, e.null_method, sjr)?;
            Ok(SweepRow {
                axis,
                axis_value,
                model_kind: det.kind(),
                sjr_db: sjr.unwrap_or(f64::NAN),
                latent_dim: det.latent_dim(),
                target_pfa: pfa,
                omega: p.omega,
                pd: p.pd,
                pfa: p.pfa,
                auc: p.auc,
            })
        })
        .collect()
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "axis,axis_value,model_kind,sjr_db,latent_dim,target_pfa,omega,pd,pfa,auc")?;
    for r in rows {
        let latent = r.latent_dim.map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.axis, r.axis_value, r.model_kind, r.sjr_db, latent, r.target_pfa, r.omega, r.pd, r.pfa, r.auc
        )?;
    }
    out.flush()?;
    Ok(())
}
