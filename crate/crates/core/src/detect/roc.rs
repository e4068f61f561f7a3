//! ROC curves and calibrated operating points.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::null::{fit_null_with, sorted_finite, NullMethod};
use super::threshold::{check_probability, exceedance_rate, threshold_for_pfa, Threshold};
use crate::error::{Error, Result};
use crate::nn::ModelKind;
use crate::sim::Label;
use crate::vae::EvalScore;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    h0: Vec<f64>,
    h1: Vec<f64>,
    pub kind: ModelKind,
}

impl ScoreSet {
    pub fn new(h0: &[f64], h1: &[f64], kind: ModelKind) -> Result<Self> {
        Ok(Self { h0: sorted_finite(h0)?, h1: sorted_finite(h1)?, kind })
    }

    pub fn from_scores(scores: &[EvalScore], kind: ModelKind) -> Result<Self> {
        let pick = |l| scores.iter().filter(|s| s.label == l).map(|s| s.value).collect::<Vec<_>>();
        Self::new(&pick(Label::H0), &pick(Label::H1), kind)
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    pub fn h1(&self) -> &[f64] {
        &self.h1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub omega: f64,
    pub pfa: f64,
    pub pd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Count of entries of the ascending `sorted` strictly above `omega`.
fn count_above(sorted: &[f64], omega: f64) -> usize {
    sorted.len() - sorted.partition_point(|&v| v <= omega)
}

/// Sweeps `ω` from `+∞` through every distinct score down to `-∞`.
pub fn roc(scores: &ScoreSet) -> Result<RocCurve> {
    if scores.h0.is_empty() {
        return Err(Error::EmptyClass("H0"));
    }
    if scores.h1.is_empty() {
        return Err(Error::EmptyClass("H1"));
    }
    let mut thresholds: Vec<f64> = scores.h0.iter().chain(&scores.h1).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let n0 = scores.h0.len() as f64;
    let n1 = scores.h1.len() as f64;
    let mut points = Vec::with_capacity(thresholds.len() + 2);
    points.push(RocPoint { omega: f64::INFINITY, pfa: 0.0, pd: 0.0 });
    for omega in thresholds {
        points.push(RocPoint {
            omega,
            pfa: count_above(&scores.h0, omega) as f64 / n0,
            pd: count_above(&scores.h1, omega) as f64 / n1,
        });
    }
    points.push(RocPoint { omega: f64::NEG_INFINITY, pfa: 1.0, pd: 1.0 });

    let auc = points.windows(2).map(|w| (w[1].pfa - w[0].pfa) * (w[1].pd + w[0].pd) * 0.5).sum();
    Ok(RocCurve { points, auc })
}

impl RocCurve {
    /// Largest detection probability reachable with false-alarm rate at most `pfa`.
    pub fn pd_at_pfa(&self, pfa: f64) -> Result<f64> {
        check_probability(pfa)?;
        Ok(self.points.iter().filter(|p| p.pfa <= pfa).map(|p| p.pd).fold(0.0, f64::max))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "omega,pfa,pd")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.omega, p.pfa, p.pd)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Detector performance at a threshold calibrated on separate H0 scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub model_kind: ModelKind,
    pub sjr_db: Option<f64>,
    pub target_pfa: f64,
    pub omega: f64,
    /// False-alarm rate observed on the evaluated H0 scores.
    pub pfa: f64,
    pub pd: f64,
    pub auc: f64,
    pub n_calibration: usize,
    pub n_h0: usize,
    pub n_h1: usize,
}

/// Detection probability on `h1` at the threshold calibrated on `calibration_h0`.
pub fn pd_at_pfa(calibration_h0: &[f64], h1: &[f64], pfa: f64) -> Result<f64> {
    if h1.is_empty() {
        return Err(Error::EmptyClass("H1"));
    }
    let t = threshold_for_pfa(&fit_null_with(calibration_h0, NullMethod::Empirical)?, pfa)?;
    Ok(exceedance_rate(h1, &t))
}

pub fn operating_point(
    calibration_h0: &[f64],
    scores: &ScoreSet,
    pfa: f64,
    method: NullMethod,
    sjr_db: Option<f64>,
) -> Result<(OperatingPoint, Threshold, RocCurve)> {
    let threshold = threshold_for_pfa(&fit_null_with(calibration_h0, method)?, pfa)?;
    let curve = roc(scores)?;
    let point = OperatingPoint {
        model_kind: scores.kind,
        sjr_db,
        target_pfa: pfa,
        omega: threshold.omega,
        pfa: exceedance_rate(&scores.h0, &threshold),
        pd: exceedance_rate(&scores.h1, &threshold),
        auc: curve.auc,
        n_calibration: calibration_h0.len(),
        n_h0: scores.h0.len(),
        n_h1: scores.h1.len(),
    };
    Ok((point, threshold, curve))
}

impl OperatingPoint {
    /// `key = value` summary.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("plain struct serialises")
    }
}
