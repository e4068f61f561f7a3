use serde::{Deserialize, Serialize};

use super::null::EmpiricalNull;
use crate::error::{Error, Result};
use crate::sim::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub omega: f64,
    pub target_pfa: f64,
    pub calibration_size: usize,
}

pub fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

/// `ω` such that `P(V > ω | H0) = pfa` under the fitted null.
pub fn threshold_for_pfa(null: &EmpiricalNull, pfa: f64) -> Result<Threshold> {
    check_probability(pfa)?;
    Ok(Threshold { omega: null.quantile(1.0 - pfa), target_pfa: pfa, calibration_size: null.len() })
}

/// H1 iff the score strictly exceeds `ω`.
pub fn decide(score: f64, threshold: &Threshold) -> Label {
    if score > threshold.omega {
        Label::H1
    } else {
        Label::H0
    }
}

/// Fraction of `scores` declared H1.
pub fn exceedance_rate(scores: &[f64], threshold: &Threshold) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|&&s| decide(s, threshold) == Label::H1).count() as f64 / scores.len() as f64
}
