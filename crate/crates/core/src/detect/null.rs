//! Null-hypothesis score distribution estimated from jammer-free scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NULL_SAMPLES: usize = 50;
pub const DEFAULT_HISTOGRAM_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum NullMethod {
    /// Piecewise-linear CDF through the order statistics.
    #[default]
    Empirical,
    /// Piecewise-linear CDF of a fixed-bin histogram density.
    Histogram { bins: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalNull {
    sorted: Vec<f64>,
    method: NullMethod,
    /// Histogram CDF knots `(edge, cdf)`, only for [`NullMethod::Histogram`].
    knots: Vec<(f64, f64)>,
}

pub fn sorted_finite(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("non-finite score".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

pub fn fit_null(h0_scores: &[f64]) -> Result<EmpiricalNull> {
    fit_null_with(h0_scores, NullMethod::Empirical)
}

pub fn fit_null_with(h0_scores: &[f64], method: NullMethod) -> Result<EmpiricalNull> {
    if h0_scores.len() < MIN_NULL_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_NULL_SAMPLES, got: h0_scores.len() });
    }
    let sorted = sorted_finite(h0_scores)?;
    let knots = match method {
        NullMethod::Empirical => Vec::new(),
        NullMethod::Histogram { bins } => histogram_knots(&sorted, bins)?,
    };
    Ok(EmpiricalNull { sorted, method, knots })
}

fn histogram_knots(sorted: &[f64], bins: usize) -> Result<Vec<(f64, f64)>> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin".into()));
    }
    let lo = sorted[0];
    let hi = *sorted.last().expect("non-empty");
    if hi == lo {
        return Ok(vec![(lo, 0.0), (hi, 1.0)]);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in sorted {
        let b = (((s - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = sorted.len() as f64;
    let mut knots = Vec::with_capacity(bins + 1);
    let mut acc = 0usize;
    knots.push((lo, 0.0));
    for (b, c) in counts.iter().enumerate() {
        acc += c;
        let edge = if b + 1 == bins { hi } else { lo + width * (b + 1) as f64 };
        knots.push((edge, acc as f64 / n));
    }
    Ok(knots)
}

fn interpolate_cdf(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x < first.0 {
        return 0.0;
    }
    if x >= last.0 {
        return 1.0;
    }
    let i = knots.partition_point(|&(e, _)| e <= x).saturating_sub(1);
    let (x0, c0) = knots[i];
    let (x1, c1) = knots[i + 1];
    if x1 == x0 {
        c1
    } else {
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }
}

fn invert_cdf(knots: &[(f64, f64)], p: f64) -> f64 {
    let i = knots.partition_point(|&(_, c)| c < p).min(knots.len() - 1);
    if i == 0 {
        return knots[0].0;
    }
    let (x0, c0) = knots[i - 1];
    let (x1, c1) = knots[i];
    if c1 == c0 {
        x1
    } else {
        x0 + (x1 - x0) * (p - c0) / (c1 - c0)
    }
}

impl EmpiricalNull {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn method(&self) -> NullMethod {
        self.method
    }

    pub fn sorted_scores(&self) -> &[f64] {
        &self.sorted
    }

    /// `P(V <= x | H0)`. The empirical form places the `i`-th order
    /// statistic (0-based) at `i / (n - 1)` and interpolates linearly.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.method {
            NullMethod::Histogram { .. } => interpolate_cdf(&self.knots, x),
            NullMethod::Empirical => {
                let s = &self.sorted;
                let n = s.len();
                if x < s[0] {
                    return 0.0;
                }
                if x >= s[n - 1] {
                    return 1.0;
                }
                let upper = s.partition_point(|&v| v <= x);
                let i = upper - 1;
                let frac = (x - s[i]) / (s[i + 1] - s[i]);
                (i as f64 + frac) / (n - 1) as f64
            }
        }
    }

    /// Inverse of [`Self::cdf`] for `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self.method {
            NullMethod::Histogram { .. } => invert_cdf(&self.knots, p),
            NullMethod::Empirical => {
                let s = &self.sorted;
                let h = (s.len() - 1) as f64 * p;
                let lo = h.floor() as usize;
                let hi = (lo + 1).min(s.len() - 1);
                s[lo] + (h - lo as f64) * (s[hi] - s[lo])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_to_hundred() -> Vec<f64> {
        (1..=100).map(f64::from).collect()
    }

    #[test]
    fn midpoint_of_uniform_grid() {
        let null = fit_null(&one_to_hundred()).unwrap();
        assert!((null.cdf(50.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cdf_range_and_monotonicity() {
        let null = fit_null(&one_to_hundred()).unwrap();
        assert_eq!(null.cdf(0.0), 0.0);
        assert_eq!(null.cdf(101.0), 1.0);
        let mut prev = 0.0;
        for i in 0..1000 {
            let c = null.cdf(i as f64 * 0.11);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(fit_null(&[1.0; 49]), Err(Error::TooFewSamples { needed: 50, got: 49 })));
        assert!(fit_null(&[f64::NAN; 60]).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let scores: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64 * 0.3 + (i as f64).sin()).collect();
        let null = fit_null(&scores).unwrap();
        for &p in &[0.1, 0.5, 0.9, 0.95] {
            assert!((null.cdf(null.quantile(p)) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_do_not_break_the_cdf() {
        let mut scores = vec![1.0; 30];
        scores.extend(std::iter::repeat_n(2.0, 30));
        let null = fit_null(&scores).unwrap();
        assert_eq!(null.cdf(1.0), 29.0 / 59.0);
        assert!(null.cdf(1.5) > null.cdf(1.0) && null.cdf(1.5) < 1.0);
        assert_eq!(null.cdf(2.0), 1.0);
    }

    #[test]
    fn histogram_method() {
        let null = fit_null_with(&one_to_hundred(), NullMethod::Histogram { bins: DEFAULT_HISTOGRAM_BINS }).unwrap();
        assert_eq!(null.cdf(0.0), 0.0);
        assert_eq!(null.cdf(100.0), 1.0);
        assert!((null.cdf(50.5) - 0.5).abs() < 0.02);
        let q = null.quantile(0.95);
        assert!((94.0..=97.0).contains(&q), "{q}");
        assert!(fit_null_with(&one_to_hundred(), NullMethod::Histogram { bins: 0 }).is_err());
    }
}
