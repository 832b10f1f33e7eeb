//! Empirical distribution summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Sorted `(value, P[X <= value])` pairs with probability `i/N` at the i-th
/// (1-based) sorted sample.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(SimError::EmptyInput("empirical_cdf"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect())
}

/// Fraction of samples `>= threshold`.
pub fn fraction_exceeding(samples: &[f64], threshold: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(SimError::EmptyInput("fraction_exceeding"));
    }
    Ok(samples.iter().filter(|x| **x >= threshold).count() as f64 / samples.len() as f64)
}

/// Percentile `p ∈ [0, 100]` with linear interpolation between order
/// statistics.
pub fn percentile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(SimError::EmptyInput("percentile"));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(SimError::InvalidRange(format!("percentile {p} outside [0, 100]")));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

pub fn median(samples: &[f64]) -> Result<f64> {
    percentile(samples, 50.0)
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(SimError::EmptyInput("mean"));
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

pub const SUMMARY_PERCENTILES: [f64; 7] = [5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 97.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `(p, value)` pairs for [`SUMMARY_PERCENTILES`].
    pub percentiles: Vec<(f64, f64)>,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Result<Self> {
        let percentiles = SUMMARY_PERCENTILES
            .iter()
            .map(|p| Ok((*p, percentile(samples, *p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            count: samples.len(),
            mean: mean(samples)?,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            percentiles,
        })
    }
}
