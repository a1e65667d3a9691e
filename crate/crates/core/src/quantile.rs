//! Quantile loss, empirical quantiles and the per-class quantile score.
//!
//! The asymmetric distance of a coordinate `z` to a quantile `q` at level
//! `theta` is `(theta + (1 - 2 theta) 1[z <= q]) |z - q|`. Summed over a sample
//! it is the check (pinball) loss whose minimizer over `q` is the
//! `theta`-quantile; summed over coordinates it is the score used to assign a
//! point to the class with the nearest quantile vector.

use std::fmt;

use crate::error::{Error, Result};

/// Relative slack used when turning `n * theta` into an order-statistic index.
///
/// Grid levels such as `0.02 + 24 * 0.02` carry representation error; without
/// the slack `ceil(50 * 0.5000000000000001)` would select the 26th instead of
/// the 25th order statistic.
const INDEX_SLACK: f64 = 1e-9;

/// A probability level in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid(format!(
                "quantile level must lie in [0, 1], got {theta}"
            )));
        }
        Ok(QuantileLevel(theta))
    }

    /// Median level.
    pub const HALF: QuantileLevel = QuantileLevel(0.5);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for QuantileLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for QuantileLevel {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        QuantileLevel::new(value)
    }
}

/// A non-empty, NaN-free sample held in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    /// Sorts `values`; rejects empty input and non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample must not be empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample value {bad}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(SortedSample { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Left-continuous inverse of the empirical CDF: the order statistic
    /// `x_(ceil(n theta))`, with `x_(0)` read as `x_(1)`.
    pub fn quantile(&self, theta: QuantileLevel) -> f64 {
        self.values[order_statistic_index(self.values.len(), theta.value())]
    }
}

/// Zero-based index of the order statistic selected at level `theta`.
fn order_statistic_index(n: usize, theta: f64) -> usize {
    let scaled = n as f64 * theta;
    let rank = (scaled - INDEX_SLACK * scaled.max(1.0)).ceil();
    let rank = if rank < 1.0 { 1 } else { rank as usize };
    rank.min(n) - 1
}

/// Asymmetric distance of `z` to `q` at level `theta`.
#[inline]
pub fn quantile_distance_unchecked(z: f64, q: f64, theta: f64) -> f64 {
    if z <= q {
        (1.0 - theta) * (q - z)
    } else {
        theta * (z - q)
    }
}

/// Asymmetric distance of `z` to `q` at level `theta`; rejects non-finite input.
pub fn quantile_distance(z: f64, q: f64, theta: QuantileLevel) -> Result<f64> {
    if !z.is_finite() || !q.is_finite() {
        return Err(Error::invalid(format!(
            "quantile distance needs finite inputs, got z={z}, q={q}"
        )));
    }
    Ok(quantile_distance_unchecked(z, q, theta.value()))
}

pub fn empirical_quantile(sample: &SortedSample, theta: QuantileLevel) -> f64 {
    sample.quantile(theta)
}

/// Check loss of the sample around `q`.
pub fn empirical_quantile_loss(sample: &SortedSample, q: f64, theta: QuantileLevel) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::invalid(format!(
            "loss location must be finite, got {q}"
        )));
    }
    let t = theta.value();
    Ok(sample
        .values()
        .iter()
        .map(|&x| quantile_distance_unchecked(x, q, t))
        .sum())
}

/// Sum of coordinate-wise quantile distances of `z` to a class quantile vector.
pub fn class_score(z: &[f64], quantiles: &[f64], theta: QuantileLevel) -> Result<f64> {
    if z.len() != quantiles.len() {
        return Err(Error::invalid(format!(
            "point has {} coordinates but quantile vector has {}",
            z.len(),
            quantiles.len()
        )));
    }
    if z.is_empty() {
        return Err(Error::invalid("score needs at least one coordinate"));
    }
    if z.iter().chain(quantiles).any(|v| !v.is_finite()) {
        return Err(Error::invalid("score inputs must be finite"));
    }
    Ok(score_unchecked(z, quantiles, theta.value()))
}

#[inline]
pub(crate) fn score_unchecked(z: &[f64], quantiles: &[f64], theta: f64) -> f64 {
    z.iter()
        .zip(quantiles)
        .map(|(&zj, &qj)| quantile_distance_unchecked(zj, qj, theta))
        .sum()
}
