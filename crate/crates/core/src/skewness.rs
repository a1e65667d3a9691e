//! Variable-wise skewness and sign unification.
//!
//! Each variable's skewness is measured within every class, the class values
//! are averaged with equal weights, and variables with negative average
//! skewness are negated so that all variables lean the same way before a
//! single quantile level is chosen for them.

use std::fmt;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::quantile::{QuantileLevel, SortedSample};

/// How (and whether) skewness is measured for sign unification.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SkewnessMode {
    #[default]
    None,
    /// Third standardized moment.
    Moment,
    /// Hinkley's quantile skewness at level `u` in `(0.5, 1]`; `u = 0.75` is Galton's.
    Quantile(f64),
}

impl SkewnessMode {
    pub const GALTON: SkewnessMode = SkewnessMode::Quantile(0.75);

    pub fn quantile(u: f64) -> Result<Self> {
        if !(u > 0.5 && u <= 1.0) {
            return Err(Error::config(format!(
                "quantile skewness level must lie in (0.5, 1], got {u}"
            )));
        }
        Ok(SkewnessMode::Quantile(u))
    }
}

impl fmt::Display for SkewnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkewnessMode::None => write!(f, "none"),
            SkewnessMode::Moment => write!(f, "moment"),
            SkewnessMode::Quantile(u) if *u == 0.75 => write!(f, "galton"),
            SkewnessMode::Quantile(u) => write!(f, "quantile:{u}"),
        }
    }
}

impl FromStr for SkewnessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(SkewnessMode::None),
            "moment" => Ok(SkewnessMode::Moment),
            "galton" => Ok(SkewnessMode::GALTON),
            other => match other.strip_prefix("quantile:") {
                Some(u) => {
                    let u: f64 = u
                        .parse()
                        .map_err(|_| Error::config(format!("bad quantile skewness level `{u}`")))?;
                    SkewnessMode::quantile(u)
                }
                None => Err(Error::config(format!(
                    "unknown skewness mode `{other}` (expected none, moment, galton or quantile:<u>)"
                ))),
            },
        }
    }
}

/// Per-variable signs, each `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn identity(p: usize) -> Self {
        SignVector(vec![1; p])
    }

    pub fn new(flips: Vec<i8>) -> Result<Self> {
        if flips.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("sign flips must be +1 or -1"));
        }
        Ok(SignVector(flips))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn factor(&self, j: usize) -> f64 {
        f64::from(self.0[j])
    }
}

/// Skewness value with a flag set when the measure had no spread to work with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewEstimate {
    pub value: f64,
    pub degenerate: bool,
}

/// `m3 / s^3` with divisor `n` for both central moments.
pub fn standardized_third_moment(sample: &SortedSample) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::DegenerateSample(
            "moment skewness needs at least two values".into(),
        ));
    }
    let nf = n as f64;
    let mean = sample.values().iter().sum::<f64>() / nf;
    let (m2, m3) = sample.values().iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let d = x - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let m2 = m2 / nf;
    let m3 = m3 / nf;
    if m2 <= 0.0 {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Hinkley's `tau(u) = (q(u) + q(1-u) - 2 q(1/2)) / (q(u) - q(1-u))` with
/// empirical quantiles; returns 0 flagged degenerate when the denominator is 0.
pub fn quantile_skewness(sample: &SortedSample, u: f64) -> Result<SkewEstimate> {
    if !(u > 0.5 && u <= 1.0) {
        return Err(Error::invalid(format!(
            "quantile skewness level must lie in (0.5, 1], got {u}"
        )));
    }
    let upper = sample.quantile(QuantileLevel::new(u)?);
    let lower = sample.quantile(QuantileLevel::new(1.0 - u)?);
    let median = sample.quantile(QuantileLevel::HALF);
    let spread = upper - lower;
    if spread <= 0.0 {
        return Ok(SkewEstimate {
            value: 0.0,
            degenerate: true,
        });
    }
    let value = ((upper - median) - (median - lower)) / spread;
    Ok(SkewEstimate {
        value: value.clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// Skewness of one sample under `mode`; degenerate samples count as 0.
fn measure(sample: &SortedSample, mode: SkewnessMode) -> Result<f64> {
    match mode {
        SkewnessMode::None => Ok(0.0),
        SkewnessMode::Moment => match standardized_third_moment(sample) {
            Ok(v) => Ok(v),
            Err(Error::DegenerateSample(_)) => Ok(0.0),
            Err(e) => Err(e),
        },
        SkewnessMode::Quantile(u) => Ok(quantile_skewness(sample, u)?.value),
    }
}

/// Per-variable mean over classes of the within-class skewness.
pub fn class_averaged_skewness(data: &Dataset, mode: SkewnessMode) -> Result<Vec<f64>> {
    let counts = data.class_counts();
    if let Some(k) = counts.iter().position(|&c| c < 2) {
        return Err(Error::invalid(format!(
            "class {k} has {} observation(s); skewness needs at least 2",
            counts[k]
        )));
    }
    let g = data.num_classes();
    (0..data.p())
        .map(|j| {
            let mut total = 0.0;
            for k in 0..g {
                let sample = SortedSample::new(data.class_column(k, j))?;
                total += measure(&sample, mode)?;
            }
            Ok(total / g as f64)
        })
        .collect()
}

/// `-1` for variables whose class-averaged skewness is negative, else `+1`.
pub fn compute_sign_flips(data: &Dataset, mode: SkewnessMode) -> Result<SignVector> {
    if mode == SkewnessMode::None {
        return Ok(SignVector::identity(data.p()));
    }
    let skew = class_averaged_skewness(data, mode)?;
    Ok(SignVector(
        skew.iter().map(|&s| if s < 0.0 { -1 } else { 1 }).collect(),
    ))
}

pub fn apply_sign_flips(data: &Dataset, flips: &SignVector) -> Result<Dataset> {
    if flips.len() != data.p() {
        return Err(Error::invalid(format!(
            "{} sign flips for {} variables",
            flips.len(),
            data.p()
        )));
    }
    Ok(data.map_columns(|j, v| flips.factor(j) * v))
}
