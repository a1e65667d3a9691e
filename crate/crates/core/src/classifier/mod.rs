//! The empirically optimal quantile classifier.
//!
//! Training standardizes the columns, unifies skewness signs, then evaluates
//! the in-sample rate of correct classification on an equispaced grid of
//! quantile levels in `[tau, 1 - tau]` and keeps the best level. Prediction
//! assigns a point to the class whose quantile vector has the smallest summed
//! asymmetric distance.

mod baseline;
mod cv;
mod model_io;
mod select;

use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::quantile::{score_unchecked, QuantileLevel, SortedSample};
use crate::skewness::{apply_sign_flips, compute_sign_flips, SignVector, SkewnessMode};
use crate::standardize::{apply_scales, compute_scales, StandardizationMode};

pub use baseline::{centroid_classify, median_classify, NearestCenter};
pub use cv::{binomial_stderr, cross_validate, stratified_folds, CvResult, Folds};
pub use select::select_theta;

/// Default trimming of the quantile-level search interval.
pub const DEFAULT_TAU: f64 = 0.02;
/// Default number of grid levels; with the default `tau` the step is 0.02.
pub const DEFAULT_GRID_SIZE: usize = 49;

/// The small-class warning is emitted once per process, not once per fit.
static SMALL_CLASS_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub tau: f64,
    pub grid_size: usize,
    pub skew_mode: SkewnessMode,
    pub standardization: StandardizationMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tau: DEFAULT_TAU,
            grid_size: DEFAULT_GRID_SIZE,
            skew_mode: SkewnessMode::None,
            standardization: StandardizationMode::None,
        }
    }
}

impl FitConfig {
    /// `tau = 5 / n`, the sample-size-tuned alternative to the fixed default.
    pub fn tau_for_sample_size(n: usize) -> f64 {
        (5.0 / n as f64).min(0.49)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::config(format!(
                "tau must lie in (0, 0.5), got {}",
                self.tau
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::config(format!(
                "grid size must be at least 2, got {}",
                self.grid_size
            )));
        }
        if let SkewnessMode::Quantile(u) = self.skew_mode {
            SkewnessMode::quantile(u)?;
        }
        Ok(())
    }

    /// `grid_size` equispaced levels from `tau` to `1 - tau` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let k = self.grid_size;
        let (lo, hi) = (self.tau, 1.0 - self.tau);
        (0..k)
            .map(|i| {
                let w = i as f64 / (k - 1) as f64;
                lo * (1.0 - w) + hi * w
            })
            .collect()
    }
}

/// In-sample correct-classification rate at each grid level.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub thetas: Vec<f64>,
    pub psi_n: Vec<f64>,
}

impl AccuracyCurve {
    pub fn new(thetas: Vec<f64>, psi_n: Vec<f64>) -> Result<Self> {
        if thetas.len() != psi_n.len() {
            return Err(Error::invalid("curve levels and rates differ in length"));
        }
        if thetas.is_empty() {
            return Err(Error::invalid("curve is empty"));
        }
        Ok(AccuracyCurve { thetas, psi_n })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn max_psi(&self) -> f64 {
        self.psi_n.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rate at the level `theta`, if it is one of the curve's levels.
    pub fn psi_at(&self, theta: f64) -> Option<f64> {
        self.thetas
            .iter()
            .position(|&t| t == theta)
            .map(|i| self.psi_n[i])
    }
}

/// A fitted quantile classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileModel {
    pub theta_star: QuantileLevel,
    /// Row-major `g x p` quantiles of the transformed training data at `theta_star`.
    pub quantiles: Vec<f64>,
    pub flips: SignVector,
    pub scales: Vec<f64>,
    pub curve: AccuracyCurve,
    pub num_classes: usize,
    pub skew_mode: SkewnessMode,
    pub standardization: StandardizationMode,
}

impl QuantileModel {
    pub fn p(&self) -> usize {
        self.scales.len()
    }

    pub fn class_quantiles(&self, k: usize) -> &[f64] {
        let p = self.p();
        &self.quantiles[k * p..(k + 1) * p]
    }

    /// Applies the stored scales and sign flips to a raw point.
    pub fn transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.p() {
            return Err(Error::invalid(format!(
                "point has {} coordinates, model expects {}",
                z.len(),
                self.p()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        Ok(z.iter()
            .enumerate()
            .map(|(j, &v)| self.flips.factor(j) * (v / self.scales[j]))
            .collect())
    }

    /// Class scores of a raw point, one per class.
    pub fn scores(&self, z: &[f64]) -> Result<Vec<f64>> {
        let t = self.transform(z)?;
        Ok(class_scores(
            &t,
            &self.quantiles,
            self.p(),
            self.theta_star.value(),
        ))
    }

    pub fn predict(&self, z: &[f64]) -> Result<usize> {
        Ok(decide(&self.scores(z)?))
    }

    /// Predictions for every row of `data`.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<usize>> {
        data.rows().map(|r| self.predict(r)).collect()
    }

    /// Fraction of rows of `data` whose prediction differs from the label.
    pub fn error_rate(&self, data: &Dataset) -> Result<f64> {
        let preds = self.predict_all(data)?;
        let wrong = preds
            .iter()
            .zip(data.labels())
            .filter(|(a, b)| a != b)
            .count();
        Ok(wrong as f64 / data.n() as f64)
    }
}

fn class_scores(z: &[f64], quantiles: &[f64], p: usize, theta: f64) -> Vec<f64> {
    quantiles
        .chunks_exact(p)
        .map(|q| score_unchecked(z, q, theta))
        .collect()
}

/// Index of the smallest score.
///
/// With two classes an exact tie goes to class 1 (class 0 needs a strictly
/// smaller score); with more classes the lowest tied index wins.
pub fn decide(scores: &[f64]) -> usize {
    if scores.len() == 2 {
        return if scores[0] < scores[1] { 0 } else { 1 };
    }
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = k;
        }
    }
    best
}

/// Training data after scaling and sign unification, with per-class sorted
/// columns ready for quantile lookups at any level.
#[derive(Debug, Clone)]
pub struct PreparedTraining {
    data: Dataset,
    sorted: Vec<Vec<SortedSample>>,
    scales: Vec<f64>,
    flips: SignVector,
    config: FitConfig,
}

impl PreparedTraining {
    pub fn new(data: &Dataset, config: &FitConfig) -> Result<Self> {
        config.validate()?;
        let counts = data.class_counts();
        if let Some(k) = counts.iter().position(|&c| c < 2) {
            return Err(Error::invalid(format!(
                "class {k} has {} training observation(s); at least 2 are required",
                counts[k]
            )));
        }
        let smallest = *counts.iter().min().unwrap();
        if config.tau * (smallest as f64) < 1.0 && !SMALL_CLASS_WARNED.swap(true, Ordering::Relaxed)
        {
            warn!(
                "tau = {} leaves less than one observation below the tau-quantile of the smallest class ({smallest})",
                config.tau
            );
        }
        let scales = compute_scales(data, &config.standardization)?;
        let scaled = apply_scales(data, &scales)?;
        let flips = compute_sign_flips(&scaled, config.skew_mode)?;
        let transformed = apply_sign_flips(&scaled, &flips)?;
        let sorted = transformed.sorted_class_columns();
        Ok(PreparedTraining {
            data: transformed,
            sorted,
            scales,
            flips,
            config: config.clone(),
        })
    }

    pub fn transformed(&self) -> &Dataset {
        &self.data
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn flips(&self) -> &SignVector {
        &self.flips
    }

    /// Row-major `g x p` per-class quantiles at `theta`.
    pub fn quantiles_at(&self, theta: QuantileLevel) -> Vec<f64> {
        self.sorted
            .iter()
            .flat_map(|cols| cols.iter().map(move |s| s.quantile(theta)))
            .collect()
    }

    /// Number of training points classified correctly with the training
    /// quantiles at `theta` (no point is held out of its own class).
    pub fn correct_count(&self, theta: QuantileLevel) -> usize {
        let q = self.quantiles_at(theta);
        let p = self.data.p();
        self.data
            .rows()
            .zip(self.data.labels())
            .filter(|(row, &label)| decide(&class_scores(row, &q, p, theta.value())) == label)
            .count()
    }

    pub fn psi_n(&self, theta: QuantileLevel) -> f64 {
        self.correct_count(theta) as f64 / self.data.n() as f64
    }

    /// Rates over `grid`, evaluated in parallel; identical to sequential evaluation.
    pub fn accuracy_curve(&self, grid: &[f64]) -> Result<AccuracyCurve> {
        let levels = grid
            .iter()
            .map(|&t| QuantileLevel::new(t))
            .collect::<Result<Vec<_>>>()?;
        let psi_n = levels.par_iter().map(|&t| self.psi_n(t)).collect();
        AccuracyCurve::new(grid.to_vec(), psi_n)
    }

    /// Model at an arbitrary level, carrying `curve` as its training record.
    pub fn model_at(&self, theta: QuantileLevel, curve: AccuracyCurve) -> QuantileModel {
        QuantileModel {
            theta_star: theta,
            quantiles: self.quantiles_at(theta),
            flips: self.flips.clone(),
            scales: self.scales.clone(),
            curve,
            num_classes: self.data.num_classes(),
            skew_mode: self.config.skew_mode,
            standardization: self.config.standardization.clone(),
        }
    }
}

/// Fits the classifier, selecting the level with the best training rate.
pub fn fit(data: &Dataset, config: &FitConfig) -> Result<QuantileModel> {
    let prepared = PreparedTraining::new(data, config)?;
    let curve = prepared.accuracy_curve(&config.grid())?;
    let theta = select_theta(&curve)?;
    Ok(prepared.model_at(theta, curve))
}

/// Fits the classifier at a fixed level, skipping the search.
pub fn fit_at(data: &Dataset, config: &FitConfig, theta: QuantileLevel) -> Result<QuantileModel> {
    let prepared = PreparedTraining::new(data, config)?;
    let curve = prepared.accuracy_curve(&[theta.value()])?;
    Ok(prepared.model_at(theta, curve))
}
