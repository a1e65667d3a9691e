use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

use super::{fit, FitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Folds {
    LeaveOneOut,
    K(usize),
}

impl fmt::Display for Folds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Folds::LeaveOneOut => write!(f, "loo"),
            Folds::K(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Folds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "loo" => Ok(Folds::LeaveOneOut),
            other => other
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 2)
                .map(Folds::K)
                .ok_or_else(|| {
                    Error::config(format!(
                        "folds must be `loo` or an integer >= 2, got `{other}`"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Misclassification rate over all held-out points.
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / n)`.
    pub stderr: f64,
    /// Level selected in each training fold.
    pub fold_thetas: Vec<f64>,
}

impl CvResult {
    pub fn mean_theta(&self) -> f64 {
        self.fold_thetas.iter().sum::<f64>() / self.fold_thetas.len() as f64
    }
}

pub fn binomial_stderr(rate: f64, n: usize) -> f64 {
    (rate * (1.0 - rate) / n as f64).sqrt()
}

/// Fold index for every row. Within each class the rows are shuffled with
/// `seed` and dealt round-robin, continuing where the previous class stopped,
/// so class proportions and fold sizes stay balanced.
pub fn stratified_folds(data: &Dataset, folds: Folds, seed: u64) -> Result<Vec<usize>> {
    let n = data.n();
    let k = match folds {
        Folds::LeaveOneOut => return Ok((0..n).collect()),
        Folds::K(k) => k,
    };
    if k < 2 || k > n {
        return Err(Error::config(format!(
            "cannot split {n} observations into {k} folds"
        )));
    }
    let mut assignment = vec![0; n];
    let mut next = 0;
    for class in 0..data.num_classes() {
        let mut members: Vec<usize> = (0..n).filter(|&i| data.labels()[i] == class).collect();
        let mut rng = stream_rng(seed, &[0x6366_6f6c_6473, class as u64]);
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Cross-validated misclassification rate; the level is selected inside each
/// training fold.
pub fn cross_validate(
    data: &Dataset,
    config: &FitConfig,
    folds: Folds,
    seed: u64,
) -> Result<CvResult> {
    config.validate()?;
    let assignment = stratified_folds(data, folds, seed)?;
    let num_folds = assignment.iter().max().map_or(0, |m| m + 1);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..num_folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.n()).partition(|&i| assignment[i] == f);
            (train, test)
        })
        .collect();
    for (f, (train, _)) in splits.iter().enumerate() {
        let mut counts = vec![0usize; data.num_classes()];
        for &i in train {
            counts[data.labels()[i]] += 1;
        }
        if let Some(c) = counts.iter().position(|&m| m < 2) {
            return Err(Error::config(format!(
                "training part of fold {f} keeps {} observation(s) of class {c}; at least 2 are required",
                counts[c]
            )));
        }
    }
    let per_fold: Vec<(usize, f64)> = splits
        .par_iter()
        .map(|(train, test)| {
            let model = fit(&data.subset(train)?, config)?;
            let mut wrong = 0;
            for &i in test {
                if model.predict(data.row(i))? != data.labels()[i] {
                    wrong += 1;
                }
            }
            Ok((wrong, model.theta_star.value()))
        })
        .collect::<Result<_>>()?;
    let wrong: usize = per_fold.iter().map(|(w, _)| w).sum();
    let rate = wrong as f64 / data.n() as f64;
    Ok(CvResult {
        rate,
        stderr: binomial_stderr(rate, data.n()),
        fold_thetas: per_fold.into_iter().map(|(_, t)| t).collect(),
    })
}
