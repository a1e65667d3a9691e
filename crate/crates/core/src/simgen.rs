//! Simulated two-class benchmarks.
//!
//! Each scenario draws `n / 2` observations per class for a training and a
//! test set. The first `ceil(p * relevant_fraction)` columns carry the class
//! difference; the remaining noise columns follow the same base law in both
//! classes.
//!
//! | scenario     | relevant column, class 1 = class 0 law + shift      |
//! |--------------|------------------------------------------------------|
//! | `t3`         | Student t with 3 df, shift 0.5                       |
//! | `lognormal`  | `exp(W)`, `W ~ N(0, 1)`, shift 0.2                   |
//! | `mixed`      | five blocks `W`, `exp W`, `ln|W|`, `W^2`, `sqrt|W|`, shift 0.2 |
//! | `beta`       | centered `Beta(a, b)` with `a, b ~ U(0.1, 10)` per class |
//!
//! With `dependent = true` the latent Gaussians of the relevant columns are
//! equicorrelated with correlation [`RHO`] through one shared factor,
//! `W = sqrt(rho) G + sqrt(1 - rho) E`.
//!
//! Every column of every split draws from its own [`stream_rng`] path, so the
//! output is a pure function of the spec.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Latent equicorrelation of dependent relevant columns.
pub const RHO: f64 = 0.2;

const BLOCKS: usize = 5;

// Stream path tags.
const TAG_COLUMN: u64 = 1;
const TAG_FACTOR: u64 = 2;
const TAG_BETA_PARAMS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    T3Shift,
    LognormalShift,
    MixedBlocks,
    BetaRandom,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::T3Shift,
        Scenario::LognormalShift,
        Scenario::MixedBlocks,
        Scenario::BetaRandom,
    ];

    /// Location difference between the classes on relevant columns.
    pub fn shift(self) -> f64 {
        match self {
            Scenario::T3Shift => 0.5,
            Scenario::LognormalShift | Scenario::MixedBlocks => 0.2,
            Scenario::BetaRandom => 0.0,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::T3Shift => "t3",
            Scenario::LognormalShift => "lognormal",
            Scenario::MixedBlocks => "mixed",
            Scenario::BetaRandom => "beta",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "t3" | "t3_shift" | "1" => Ok(Scenario::T3Shift),
            "lognormal" | "lognormal_shift" | "2" => Ok(Scenario::LognormalShift),
            "mixed" | "mixed_blocks" | "3" => Ok(Scenario::MixedBlocks),
            "beta" | "beta_random" | "4" => Ok(Scenario::BetaRandom),
            other => Err(Error::config(format!(
                "unknown scenario `{other}` (expected t3, lognormal, mixed or beta)"
            ))),
        }
    }
}

/// Which of the two independently drawn sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn id(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Test => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    /// Total size of each set; even, half per class.
    pub n: usize,
    pub p: usize,
    pub relevant_fraction: f64,
    pub dependent: bool,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, n: usize, p: usize) -> Self {
        ScenarioSpec {
            scenario,
            n,
            p,
            relevant_fraction: 1.0,
            dependent: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::config(format!(
                "n must be even and at least 4, got {}",
                self.n
            )));
        }
        if self.p == 0 {
            return Err(Error::config("p must be at least 1"));
        }
        if !(self.relevant_fraction > 0.0 && self.relevant_fraction <= 1.0) {
            return Err(Error::config(format!(
                "relevant fraction must lie in (0, 1], got {}",
                self.relevant_fraction
            )));
        }
        if self.dependent && self.scenario == Scenario::BetaRandom {
            return Err(Error::config("the beta scenario has no dependent variant"));
        }
        Ok(())
    }

    /// Number of leading relevant columns, `ceil(p * fraction)`.
    pub fn relevant_count(&self) -> usize {
        // Guard against products such as 0.1 * 30 = 3.0000000000000004.
        let r = (self.p as f64 * self.relevant_fraction - 1e-9).ceil() as usize;
        r.clamp(1, self.p)
    }

    pub fn class_size(&self) -> usize {
        self.n / 2
    }

    /// Transformation block of column `j` in the mixed scenario. Relevant and
    /// noise columns are each cut into five near-equal consecutive blocks.
    pub fn block_of(&self, j: usize) -> usize {
        let r = self.relevant_count();
        let (index, len) = if j < r { (j, r) } else { (j - r, self.p - r) };
        index * BLOCKS / len
    }
}

fn block_transform(block: usize, w: f64) -> f64 {
    match block {
        0 => w,
        1 => w.exp(),
        2 => w.abs().ln(),
        3 => w * w,
        _ => w.abs().sqrt(),
    }
}

/// Draws both sets.
pub fn generate(spec: &ScenarioSpec) -> Result<(Dataset, Dataset)> {
    Ok((
        generate_split(spec, Split::Train)?,
        generate_split(spec, Split::Test)?,
    ))
}

fn labels(spec: &ScenarioSpec) -> Vec<usize> {
    let m = spec.class_size();
    (0..spec.n).map(|i| usize::from(i >= m)).collect()
}

/// Draws one set: rows `0..n/2` are class 0, the rest class 1.
pub fn generate_split(spec: &ScenarioSpec, split: Split) -> Result<Dataset> {
    spec.validate()?;
    let factor = shared_factor(spec, split);
    let columns: Vec<Vec<f64>> = (0..spec.p)
        .into_par_iter()
        .map(|j| column(spec, split, j, factor.as_deref()).0)
        .collect();
    let mut features = vec![0.0; spec.n * spec.p];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            features[i * spec.p + j] = v;
        }
    }
    Dataset::with_classes(features, spec.p, labels(spec), 2)
}

/// The latent Gaussian layer of the relevant columns as an `n x r` dataset
/// (scenarios other than `beta`).
pub fn latent_relevant(spec: &ScenarioSpec, split: Split) -> Result<Dataset> {
    spec.validate()?;
    if spec.scenario == Scenario::BetaRandom {
        return Err(Error::invalid(
            "the beta scenario has no latent Gaussian layer",
        ));
    }
    let r = spec.relevant_count();
    let factor = shared_factor(spec, split);
    let mut features = vec![0.0; spec.n * r];
    for j in 0..r {
        let latent = column(spec, split, j, factor.as_deref()).1;
        for (i, &v) in latent.iter().enumerate() {
            features[i * r + j] = v;
        }
    }
    Dataset::with_classes(features, r, labels(spec), 2)
}

fn shared_factor(spec: &ScenarioSpec, split: Split) -> Option<Vec<f64>> {
    if !spec.dependent {
        return None;
    }
    let mut rng = stream_rng(spec.seed, &[split.id(), TAG_FACTOR]);
    Some((0..spec.n).map(|_| rng.sample(StandardNormal)).collect())
}

/// Column `j` together with its latent Gaussian values (empty for `beta`).
fn column(
    spec: &ScenarioSpec,
    split: Split,
    j: usize,
    factor: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let relevant = j < spec.relevant_count();
    if spec.scenario == Scenario::BetaRandom {
        return (beta_column(spec, split, j, relevant), Vec::new());
    }
    let mut rng = stream_rng(spec.seed, &[split.id(), TAG_COLUMN, j as u64]);
    let m = spec.class_size();
    let shift = spec.scenario.shift();
    let factor = if relevant { factor } else { None };
    let mut values = Vec::with_capacity(spec.n);
    let mut latent = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let e: f64 = rng.sample(StandardNormal);
        let w = match factor {
            Some(g) => RHO.sqrt() * g[i] + (1.0 - RHO).sqrt() * e,
            None => e,
        };
        let base = match spec.scenario {
            Scenario::T3Shift => {
                let chi: f64 = (0..3)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        z * z
                    })
                    .sum();
                w / (chi / 3.0).sqrt()
            }
            Scenario::LognormalShift => w.exp(),
            Scenario::MixedBlocks => block_transform(spec.block_of(j), w),
            Scenario::BetaRandom => unreachable!(),
        };
        let moved = if relevant && i >= m {
            base + shift
        } else {
            base
        };
        values.push(moved);
        latent.push(w);
    }
    (values, latent)
}

/// `(a, b)` for a relevant column in class `k`, or for a noise column when
/// `k` is `None`. Parameters are shared by both splits.
pub fn beta_parameters(spec: &ScenarioSpec, j: usize, k: Option<usize>) -> (f64, f64) {
    let tag = k.map_or(2, |k| k as u64);
    let mut rng = stream_rng(spec.seed, &[TAG_BETA_PARAMS, tag, j as u64]);
    (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0))
}

fn beta_column(spec: &ScenarioSpec, split: Split, j: usize, relevant: bool) -> Vec<f64> {
    let mut rng = stream_rng(spec.seed, &[split.id(), TAG_COLUMN, j as u64]);
    let m = spec.class_size();
    let laws: Vec<(Beta<f64>, f64)> = (0..2)
        .map(|k| {
            let (a, b) = beta_parameters(spec, j, relevant.then_some(k));
            (Beta::new(a, b).expect("positive parameters"), a / (a + b))
        })
        .collect();
    (0..spec.n)
        .map(|i| {
            let (law, mean) = &laws[usize::from(i >= m)];
            law.sample(&mut rng) - mean
        })
        .collect()
}
