//! Component-wise quantile classifier.
//!
//! A point is assigned to the class whose per-variable `theta`-quantiles are
//! closest under the asymmetric (check-loss) distance. The level `theta` is
//! chosen on the training data by maximizing the in-sample rate of correct
//! classification over a grid in `[tau, 1 - tau]`, optionally after
//! standardizing the columns and flipping variables so that they all share a
//! positive skewness direction.
//!
//! Besides the classifier the crate evaluates the exact correct-classification
//! probability for univariate two-class problems ([`theory`]), generates the
//! simulation scenarios used to benchmark the method ([`simgen`]), and runs
//! replicated experiments ([`experiment`]).

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod quantile;
pub mod rng;
pub mod simgen;
pub mod skewness;
pub mod special;
pub mod standardize;
pub mod theory;

pub use classifier::{
    binomial_stderr, centroid_classify, cross_validate, fit, fit_at, median_classify, select_theta,
    AccuracyCurve, CvResult, FitConfig, Folds, NearestCenter, QuantileModel,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
pub use quantile::{
    class_score, empirical_quantile, empirical_quantile_loss, quantile_distance, QuantileLevel,
    SortedSample,
};
pub use simgen::{Scenario, ScenarioSpec};
pub use skewness::{SignVector, SkewnessMode};
pub use standardize::StandardizationMode;
