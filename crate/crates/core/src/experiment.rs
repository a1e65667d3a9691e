//! Replicated train/test experiments, cross-validation runs and level curves.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::classifier::{
    cross_validate, fit, CvResult, FitConfig, Folds, NearestCenter, PreparedTraining,
};
use crate::dataset::{fmt_f64, Dataset};
use crate::error::{Error, Result};
use crate::quantile::QuantileLevel;
use crate::rng::derive_seed;
use crate::simgen::{generate, ScenarioSpec};

pub const DEFAULT_REPLICATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    Centroid,
    Median,
}

impl Baseline {
    fn model(self, train: &Dataset) -> NearestCenter {
        match self {
            Baseline::Centroid => NearestCenter::centroid(train),
            Baseline::Median => NearestCenter::median(train),
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::Centroid => "centroid",
            Baseline::Median => "median",
        })
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "centroid" => Ok(Baseline::Centroid),
            "median" => Ok(Baseline::Median),
            other => Err(Error::config(format!(
                "unknown baseline `{other}` (expected centroid or median)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Fresh draws per replication; the spec's own seed is replaced by the
    /// replication seed.
    Scenario(ScenarioSpec),
    /// One fixed split, read once.
    Files { train: PathBuf, test: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub fit: FitConfig,
    pub replications: usize,
    pub baselines: Vec<Baseline>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(source: DataSource) -> Self {
        ExperimentConfig {
            source,
            fit: FitConfig::default(),
            replications: DEFAULT_REPLICATIONS,
            baselines: vec![Baseline::Centroid, Baseline::Median],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        self.fit.validate()?;
        if let DataSource::Scenario(spec) = &self.source {
            spec.validate()?;
        }
        for (i, b) in self.baselines.iter().enumerate() {
            if self.baselines[..i].contains(b) {
                return Err(Error::config(format!("baseline `{b}` listed twice")));
            }
        }
        Ok(())
    }
}

/// One report row.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub mean_error: f64,
    /// Standard deviation over replications (divisor `r - 1`; 0 for one replication).
    pub sd_error: f64,
    pub replications: usize,
    /// Selected level statistics, quantile classifier only.
    pub theta: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<MethodSummary>,
}

impl ExperimentReport {
    pub fn row(&self, method: &str) -> Option<&MethodSummary> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,mean_error,sd_error,replications,mean_theta,sd_theta\n");
        for r in &self.rows {
            let (mt, st) = match r.theta {
                Some((m, s)) => (fmt_f64(m), fmt_f64(s)),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{mt},{st}",
                r.method,
                fmt_f64(r.mean_error),
                fmt_f64(r.sd_error),
                r.replications
            )
            .unwrap();
        }
        out
    }
}

/// Name of the quantile classifier row.
pub const QUANTILE_METHOD: &str = "quantile";

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

struct Replication {
    quantile_error: f64,
    theta: f64,
    baseline_errors: Vec<f64>,
}

fn replicate(train: &Dataset, test: &Dataset, config: &ExperimentConfig) -> Result<Replication> {
    let model = fit(train, &config.fit)?;
    let baseline_errors = config
        .baselines
        .iter()
        .map(|b| b.model(train).error_rate(test))
        .collect::<Result<Vec<_>>>()?;
    Ok(Replication {
        quantile_error: model.error_rate(test)?,
        theta: model.theta_star.value(),
        baseline_errors,
    })
}

/// Runs all replications in parallel. Replication `r` uses the seed
/// `derive_seed(config.seed, [r])`; results are aggregated in replication
/// order, so the report does not depend on the number of threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let reps: Vec<Replication> = match &config.source {
        DataSource::Scenario(spec) => (0..config.replications)
            .into_par_iter()
            .map(|r| {
                let spec = ScenarioSpec {
                    seed: derive_seed(config.seed, &[r as u64]),
                    ..spec.clone()
                };
                let (train, test) = generate(&spec)?;
                replicate(&train, &test, config)
            })
            .collect::<Result<_>>()?,
        DataSource::Files { train, test } => {
            let train = Dataset::read_csv(train)?;
            let test = Dataset::read_csv(test)?;
            let once = replicate(&train, &test, config)?;
            (0..config.replications)
                .map(|_| Replication {
                    quantile_error: once.quantile_error,
                    theta: once.theta,
                    baseline_errors: once.baseline_errors.clone(),
                })
                .collect()
        }
    };
    let r = reps.len();
    let errors: Vec<f64> = reps.iter().map(|x| x.quantile_error).collect();
    let thetas: Vec<f64> = reps.iter().map(|x| x.theta).collect();
    let (mean_error, sd_error) = mean_sd(&errors);
    let mut rows = vec![MethodSummary {
        method: QUANTILE_METHOD.to_string(),
        mean_error,
        sd_error,
        replications: r,
        theta: Some(mean_sd(&thetas)),
    }];
    for (b, baseline) in config.baselines.iter().enumerate() {
        let errors: Vec<f64> = reps.iter().map(|x| x.baseline_errors[b]).collect();
        let (mean_error, sd_error) = mean_sd(&errors);
        rows.push(MethodSummary {
            method: baseline.to_string(),
            mean_error,
            sd_error,
            replications: r,
            theta: None,
        });
    }
    Ok(ExperimentReport { rows })
}

/// Cross-validates the classifier on a CSV file.
pub fn run_cv(
    path: impl AsRef<std::path::Path>,
    config: &FitConfig,
    folds: Folds,
    seed: u64,
) -> Result<CvResult> {
    let data = Dataset::read_csv(path)?;
    cross_validate(&data, config, folds, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub theta: f64,
    pub train_psi: f64,
    pub test_error: f64,
}

/// Training rate and test error over the level grid, with reference errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCurve {
    pub points: Vec<CurvePoint>,
    pub selected_theta: f64,
    pub selected_train_error: f64,
    pub selected_test_error: f64,
    pub centroid_test_error: f64,
    pub median_test_error: f64,
}

impl ThetaCurve {
    /// Long-format CSV: one `curve` row per level followed by `selected`,
    /// `centroid` and `median` reference rows (`train_psi` blank where it
    /// does not apply).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,theta,train_psi,train_error,test_error\n");
        for p in &self.points {
            writeln!(
                out,
                "curve,{},{},{},{}",
                fmt_f64(p.theta),
                fmt_f64(p.train_psi),
                fmt_f64(1.0 - p.train_psi),
                fmt_f64(p.test_error)
            )
            .unwrap();
        }
        writeln!(
            out,
            "selected,{},{},{},{}",
            fmt_f64(self.selected_theta),
            fmt_f64(1.0 - self.selected_train_error),
            fmt_f64(self.selected_train_error),
            fmt_f64(self.selected_test_error)
        )
        .unwrap();
        for (name, e) in [
            ("centroid", self.centroid_test_error),
            ("median", self.median_test_error),
        ] {
            writeln!(out, "{name},,,,{}", fmt_f64(e)).unwrap();
        }
        out
    }
}

/// Evaluates every grid level on one train/test pair.
pub fn emit_theta_curve(train: &Dataset, test: &Dataset, config: &FitConfig) -> Result<ThetaCurve> {
    let prepared = PreparedTraining::new(train, config)?;
    let curve = prepared.accuracy_curve(&config.grid())?;
    let points = curve
        .thetas
        .par_iter()
        .zip(&curve.psi_n)
        .map(|(&t, &psi)| {
            let model = prepared.model_at(QuantileLevel::new(t)?, curve.clone());
            Ok(CurvePoint {
                theta: t,
                train_psi: psi,
                test_error: model.error_rate(test)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = crate::classifier::select_theta(&curve)?;
    let selected = prepared.model_at(theta, curve);
    Ok(ThetaCurve {
        points,
        selected_theta: theta.value(),
        selected_train_error: 1.0 - prepared.psi_n(theta),
        selected_test_error: selected.error_rate(test)?,
        centroid_test_error: NearestCenter::centroid(train).error_rate(test)?,
        median_test_error: NearestCenter::median(train).error_rate(test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::Scenario;

    fn small_config() -> ExperimentConfig {
        let mut spec = ScenarioSpec::new(Scenario::T3Shift, 20, 4);
        spec.seed = 77;
        let mut c = ExperimentConfig::new(DataSource::Scenario(spec));
        c.replications = 4;
        c.seed = 5;
        c
    }

    #[test]
    fn mean_and_sd() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_sd(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn report_shape() {
        let report = run_experiment(&small_config()).unwrap();
        let methods: Vec<&str> = report.rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(methods, vec!["quantile", "centroid", "median"]);
        for r in &report.rows {
            assert!((0.0..=1.0).contains(&r.mean_error));
            assert!(r.sd_error >= 0.0);
            assert_eq!(r.replications, 4);
        }
        assert!(report.rows[0].theta.is_some());
        assert!(report.rows[1].theta.is_none());
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(2).unwrap().ends_with(",,"));
    }

    #[test]
    fn report_ignores_spec_seed_and_thread_count() {
        let a = run_experiment(&small_config()).unwrap().to_csv();
        let mut c = small_config();
        if let DataSource::Scenario(spec) = &mut c.source {
            spec.seed = 1234;
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| run_experiment(&c).unwrap().to_csv());
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors() {
        let mut c = small_config();
        c.replications = 0;
        assert!(run_experiment(&c).unwrap_err().is_config_error());
        let mut c = small_config();
        c.baselines = vec![Baseline::Median, Baseline::Median];
        assert!(run_experiment(&c).unwrap_err().is_config_error());
        assert!("knn".parse::<Baseline>().is_err());
    }

    #[test]
    fn curve_structure() {
        let mut spec = ScenarioSpec::new(Scenario::LognormalShift, 40, 3);
        spec.seed = 8;
        let (train, test) = generate(&spec).unwrap();
        let config = FitConfig {
            grid_size: 11,
            ..Default::default()
        };
        let curve = emit_theta_curve(&train, &test, &config).unwrap();
        assert_eq!(curve.points.len(), 11);
        for p in &curve.points {
            let k = p.train_psi * 40.0;
            assert!((k - k.round()).abs() < 1e-9);
        }
        let csv = curve.to_csv();
        assert_eq!(csv.lines().count(), 1 + 11 + 3);
    }
}
