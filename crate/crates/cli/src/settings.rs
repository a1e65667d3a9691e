//! Merges the optional experiment file with command-line flags.
//!
//! ```ini
//! [fit]
//! tau = 0.02
//! grid = 49
//! skew = galton
//! standardize = pooled
//!
//! [scenario]
//! name = t3
//! n = 50
//! p = 50
//! fraction = 1
//! dependent = false
//!
//! [experiment]
//! reps = 20
//! seed = 1
//! baselines = centroid,median
//! folds = loo
//! workers = 4
//!
//! [data]
//! train = train.csv
//! test = test.csv
//!
//! [theory]
//! problem = chisq
//! grid = 199
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use quantcls::classifier::{DEFAULT_GRID_SIZE, DEFAULT_TAU};
use quantcls::experiment::{Baseline, DEFAULT_REPLICATIONS};
use quantcls::simgen::{Scenario, ScenarioSpec};
use quantcls::{FitConfig, Folds, SkewnessMode, StandardizationMode};

use crate::{FitArgs, ScenarioArgs, SplitArgs};

pub const DEFAULT_SEED: u64 = 1;
const DEFAULT_THEORY_GRID: usize = 199;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Lib(quantcls::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.as_ref().display()))
    }

    pub fn is_config(&self) -> bool {
        match self {
            CliError::Config(_) => true,
            CliError::Data(_) => false,
            CliError::Lib(e) => e.is_config_error(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Data(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<quantcls::Error> for CliError {
    fn from(e: quantcls::Error) -> Self {
        CliError::Lib(e)
    }
}

pub struct Settings {
    file: Option<(PathBuf, Ini)>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            None => None,
            Some(p) => {
                let ini = Ini::load_from_file(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                Some((p.to_path_buf(), ini))
            }
        };
        Ok(Settings { file })
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.file.as_ref()?.1.section(Some(section))?.get(key)
    }

    /// Flag value if given, else the file entry parsed as `T`.
    fn pick<T: FromStr>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(section, key) {
            None => Ok(None),
            Some(text) => text
                .trim()
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("[{section}] {key} = {text}: {e}"))),
        }
    }

    /// Path entries in the file are relative to the file's directory.
    fn path(&self, flag: Option<PathBuf>, section: &str, key: &str) -> Option<PathBuf> {
        flag.or_else(|| {
            let (file, _) = self.file.as_ref()?;
            let rel = PathBuf::from(self.raw(section, key)?.trim());
            Some(file.parent().map_or(rel.clone(), |dir| dir.join(&rel)))
        })
    }

    pub fn workers(&self, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        let w = self.pick(flag, "experiment", "workers")?;
        if w == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(w)
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        Ok(self
            .pick(flag, "experiment", "seed")?
            .unwrap_or(DEFAULT_SEED))
    }

    pub fn replications(&self, flag: Option<usize>) -> Result<usize, CliError> {
        Ok(self
            .pick(flag, "experiment", "reps")?
            .unwrap_or(DEFAULT_REPLICATIONS))
    }

    pub fn folds(&self, flag: Option<&str>) -> Result<Folds, CliError> {
        let text = self.pick(flag.map(str::to_string), "experiment", "folds")?;
        Ok(text.as_deref().unwrap_or("loo").parse::<Folds>()?)
    }

    pub fn baselines(&self, flag: Option<&str>) -> Result<Vec<Baseline>, CliError> {
        let text = self.pick(flag.map(str::to_string), "experiment", "baselines")?;
        match text {
            None => Ok(vec![Baseline::Centroid, Baseline::Median]),
            Some(t) => t
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.parse::<Baseline>().map_err(CliError::from))
                .collect(),
        }
    }

    pub fn fit_config(&self, args: &FitArgs) -> Result<FitConfig, CliError> {
        let tau = self.pick(args.tau, "fit", "tau")?.unwrap_or(DEFAULT_TAU);
        let grid_size = self
            .pick(args.grid, "fit", "grid")?
            .unwrap_or(DEFAULT_GRID_SIZE);
        let skew_mode = match self.pick(args.skew.clone(), "fit", "skew")? {
            None => SkewnessMode::None,
            Some(s) => s.parse()?,
        };
        let standardization = match self.pick(args.standardize.clone(), "fit", "standardize")? {
            None => StandardizationMode::None,
            Some(s) => self.standardization(&s)?,
        };
        let config = FitConfig {
            tau,
            grid_size,
            skew_mode,
            standardization,
        };
        config.validate()?;
        Ok(config)
    }

    /// `groups:<arg>` names a file of group ids when such a file exists and
    /// is otherwise read as an inline list.
    fn standardization(&self, text: &str) -> Result<StandardizationMode, CliError> {
        if let Some(arg) = text.trim().strip_prefix("groups:") {
            let path = Path::new(arg);
            if path.is_file() {
                let list = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                return Ok(StandardizationMode::GroupMap(
                    quantcls::standardize::parse_group_list(&list)?,
                ));
            }
        }
        Ok(text.parse()?)
    }

    pub fn scenario(&self, args: &ScenarioArgs) -> Result<ScenarioSpec, CliError> {
        let name = self
            .pick(args.scenario.clone(), "scenario", "name")?
            .ok_or_else(|| {
                CliError::Config("no scenario given (use --scenario or [scenario] name)".into())
            })?;
        let scenario: Scenario = name.parse()?;
        let n = self
            .pick(args.n, "scenario", "n")?
            .ok_or_else(|| CliError::Config("scenario size missing (use --n)".into()))?;
        let p = self
            .pick(args.p, "scenario", "p")?
            .ok_or_else(|| CliError::Config("scenario dimension missing (use --p)".into()))?;
        let mut spec = ScenarioSpec::new(scenario, n, p);
        spec.relevant_fraction = self
            .pick(args.fraction, "scenario", "fraction")?
            .unwrap_or(1.0);
        spec.dependent =
            args.dependent || self.pick(None, "scenario", "dependent")?.unwrap_or(false);
        spec.validate()?;
        Ok(spec)
    }

    /// Train/test files, if either the flags or the file name both.
    pub fn data_files(&self, args: &SplitArgs) -> Result<Option<(PathBuf, PathBuf)>, CliError> {
        let train = self.path(args.train.clone(), "data", "train");
        let test = self.path(args.test.clone(), "data", "test");
        match (train, test) {
            (Some(a), Some(b)) => Ok(Some((a, b))),
            (None, None) => Ok(None),
            _ => Err(CliError::Config(
                "give both --train and --test, or neither".into(),
            )),
        }
    }

    pub fn theory(
        &self,
        problem: Option<&str>,
        grid: Option<usize>,
    ) -> Result<(String, usize), CliError> {
        let name = self
            .pick(problem.map(str::to_string), "theory", "problem")?
            .unwrap_or_else(|| "gaussian".to_string());
        let k = self
            .pick(grid, "theory", "grid")?
            .unwrap_or(DEFAULT_THEORY_GRID);
        if k == 0 {
            return Err(CliError::Config(
                "theory grid needs at least one level".into(),
            ));
        }
        Ok((name, k))
    }
}
