//! `quantcls` command-line tool.

mod settings;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use quantcls::experiment::{
    emit_theta_curve, run_cv, run_experiment, DataSource, ExperimentConfig,
};
use quantcls::simgen::{generate, ScenarioSpec};
use quantcls::theory::{interior_grid, optimal_theta_scan, theory_curve, UnivariateProblem};
use quantcls::{fit, Dataset, QuantileModel};

use settings::{CliError, Settings};

/// Exit status for invalid configuration or arguments.
const EXIT_CONFIG: u8 = 2;
/// Exit status for unreadable or invalid data.
const EXIT_DATA: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "quantcls",
    version,
    about = "Component-wise quantile classifier"
)]
struct Cli {
    /// Experiment file with `[fit]`, `[scenario]`, `[experiment]`, `[data]`
    /// and `[theory]` sections; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct FitArgs {
    /// Trimming of the level search interval [tau, 1 - tau].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of grid levels.
    #[arg(long)]
    pub grid: Option<usize>,
    /// none, moment, galton or quantile:<u>.
    #[arg(long)]
    pub skew: Option<String>,
    /// none, pooled, range, iqr or groups:<file>.
    #[arg(long)]
    pub standardize: Option<String>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ScenarioArgs {
    /// t3, lognormal, mixed or beta.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Observations per set (both classes).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of variables.
    #[arg(long)]
    pub p: Option<usize>,
    /// Fraction of relevant variables in (0, 1].
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Equicorrelated relevant variables.
    #[arg(long)]
    pub dependent: bool,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SplitArgs {
    /// Training CSV (instead of a scenario).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test CSV (instead of a scenario).
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model on a labelled CSV and save it.
    Fit {
        #[arg(long)]
        train: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict labels for a CSV with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// CSV in the training layout; its `y` column is only used to report the error rate.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated error rate on a CSV.
    Cv {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        /// loo or a fold count.
        #[arg(long)]
        folds: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a train/test pair from a scenario.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; receives train.csv and test.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicated comparison of the quantile classifier with the baselines.
    Experiment {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of centroid,median (empty for none).
        #[arg(long)]
        baselines: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Theoretical correct-classification curve of a univariate problem.
    Theory {
        /// gaussian, chisq, exponential or normal-chisq.
        #[arg(long)]
        problem: Option<String>,
        /// Number of interior levels i / (k + 1).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Training rate and test error over the level grid for one split.
    Curve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn load_split(
    settings: &Settings,
    scenario: &ScenarioArgs,
    split: &SplitArgs,
    seed: Option<u64>,
) -> Result<DataSource, CliError> {
    match settings.data_files(split)? {
        Some((train, test)) => Ok(DataSource::Files { train, test }),
        None => {
            let mut spec = settings.scenario(scenario)?;
            spec.seed = settings.seed(seed)?;
            Ok(DataSource::Scenario(spec))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    if let Some(w) = settings.workers(cli.workers)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {w} workers: {e}")))?;
    }
    match cli.command {
        Command::Fit {
            train,
            fit: args,
            out,
        } => {
            let config = settings.fit_config(&args)?;
            let data = Dataset::read_csv(&train)?;
            let model = fit(&data, &config)?;
            info!("selected theta = {}", model.theta_star);
            model.save(&out)?;
        }
        Command::Predict { model, data, out } => {
            let model = QuantileModel::load(&model)?;
            let data = Dataset::read_csv(&data)?;
            let predictions = model.predict_all(&data)?;
            let wrong = predictions
                .iter()
                .zip(data.labels())
                .filter(|(a, b)| a != b)
                .count();
            eprintln!(
                "error rate against y column: {}",
                wrong as f64 / data.n() as f64
            );
            let mut text = String::from("y_pred\n");
            for k in predictions {
                text.push_str(&format!("{k}\n"));
            }
            write_output(out.as_deref(), &text)?;
        }
        Command::Cv {
            data,
            fit: args,
            folds,
            seed,
            out,
        } => {
            let config = settings.fit_config(&args)?;
            let folds = settings.folds(folds.as_deref())?;
            let result = run_cv(&data, &config, folds, settings.seed(seed)?)?;
            let thetas: Vec<String> = result.fold_thetas.iter().map(|t| t.to_string()).collect();
            let text = format!(
                "rate,stderr,mean_theta,folds\n{},{},{},{}\n",
                result.rate,
                result.stderr,
                result.mean_theta(),
                thetas.join(";")
            );
            write_output(out.as_deref(), &text)?;
        }
        Command::Simulate {
            scenario,
            seed,
            out,
        } => {
            let mut spec: ScenarioSpec = settings.scenario(&scenario)?;
            spec.seed = settings.seed(seed)?;
            let (train, test) = generate(&spec)?;
            fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            train.write_csv(out.join("train.csv"))?;
            test.write_csv(out.join("test.csv"))?;
        }
        Command::Experiment {
            scenario,
            split,
            fit: args,
            reps,
            seed,
            baselines,
            out,
        } => {
            let source = load_split(&settings, &scenario, &split, None)?;
            let mut config = ExperimentConfig::new(source);
            config.fit = settings.fit_config(&args)?;
            config.replications = settings.replications(reps)?;
            config.baselines = settings.baselines(baselines.as_deref())?;
            config.seed = settings.seed(seed)?;
            let report = run_experiment(&config)?;
            write_output(out.as_deref(), &report.to_csv())?;
        }
        Command::Theory { problem, grid, out } => {
            let (name, k) = settings.theory(problem.as_deref(), grid)?;
            let problem = UnivariateProblem::named(&name)?;
            let levels = interior_grid(k);
            let (theta, psi) = optimal_theta_scan(&problem, &levels)?;
            eprintln!("{name}: optimal theta = {theta}, psi = {psi}");
            let mut text = String::from("theta,psi,misclassification\n");
            for (t, p, m) in theory_curve(&problem, &levels)? {
                text.push_str(&format!("{t},{p},{m}\n"));
            }
            write_output(out.as_deref(), &text)?;
        }
        Command::Curve {
            scenario,
            split,
            fit: args,
            seed,
            out,
        } => {
            let config = settings.fit_config(&args)?;
            let (train, test) = match load_split(&settings, &scenario, &split, seed)? {
                DataSource::Files { train, test } => {
                    (Dataset::read_csv(train)?, Dataset::read_csv(test)?)
                }
                DataSource::Scenario(spec) => generate(&spec)?,
            };
            let curve = emit_theta_curve(&train, &test, &config)?;
            write_output(out.as_deref(), &curve.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_DATA
            })
        }
    }
}
