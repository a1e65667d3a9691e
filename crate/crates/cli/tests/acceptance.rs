//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, RngCore};

use quantcls::classifier::{DEFAULT_GRID_SIZE, DEFAULT_TAU};
use quantcls::experiment::{run_experiment, DataSource, ExperimentConfig};
use quantcls::rng::stream_rng;
use quantcls::simgen::{generate, Scenario, ScenarioSpec};
use quantcls::skewness::{
    apply_sign_flips, class_averaged_skewness, compute_sign_flips, quantile_skewness,
    standardized_third_moment,
};
use quantcls::standardize::standardize;
use quantcls::theory::{
    interior_grid, optimal_theta_scan, psi_by_regions, psi_exponential_shift, psi_lemma1,
    psi_monte_carlo, Exponential, UnivariateDistribution, UnivariateProblem,
};
use quantcls::{
    empirical_quantile, fit, fit_at, median_classify, quantile_distance, Dataset, FitConfig,
    QuantileLevel, SkewnessMode, SortedSample, StandardizationMode,
};

/// Master seed shared by every randomized criterion.
const SEED: u64 = 1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fit_grid() -> Vec<f64> {
    FitConfig::default().grid()
}

fn theory_optima() -> Outcome {
    let grid = interior_grid(199);
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, problem, target, tol) in [
        ("gaussian", UnivariateProblem::gaussian_shift(), 0.5, 0.0),
        ("chisq", UnivariateProblem::chi_squared_shift(), 0.236, 0.01),
        (
            "normal-chisq",
            UnivariateProblem::normal_vs_chi_squared(),
            0.162,
            0.01,
        ),
    ] {
        let start = Instant::now();
        let (theta, _) = optimal_theta_scan(&problem, &grid).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        ok &= (theta - target).abs() <= tol + 1e-12 && secs < 1.0;
        notes.push(format!("{name} {theta} ({secs:.3}s)"));
    }
    check(ok, notes.join(", "))
}

fn exponential_closed_form() -> Outcome {
    let problem = UnivariateProblem::exponential_shift(1.0, 0.5, 0.5).unwrap();
    let grid = interior_grid(20);
    let mut lemma_gap: f64 = 0.0;
    let mut region_gap: f64 = 0.0;
    let mut decreasing = true;
    let mut prev = f64::INFINITY;
    for &t in &grid {
        let closed = psi_exponential_shift(1.0, 0.5, 0.5, t).unwrap();
        lemma_gap = lemma_gap.max((closed - psi_lemma1(&problem, t).unwrap()).abs());
        region_gap = region_gap.max((closed - psi_by_regions(&problem, t).unwrap()).abs());
        decreasing &= closed < prev;
        prev = closed;
    }
    check(
        lemma_gap <= 1e-12 && region_gap <= 1e-6 && decreasing,
        format!("lemma gap {lemma_gap:.1e}, region gap {region_gap:.1e}, decreasing {decreasing}"),
    )
}

fn random_dataset(rng: &mut impl Rng, n: usize, p: usize, g: usize) -> Dataset {
    let labels: Vec<usize> = (0..n).map(|i| i % g).collect();
    // Coarse values make ties between points and between distances common.
    let features = (0..n * p)
        .map(|_| rng.random_range(-8..8) as f64 * 0.5)
        .collect();
    Dataset::new(features, p, labels).unwrap()
}

fn median_equivalence() -> Outcome {
    let mut rng = stream_rng(SEED, &[3]);
    let config = FitConfig::default();
    let half = QuantileLevel::HALF;
    let (mut points, mut agree) = (0usize, 0usize);
    for _ in 0..200 {
        let g = rng.random_range(2..=3);
        let n = rng.random_range(2 * g..=40);
        let p = rng.random_range(1..=10);
        let train = random_dataset(&mut rng, n, p, g);
        let model = fit_at(&train, &config, half).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let z: Vec<f64> = (0..p)
                .map(|_| rng.random_range(-10..10) as f64 * 0.5)
                .collect();
            points += 1;
            if model.predict(&z).unwrap() == median_classify(&train, &z).unwrap() {
                agree += 1;
            }
        }
    }
    check(
        agree == points,
        format!("{agree}/{points} test points agree"),
    )
}

fn loss_minimizer() -> Outcome {
    let mut rng = stream_rng(SEED, &[4]);
    let grid = fit_grid();
    let mut mismatches = 0;
    let mut cases = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=50);
        let values: Vec<f64> = if rng.random::<bool>() {
            (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect()
        } else {
            (0..n).map(|_| rng.random_range(0..6) as f64).collect()
        };
        let sample = SortedSample::from_slice(&values).unwrap();
        for &t in &grid {
            let theta = QuantileLevel::new(t).unwrap();
            let loss = |q: f64| -> f64 {
                values
                    .iter()
                    .map(|&x| quantile_distance(x, q, theta).unwrap())
                    .sum()
            };
            let losses: Vec<f64> = sample.values().iter().map(|&q| loss(q)).collect();
            let best = losses.iter().cloned().fold(f64::INFINITY, f64::min);
            // Smallest sample point attaining the minimum; flat stretches of the
            // loss are compared up to rounding.
            let tol = 1e-9 * best.abs().max(1e-300);
            let argmin = sample
                .values()
                .iter()
                .zip(&losses)
                .find(|(_, &l)| l <= best + tol)
                .map(|(&q, _)| q)
                .unwrap();
            cases += 1;
            if argmin != empirical_quantile(&sample, theta) {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0,
        format!("{mismatches} mismatches in {cases} cases"),
    )
}

fn experiment(scenario: Scenario, n: usize, p: usize, skew: SkewnessMode) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(DataSource::Scenario(ScenarioSpec::new(scenario, n, p)));
    config.fit.skew_mode = skew;
    config.replications = 20;
    config.seed = SEED;
    config
}

fn scenario_replication() -> Outcome {
    let start = Instant::now();
    // Half-width for a published mean with standard deviation `sd` over 20 replications.
    let band = |sd: f64| 0.05f64.max(2.0 * sd / 20f64.sqrt());
    let mut notes = Vec::new();
    let mut ok = true;

    let t3 = run_experiment(&experiment(Scenario::T3Shift, 50, 50, SkewnessMode::GALTON)).unwrap();
    let qcg1 = t3.row("quantile").unwrap().mean_error;
    let mc1 = t3.row("median").unwrap().mean_error;
    let pass = (qcg1 - 0.17).abs() <= band(0.06);
    ok &= pass;
    notes.push(format!("t3 QCG {qcg1:.3} vs 0.17 [{}]", verdict(pass)));
    let pass = (mc1 - 0.17).abs() <= band(0.05);
    ok &= pass;
    notes.push(format!("t3 MC {mc1:.3} vs 0.17 [{}]", verdict(pass)));

    let big = run_experiment(&experiment(
        Scenario::LognormalShift,
        500,
        100,
        SkewnessMode::Moment,
    ))
    .unwrap();
    let row = big.row("quantile").unwrap();
    let theta = row.theta.unwrap().0;
    let pass = row.mean_error <= 0.02 && theta <= 0.05;
    ok &= pass;
    notes.push(format!(
        "lognormal n500 QCS {:.4}, mean theta {theta:.3} [{}]",
        row.mean_error,
        verdict(pass)
    ));

    let qcs = run_experiment(&experiment(
        Scenario::LognormalShift,
        50,
        50,
        SkewnessMode::Moment,
    ))
    .unwrap();
    let qcs = qcs.row("quantile").unwrap().mean_error;
    let pass = (qcs - 0.20).abs() <= band(0.07);
    ok &= pass;
    notes.push(format!(
        "lognormal QCS {qcs:.3} vs 0.20 [{}]",
        verdict(pass)
    ));

    let qcg = run_experiment(&experiment(
        Scenario::LognormalShift,
        50,
        50,
        SkewnessMode::GALTON,
    ))
    .unwrap();
    let qcg = qcg.row("quantile").unwrap().mean_error;
    let pass = (qcg - 0.25).abs() <= band(0.09);
    ok &= pass;
    notes.push(format!(
        "lognormal QCG {qcg:.3} vs 0.25 [{}]",
        verdict(pass)
    ));

    let secs = start.elapsed().as_secs_f64();
    notes.push(format!("{secs:.1}s"));
    check(ok && secs < 600.0, notes.join("; "))
}

fn monte_carlo_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, problem) in [
        UnivariateProblem::gaussian_shift(),
        UnivariateProblem::chi_squared_shift(),
        UnivariateProblem::exponential_shift(1.0, 0.5, 0.5).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        for (k, &t) in [0.1, 0.25, 0.5, 0.75, 0.9].iter().enumerate() {
            let q = problem.true_quantiles(t);
            let level = QuantileLevel::new(t).unwrap();
            let seed = quantcls::rng::derive_seed(SEED, &[6, i as u64, k as u64]);
            let mc = psi_monte_carlo(problem, &q, level, 100_000, seed).unwrap();
            let exact = psi_lemma1(problem, t).unwrap();
            worst = worst.max((mc.estimate - exact).abs() / mc.stderr);
        }
    }
    check(worst <= 4.0, format!("largest deviation {worst:.2} stderr"))
}

fn exponential_sample(n: usize, path: &[u64]) -> Dataset {
    let base = Exponential { rate: 1.0 };
    let mut rng = stream_rng(SEED, path);
    let m = n / 2;
    let features: Vec<f64> = (0..n)
        .map(|i| base.sample(&mut rng as &mut dyn RngCore) + if i < m { 0.0 } else { 0.5 })
        .collect();
    Dataset::new(features, 1, (0..n).map(|i| usize::from(i >= m)).collect()).unwrap()
}

fn consistency_trend() -> Outcome {
    let problem = UnivariateProblem::exponential_shift(1.0, 0.5, 0.5).unwrap();
    let grid = fit_grid();
    let (_, best) = optimal_theta_scan(&problem, &grid).unwrap();
    let config = FitConfig::default();
    let mut medians = Vec::new();
    for n in [50usize, 200, 1000] {
        let mut gaps: Vec<f64> = (0..50u64)
            .map(|r| {
                let data = exponential_sample(n, &[7, n as u64, r]);
                let theta = fit(&data, &config).unwrap().theta_star.value();
                best - psi_lemma1(&problem, theta).unwrap()
            })
            .collect();
        gaps.sort_by(f64::total_cmp);
        medians.push(0.5 * (gaps[24] + gaps[25]));
    }
    let ok = medians.windows(2).all(|w| w[1] <= w[0]) && medians[2] < 0.01;
    check(
        ok,
        format!("median gaps {medians:.4?} at n = 50, 200, 1000"),
    )
}

fn dimension_trend() -> Outcome {
    let mut errors = Vec::new();
    for p in [10usize, 50, 250] {
        let report = run_experiment(&experiment(
            Scenario::LognormalShift,
            100,
            p,
            SkewnessMode::Moment,
        ))
        .unwrap();
        errors.push(report.row("quantile").unwrap().mean_error);
    }
    let ok = errors.windows(2).all(|w| w[1] < w[0]) && errors[2] < 0.05;
    check(ok, format!("mean errors {errors:.3?} at p = 10, 50, 250"))
}

fn skewness_properties() -> Outcome {
    let mut rng = stream_rng(SEED, &[9]);
    let mut notes = Vec::new();
    let mut ok = true;

    let (mut anti, mut invariant) = (true, true);
    for _ in 0..200 {
        let n = 2 * rng.random_range(2..100) + 1;
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random::<f64>().powi(3) * 4.0 - 1.0)
            .collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(0.1..10.0));
        let moved: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let s = |v: &[f64]| SortedSample::from_slice(v).unwrap();
        let m = |v: &[f64]| standardized_third_moment(&s(v)).unwrap();
        let g = |v: &[f64]| quantile_skewness(&s(v), 0.75).unwrap().value;
        anti &= (m(&neg) + m(&x)).abs() < 1e-12 && g(&neg) == -g(&x);
        invariant &= (m(&moved) - m(&x)).abs() < 1e-9 && (g(&moved) - g(&x)).abs() < 1e-9;
    }
    ok &= anti && invariant;
    notes.push(format!(
        "antisymmetry {anti}, affine invariance {invariant}"
    ));

    let exp = Exponential { rate: 1.0 };
    let mut erng = stream_rng(SEED, &[9, 1]);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| exp.sample(&mut erng as &mut dyn RngCore))
        .collect();
    let galton = quantile_skewness(&SortedSample::from_slice(&draws).unwrap(), 0.75)
        .unwrap()
        .value;
    let pass = (galton - 0.2619).abs() <= 0.02;
    ok &= pass;
    notes.push(format!("Exp(1) Galton {galton:.4}"));

    // Odd class sizes keep type-1 quantile skewness exactly antisymmetric.
    let mut all_nonnegative = true;
    for (mode, dependent) in [
        (SkewnessMode::Moment, false),
        (SkewnessMode::GALTON, false),
        (SkewnessMode::Moment, true),
        (SkewnessMode::GALTON, true),
    ] {
        let mut spec = ScenarioSpec::new(Scenario::MixedBlocks, 502, 50);
        spec.dependent = dependent;
        spec.seed = SEED;
        let (train, test) = generate(&spec).unwrap();
        let (train, _, _) =
            standardize(&train, &test, &StandardizationMode::PooledWithinVar).unwrap();
        let flips = compute_sign_flips(&train, mode).unwrap();
        let flipped = apply_sign_flips(&train, &flips).unwrap();
        all_nonnegative &= class_averaged_skewness(&flipped, mode)
            .unwrap()
            .iter()
            .all(|&s| s >= 0.0);
    }
    ok &= all_nonnegative;
    notes.push(format!(
        "scenario 3 flipped skewness nonnegative {all_nonnegative}"
    ));
    check(ok, notes.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_quantcls");
    let mut outputs = Vec::new();
    for workers in [1, 4, 8] {
        for run in 0..2 {
            let out = dir.path().join(format!("report-{workers}-{run}.csv"));
            let status = Command::new(bin)
                .args([
                    "experiment",
                    "--scenario",
                    "mixed",
                    "--n",
                    "50",
                    "--p",
                    "25",
                    "--fraction",
                    "0.5",
                ])
                .args([
                    "--dependent",
                    "--skew",
                    "galton",
                    "--standardize",
                    "pooled",
                    "--reps",
                    "20",
                ])
                .args([
                    "--seed",
                    &SEED.to_string(),
                    "--workers",
                    &workers.to_string(),
                ])
                .arg("--out")
                .arg(&out)
                .env("RUST_LOG", "error")
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("experiment exited with {status}"));
            }
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        identical,
        format!("{} reports byte-identical: {identical}", outputs.len()),
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "out of band"
    }
}

fn main() -> ExitCode {
    assert_eq!((DEFAULT_TAU, DEFAULT_GRID_SIZE), (0.02, 49));
    let criteria: [Criterion; 10] = [
        ("theory optima", theory_optima),
        ("exponential closed form", exponential_closed_form),
        ("median equivalence", median_equivalence),
        ("quantile-loss minimizer", loss_minimizer),
        ("scenario replication", scenario_replication),
        ("Monte-Carlo vs closed form", monte_carlo_agreement),
        ("consistency trend", consistency_trend),
        ("dimension trend", dimension_trend),
        ("skewness properties", skewness_properties),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
