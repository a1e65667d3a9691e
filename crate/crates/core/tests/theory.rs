use std::sync::Arc;

use quantcls::theory::{
    interior_grid, optimal_theta_scan, psi_exponential_shift, psi_lemma1, psi_monte_carlo,
    theory_curve, Normal, UnivariateDistribution, UnivariateProblem,
};
use quantcls::QuantileLevel;

#[test]
fn monte_carlo_matches_exponential_closed_form() {
    let problem = UnivariateProblem::exponential_shift(1.0, 0.5, 0.5).unwrap();
    for (i, &t) in [0.2, 0.5, 0.8].iter().enumerate() {
        let q = problem.true_quantiles(t);
        let mc = psi_monte_carlo(
            &problem,
            &q,
            QuantileLevel::new(t).unwrap(),
            60_000,
            i as u64,
        )
        .unwrap();
        let exact = psi_exponential_shift(1.0, 0.5, 0.5, t).unwrap();
        assert!(
            (mc.estimate - exact).abs() <= 3.0 * mc.stderr,
            "theta {t}: {mc:?} vs {exact}"
        );
    }
}

#[test]
fn monte_carlo_agrees_with_lemma_on_unequal_priors() {
    let problem = UnivariateProblem::new(
        Arc::new(Normal { mean: 0.0, sd: 1.0 }),
        Arc::new(Normal { mean: 1.5, sd: 2.0 }),
        0.3,
    )
    .unwrap();
    for (i, t) in interior_grid(4).into_iter().enumerate() {
        let q = problem.true_quantiles(t);
        let mc = psi_monte_carlo(
            &problem,
            &q,
            QuantileLevel::new(t).unwrap(),
            40_000,
            50 + i as u64,
        )
        .unwrap();
        let exact = psi_lemma1(&problem, t).unwrap();
        assert!((mc.estimate - exact).abs() <= 4.0 * mc.stderr, "theta {t}");
    }
}

#[test]
fn gaussian_optimum_is_the_median() {
    let (theta, psi) =
        optimal_theta_scan(&UnivariateProblem::gaussian_shift(), &interior_grid(199)).unwrap();
    assert_eq!(theta, 0.5);
    assert!((psi - 0.691_462_461_274_013).abs() < 1e-10);
}

#[test]
fn exponential_optimum_sits_at_the_lower_end() {
    let problem = UnivariateProblem::exponential_shift(1.0, 0.5, 0.5).unwrap();
    let grid = interior_grid(99);
    let (theta, _) = optimal_theta_scan(&problem, &grid).unwrap();
    assert_eq!(theta, grid[0]);
}

#[test]
fn curve_rows_complement() {
    let rows = theory_curve(&UnivariateProblem::chi_squared_shift(), &interior_grid(19)).unwrap();
    assert_eq!(rows.len(), 19);
    for (t, psi, miss) in rows {
        assert!(t > 0.0 && t < 1.0);
        assert!((psi + miss - 1.0).abs() < 1e-15);
    }
}

#[test]
fn named_problems() {
    for name in ["gaussian", "chisq", "exponential", "normal-chisq"] {
        let p = UnivariateProblem::named(name).unwrap();
        assert!(psi_lemma1(&p, 0.3).unwrap() > 0.5);
    }
    assert!(UnivariateProblem::named("cauchy")
        .unwrap_err()
        .is_config_error());
}

#[test]
fn normal_quantile_inverts_cdf() {
    let n = Normal { mean: 2.0, sd: 0.5 };
    assert!((n.quantile(0.5) - 2.0).abs() < 1e-11);
    assert!((n.quantile(0.975) - (2.0 + 0.5 * 1.959_963_984_540_054)).abs() < 1e-10);
}
