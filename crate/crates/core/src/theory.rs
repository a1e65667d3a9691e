//! Correct-classification probability of the quantile classifier under known
//! class distributions.
//!
//! For one variable and two classes the probability has a closed form in the
//! class CDFs: the decision boundary sits at the convex combination
//! `theta q_lo + (1 - theta) q_hi` of the two class quantiles. This module
//! evaluates that form, an independent region-by-region integral of the same
//! probability, the exponential-shift special case, and a Monte-Carlo
//! estimate that also covers the multivariate case.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::classifier::decide;
use crate::error::{Error, Result};
use crate::quantile::{score_unchecked, QuantileLevel};
use crate::rng::stream_rng;
use crate::special::{chi_squared_cdf, chi_squared_pdf, normal_cdf, normal_pdf};

/// Bisection stops once the bracket is this narrow (relative to `max(1, |x|)`).
const QUANTILE_TOL: f64 = 1e-12;

/// A univariate continuous law with CDF, density, quantile function and sampler.
pub trait UnivariateDistribution: Send + Sync + fmt::Debug {
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    /// Generalized inverse of the CDF at `theta` in `(0, 1)`.
    fn quantile(&self, theta: f64) -> f64 {
        bisect_quantile(self, theta)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
    /// Closure of the support, possibly infinite at either end.
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Smallest `x` (to within the tolerance) with `cdf(x) >= theta`; the returned
/// point always satisfies `cdf(x) >= theta`.
pub fn bisect_quantile<D: UnivariateDistribution + ?Sized>(dist: &D, theta: f64) -> f64 {
    let (s_lo, s_hi) = dist.support();
    let mut lo = if s_lo.is_finite() { s_lo } else { -1.0 };
    let mut hi = if s_hi.is_finite() { s_hi } else { 1.0 };
    let mut width = 1.0;
    while !s_lo.is_finite() && dist.cdf(lo) >= theta {
        lo -= width;
        width *= 2.0;
    }
    width = 1.0;
    while !s_hi.is_finite() && dist.cdf(hi) < theta {
        hi += width;
        width *= 2.0;
    }
    if dist.cdf(lo) >= theta {
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= QUANTILE_TOL * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) >= theta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl UnivariateDistribution for Normal {
    fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.sd)
    }
    fn pdf(&self, x: f64) -> f64 {
        normal_pdf((x - self.mean) / self.sd) / self.sd
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl UnivariateDistribution for Exponential {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }
    fn quantile(&self, theta: f64) -> f64 {
        -(-theta).ln_1p() / self.rate
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        Exp::new(self.rate).expect("positive rate").sample(rng)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquared {
    pub dof: f64,
}

impl UnivariateDistribution for ChiSquared {
    fn cdf(&self, x: f64) -> f64 {
        chi_squared_cdf(x, self.dof)
    }
    fn pdf(&self, x: f64) -> f64 {
        chi_squared_pdf(x, self.dof)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        rand_distr::ChiSquared::new(self.dof)
            .expect("positive degrees of freedom")
            .sample(rng)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// `inner + shift`.
#[derive(Debug, Clone)]
pub struct Shifted {
    pub inner: Arc<dyn UnivariateDistribution>,
    pub shift: f64,
}

impl UnivariateDistribution for Shifted {
    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x - self.shift)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x - self.shift)
    }
    fn quantile(&self, theta: f64) -> f64 {
        self.inner.quantile(theta) + self.shift
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.inner.sample(rng) + self.shift
    }
    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.support();
        (lo + self.shift, hi + self.shift)
    }
}

/// Two univariate classes with prior `pi0` on class 0.
#[derive(Debug, Clone)]
pub struct UnivariateProblem {
    pub class0: Arc<dyn UnivariateDistribution>,
    pub class1: Arc<dyn UnivariateDistribution>,
    pub pi0: f64,
}

impl UnivariateProblem {
    pub fn new(
        class0: Arc<dyn UnivariateDistribution>,
        class1: Arc<dyn UnivariateDistribution>,
        pi0: f64,
    ) -> Result<Self> {
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return Err(Error::invalid(format!(
                "prior must lie in (0, 1), got {pi0}"
            )));
        }
        Ok(UnivariateProblem {
            class0,
            class1,
            pi0,
        })
    }

    pub fn pi1(&self) -> f64 {
        1.0 - self.pi0
    }

    /// Same problem with both classes moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let wrap = |d: &Arc<dyn UnivariateDistribution>| -> Arc<dyn UnivariateDistribution> {
            Arc::new(Shifted {
                inner: d.clone(),
                shift: delta,
            })
        };
        UnivariateProblem {
            class0: wrap(&self.class0),
            class1: wrap(&self.class1),
            pi0: self.pi0,
        }
    }

    /// `N(0,1)` vs `N(1,1)`, equal priors.
    pub fn gaussian_shift() -> Self {
        Self::location_pair(Arc::new(Normal { mean: 0.0, sd: 1.0 }), 1.0)
    }

    /// `chi2_5` vs `chi2_5 + 2`, equal priors.
    pub fn chi_squared_shift() -> Self {
        Self::location_pair(Arc::new(ChiSquared { dof: 5.0 }), 2.0)
    }

    /// `Exp(rate)` vs `Exp(rate) + shift` with prior `pi0`.
    pub fn exponential_shift(rate: f64, shift: f64, pi0: f64) -> Result<Self> {
        if !(rate > 0.0 && shift > 0.0) {
            return Err(Error::invalid(
                "exponential rate and shift must be positive",
            ));
        }
        let base: Arc<dyn UnivariateDistribution> = Arc::new(Exponential { rate });
        let moved: Arc<dyn UnivariateDistribution> = Arc::new(Shifted {
            inner: base.clone(),
            shift,
        });
        Self::new(base, moved, pi0)
    }

    /// `N(5,1)` vs `chi2_4`, equal priors.
    pub fn normal_vs_chi_squared() -> Self {
        UnivariateProblem {
            class0: Arc::new(Normal { mean: 5.0, sd: 1.0 }),
            class1: Arc::new(ChiSquared { dof: 4.0 }),
            pi0: 0.5,
        }
    }

    fn location_pair(base: Arc<dyn UnivariateDistribution>, shift: f64) -> Self {
        let moved: Arc<dyn UnivariateDistribution> = Arc::new(Shifted {
            inner: base.clone(),
            shift,
        });
        UnivariateProblem {
            class0: base,
            class1: moved,
            pi0: 0.5,
        }
    }

    /// `[q0(theta), q1(theta)]`, the true class quantiles as a `2 x 1` matrix.
    pub fn true_quantiles(&self, theta: f64) -> Vec<f64> {
        vec![self.class0.quantile(theta), self.class1.quantile(theta)]
    }

    /// Problem named on the command line: `gaussian`, `chisq`, `exponential`
    /// or `normal-chisq`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::gaussian_shift()),
            "chisq" => Ok(Self::chi_squared_shift()),
            "exponential" => Self::exponential_shift(1.0, 0.5, 0.5),
            "normal-chisq" => Ok(Self::normal_vs_chi_squared()),
            other => Err(Error::config(format!(
                "unknown problem `{other}` (expected gaussian, chisq, exponential or normal-chisq)"
            ))),
        }
    }
}

fn open_level(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "level must lie in (0, 1), got {theta}"
        )))
    }
}

/// Closed-form probability of correct classification with the true quantiles.
///
/// When `q0 <= q1` the boundary is `b = theta q0 + (1 - theta) q1` and the
/// probability is `pi0 F0(b) + pi1 (1 - F1(b))`; otherwise the roles of the
/// classes swap.
pub fn psi_lemma1(problem: &UnivariateProblem, theta: f64) -> Result<f64> {
    open_level(theta)?;
    let q0 = problem.class0.quantile(theta);
    let q1 = problem.class1.quantile(theta);
    let (pi0, pi1) = (problem.pi0, problem.pi1());
    let psi = if q0 <= q1 {
        let b = theta * q0 + (1.0 - theta) * q1;
        pi0 * problem.class0.cdf(b) + pi1 * (1.0 - problem.class1.cdf(b))
    } else {
        let b = theta * q1 + (1.0 - theta) * q0;
        pi1 * problem.class1.cdf(b) + pi0 * (1.0 - problem.class0.cdf(b))
    };
    Ok(psi)
}

/// `pi0 - (1 - theta) exp(c rate theta) (pi0 exp(-c rate) - pi1)` for
/// `Exp(rate)` against `Exp(rate) + c`.
///
/// Valid while the decision boundary lies inside the shifted support, i.e.
/// `-ln(1 - theta) >= rate c theta`; this holds on all of `(0, 1)` when
/// `rate c <= 1`.
pub fn psi_exponential_shift(rate: f64, shift: f64, pi0: f64, theta: f64) -> Result<f64> {
    if !(rate > 0.0 && shift > 0.0) {
        return Err(Error::invalid(
            "exponential rate and shift must be positive",
        ));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!(
            "level must lie in [0, 1], got {theta}"
        )));
    }
    let pi1 = 1.0 - pi0;
    let cl = shift * rate;
    Ok(pi0 - (1.0 - theta) * (cl * theta).exp() * (pi0 * (-cl).exp() - pi1))
}

/// Grid level with the largest closed-form probability (first on ties).
pub fn optimal_theta_scan(problem: &UnivariateProblem, grid: &[f64]) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::invalid("empty level grid"));
    }
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &t in grid {
        let psi = psi_lemma1(problem, t)?;
        if psi > best.1 {
            best = (t, psi);
        }
    }
    Ok(best)
}

/// `k` equispaced interior levels `i / (k + 1)`.
pub fn interior_grid(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
}

/// Rows `(theta, psi, 1 - psi)` of the theoretical curve.
pub fn theory_curve(problem: &UnivariateProblem, grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    grid.iter()
        .map(|&t| psi_lemma1(problem, t).map(|psi| (t, psi, 1.0 - psi)))
        .collect()
}

/// The same probability obtained by integrating the class densities over the
/// four regions cut out by the two quantiles (below both, between them in
/// either order, above both). Inside each region the decision is located by
/// evaluating the score difference directly, without the closed form.
pub fn psi_by_regions(problem: &UnivariateProblem, theta: f64) -> Result<f64> {
    open_level(theta)?;
    let q0 = problem.class0.quantile(theta);
    let q1 = problem.class1.quantile(theta);
    // Positive when the point goes to class 0.
    let margin = |z: f64| {
        crate::quantile::quantile_distance_unchecked(z, q1, theta)
            - crate::quantile::quantile_distance_unchecked(z, q0, theta)
    };
    let (lo, hi) = (q0.min(q1), q0.max(q1));
    let mut pieces: Vec<(f64, f64)> = vec![(f64::NEG_INFINITY, lo)];
    if hi > lo {
        // The margin is linear and monotone between the quantiles.
        let (mut a, mut b) = (lo, hi);
        let sa = margin(a) > 0.0;
        if sa != (margin(b) > 0.0) {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (margin(m) > 0.0) == sa {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= 1e-15 * b.abs().max(1.0) {
                    break;
                }
            }
            let root = 0.5 * (a + b);
            pieces.push((lo, root));
            pieces.push((root, hi));
        } else {
            pieces.push((lo, hi));
        }
    }
    pieces.push((hi, f64::INFINITY));

    let mut psi = 0.0;
    for (a, b) in pieces {
        let probe = match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (false, true) => b - 1.0,
            (true, false) => a + 1.0,
            (false, false) => 0.0,
        };
        if margin(probe) > 0.0 {
            psi += problem.pi0 * integrate_density(problem.class0.as_ref(), a, b);
        } else {
            psi += problem.pi1() * integrate_density(problem.class1.as_ref(), a, b);
        }
    }
    Ok(psi)
}

/// `int_a^b pdf`, clipped to the support; infinite ends are mapped onto a
/// finite interval with `x = a + t / (1 - t)`.
fn integrate_density(dist: &dyn UnivariateDistribution, a: f64, b: f64) -> f64 {
    let (s_lo, s_hi) = dist.support();
    let (a, b) = (a.max(s_lo), b.min(s_hi));
    if a >= b {
        return 0.0;
    }
    let tol = 1e-13;
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive_simpson(&|x| dist.pdf(x), a, b, tol),
        (true, false) => adaptive_simpson(&|t| tail_integrand(dist, a, t, 1.0), 0.0, 1.0, tol),
        (false, true) => adaptive_simpson(&|t| tail_integrand(dist, b, t, -1.0), 0.0, 1.0, tol),
        (false, false) => {
            adaptive_simpson(&|t| tail_integrand(dist, 0.0, t, 1.0), 0.0, 1.0, tol)
                + adaptive_simpson(&|t| tail_integrand(dist, 0.0, t, -1.0), 0.0, 1.0, tol)
        }
    }
}

fn tail_integrand(dist: &dyn UnivariateDistribution, anchor: f64, t: f64, dir: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t;
    dist.pdf(anchor + dir * t / s) / (s * s)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // Split first so smooth but peaked integrands are not missed by the initial probe.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, f1, fm) = (f(x0), f(x1), f(0.5 * (x0 + x1)));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            step(f, x0, x1, f0, fm, f1, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

/// Draws labelled `p`-variate observations.
pub trait LabeledSampler: Send + Sync {
    fn dim(&self) -> usize;
    fn num_classes(&self) -> usize;
    /// Fills `out` (length `dim`) and returns the class label.
    fn sample(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> usize;
}

impl LabeledSampler for UnivariateProblem {
    fn dim(&self) -> usize {
        1
    }
    fn num_classes(&self) -> usize {
        2
    }
    fn sample(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> usize {
        let label = if rng.random::<f64>() < self.pi0 { 0 } else { 1 };
        out[0] = if label == 0 {
            self.class0.sample(rng)
        } else {
            self.class1.sample(rng)
        };
        label
    }
}

/// Monte-Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Observations per independently seeded chunk.
const MC_CHUNK: usize = 4096;

/// Fraction of draws from `generator` classified correctly by the quantile
/// rule with the supplied `g x p` quantiles at `theta`.
///
/// Chunk `c` draws from its own stream derived from `seed`, so the estimate
/// does not depend on the number of worker threads.
pub fn psi_monte_carlo(
    generator: &dyn LabeledSampler,
    quantiles: &[f64],
    theta: QuantileLevel,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < 100 {
        return Err(Error::invalid(
            "Monte-Carlo estimate needs at least 100 samples",
        ));
    }
    let p = generator.dim();
    let g = generator.num_classes();
    if p == 0 || g < 2 || quantiles.len() != g * p {
        return Err(Error::invalid(format!(
            "sampler of dimension {p} with {g} classes does not match {} quantiles",
            quantiles.len()
        )));
    }
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let correct: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, &[c as u64]);
            let count = MC_CHUNK.min(n_samples - c * MC_CHUNK);
            let mut z = vec![0.0; p];
            let mut hits = 0usize;
            for _ in 0..count {
                let label = generator.sample(&mut rng, &mut z);
                let scores: Vec<f64> = quantiles
                    .chunks_exact(p)
                    .map(|q| score_unchecked(&z, q, theta.value()))
                    .collect();
                if decide(&scores) == label {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let estimate = correct as f64 / n_samples as f64;
    Ok(McEstimate {
        estimate,
        stderr: (estimate * (1.0 - estimate) / n_samples as f64).sqrt(),
    })
}
