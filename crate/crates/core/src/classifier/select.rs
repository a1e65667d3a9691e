use crate::error::Result;
use crate::quantile::QuantileLevel;

use super::AccuracyCurve;

/// Fitted values closer than this are treated as equal.
const FIT_TIE_TOL: f64 = 1e-12;

/// Picks the level with the highest training rate.
///
/// Ties are resolved by a least-squares quadratic fitted to the whole curve:
/// the tied level with the largest fitted rate wins. If the fit cannot
/// separate the tied levels (flat or singular fit, or equal fitted values),
/// the middle one of the remaining candidates is returned.
pub fn select_theta(curve: &AccuracyCurve) -> Result<QuantileLevel> {
    let best = curve.max_psi();
    let tied: Vec<usize> = (0..curve.len())
        .filter(|&i| curve.psi_n[i] == best)
        .collect();
    if tied.len() == 1 {
        return QuantileLevel::new(curve.thetas[tied[0]]);
    }
    let candidates = match fit_quadratic(&curve.thetas, &curve.psi_n) {
        Some(poly) => {
            let fitted: Vec<f64> = tied.iter().map(|&i| poly.eval(curve.thetas[i])).collect();
            let top = fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            tied.iter()
                .zip(&fitted)
                .filter(|(_, &f)| f >= top - FIT_TIE_TOL)
                .map(|(&i, _)| i)
                .collect()
        }
        None => tied,
    };
    let mid = candidates[(candidates.len() - 1) / 2];
    QuantileLevel::new(curve.thetas[mid])
}

/// `a + b (x - center) + c (x - center)^2`
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadratic {
    center: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl Quadratic {
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.a + d * (self.b + d * self.c)
    }
}

/// Least-squares quadratic through `(xs, ys)`; `None` when fewer than three
/// distinct abscissae make the normal equations singular.
pub(crate) fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Option<Quadratic> {
    let n = xs.len() as f64;
    let center = xs.iter().sum::<f64>() / n;
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let d = x - center;
        let mut pw = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += pw;
            if k < 3 {
                t[k] += pw * y;
            }
            pw *= d;
        }
    }
    let mut m = [
        [s[0], s[1], s[2], t[0]],
        [s[1], s[2], s[3], t[1]],
        [s[2], s[3], s[4], t[2]],
    ];
    let scale = s.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        let pivot_row = m[col];
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col] / pivot_row[col];
            for (v, p) in row.iter_mut().zip(pivot_row).skip(col) {
                *v -= f * p;
            }
        }
    }
    let mut coef = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = m[row][3];
        for k in row + 1..3 {
            acc -= m[row][k] * coef[k];
        }
        coef[row] = acc / m[row][row];
    }
    Some(Quadratic {
        center,
        a: coef[0],
        b: coef[1],
        c: coef[2],
    })
}
