//! Numerical kernels: adaptive quadrature over the Brillouin zone and the
//! quadratic least-squares fit `y = A + B·t + C·t²`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

/// Default relative tolerance for [`integrate_periodic`].
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Default fraction of the time axis discarded before fitting.
pub const DEFAULT_BURN_IN: f64 = 0.1;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

const MAX_PANELS: usize = 20_000;
const INITIAL_PANELS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand returned a non-finite value at k = {0}")]
    NonFinite(f64),
    #[error(
        "quadrature did not converge after {panels} panels \
         (estimate {estimate}, error {error:e})"
    )]
    NoConvergence {
        estimate: f64,
        error: f64,
        panels: usize,
    },
}

impl QuadratureError {
    /// Best available estimate, if the failure produced one.
    pub fn best_estimate(&self) -> Option<f64> {
        match self {
            Self::NoConvergence { estimate, .. } => Some(*estimate),
            _ => None,
        }
    }
}

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite(x))
        }
    };
    let fc = eval(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let (f1, f2) = (eval(center - dx)?, eval(center + dx)?);
        kron += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        a,
        b,
        value: kron * half,
        abs_value: abs * half.abs(),
        error: ((kron - gauss) * half).abs(),
    })
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// error is below `tol` times the integral of `|f|`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut heap = BinaryHeap::with_capacity(64);
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == INITIAL_PANELS {
            b
        } else {
            lo + width
        };
        heap.push(kronrod(&f, lo, hi)?);
    }
    loop {
        let (mut value, mut abs, mut error) = (0.0, 0.0, 0.0);
        for p in heap.iter() {
            value += p.value;
            abs += p.abs_value;
            error += p.error;
        }
        if error <= tol * abs || error <= f64::EPSILON * abs {
            return Ok(value);
        }
        if heap.len() >= MAX_PANELS {
            return Err(QuadratureError::NoConvergence {
                estimate: value,
                error,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least the initial panels");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split any further in floating point
            return Err(QuadratureError::NoConvergence {
                estimate: value,
                error,
                panels: heap.len() + 1,
            });
        }
        heap.push(kronrod(&f, worst.a, mid)?);
        heap.push(kronrod(&f, mid, worst.b)?);
    }
}

/// `∫_{−π}^{π} f(k) dk/2π`.
pub fn integrate_periodic<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64, QuadratureError> {
    Ok(integrate(f, -PI, PI, tol)? / TAU)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("burn-in fraction must lie in [0, 1), got {0}")]
    InvalidBurnIn(f64),
    #[error("need at least 3 points after burn-in, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite sample at t = {0}")]
    NonFinite(f64),
    #[error("design matrix is rank deficient (fewer than 3 distinct t values)")]
    RankDeficient,
}

/// Coefficients of `y = A + B·t + C·t²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub residual_rms: f64,
    pub points_used: usize,
}

impl FitResult {
    pub fn eval(&self, t: f64) -> f64 {
        self.a + t * (self.b + t * self.c)
    }
}

/// Ordinary least squares fit of `y = A + B·t + C·t²` to the points with
/// `t ≥ burn_in_fraction · t_max`.
///
/// Time is mapped onto `[0, 1]` before a Householder QR solve; the
/// coefficients are transformed back afterwards. Points are sorted first, so
/// the result does not depend on input order.
pub fn quadratic_fit(points: &[(f64, f64)], burn_in_fraction: f64) -> Result<FitResult, FitError> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(FitError::InvalidBurnIn(burn_in_fraction));
    }
    if let Some(&(t, _)) = points
        .iter()
        .find(|(t, y)| !(t.is_finite() && y.is_finite()))
    {
        return Err(FitError::NonFinite(t));
    }
    let t_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let cut = burn_in_fraction * t_max;
    let mut kept: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= cut).collect();
    if kept.len() < 3 {
        return Err(FitError::TooFewPoints(kept.len()));
    }
    kept.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let t0 = kept[0].0;
    let span = kept[kept.len() - 1].0 - t0;
    if span <= 0.0 {
        return Err(FitError::RankDeficient);
    }
    let mut rows: Vec<[f64; 3]> = kept
        .iter()
        .map(|&(t, _)| {
            let u = (t - t0) / span;
            [1.0, u, u * u]
        })
        .collect();
    let mut rhs: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let [p0, p1, p2] = householder_solve(&mut rows, &mut rhs)?;

    // y = p0 + p1 (t − t0)/s + p2 (t − t0)²/s²
    let c = p2 / (span * span);
    let b = p1 / span - 2.0 * p2 * t0 / (span * span);
    let a = p0 - p1 * t0 / span + p2 * t0 * t0 / (span * span);

    let ss: f64 = kept
        .iter()
        .map(|&(t, y)| {
            let u = (t - t0) / span;
            let r = y - (p0 + u * (p1 + u * p2));
            r * r
        })
        .sum();
    Ok(FitResult {
        a,
        b,
        c,
        residual_rms: (ss / kept.len() as f64).sqrt(),
        points_used: kept.len(),
    })
}

/// Least-squares solution of an `n × 3` system by Householder reflections.
#[allow(clippy::needless_range_loop)]
fn householder_solve(rows: &mut [[f64; 3]], rhs: &mut [f64]) -> Result<[f64; 3], FitError> {
    let n = rows.len();
    let mut diag = [0.0; 3];
    for col in 0..3 {
        let scale: f64 = rows[col..]
            .iter()
            .map(|r| r[col] * r[col])
            .sum::<f64>()
            .sqrt();
        let col_norm: f64 = rows.iter().map(|r| r[col] * r[col]).sum::<f64>().sqrt();
        if scale <= 1e-12 * col_norm.max(f64::MIN_POSITIVE) {
            return Err(FitError::RankDeficient);
        }
        let alpha = if rows[col][col] > 0.0 { -scale } else { scale };
        // v = x − α e₁, stored in place below the diagonal
        let mut v: Vec<f64> = rows[col..].iter().map(|r| r[col]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for k in col + 1..3 {
            let dot: f64 = (col..n).map(|i| v[i - col] * rows[i][k]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in col..n {
                rows[i][k] -= f * v[i - col];
            }
        }
        let dot: f64 = (col..n).map(|i| v[i - col] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in col..n {
            rhs[i] -= f * v[i - col];
        }
        diag[col] = alpha;
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = rhs[i];
        for k in i + 1..3 {
            s -= rows[i][k] * x[k];
        }
        x[i] = s / diag[i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn constant_integrates_to_one() {
        assert_abs_diff_eq!(
            integrate_periodic(|_| 1.0, 1e-10).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn local_spectral_integral() {
        let v = integrate_periodic(|k| k.cos().powi(2) / (1.0 + k.cos().powi(2)), 1e-10).unwrap();
        assert_abs_diff_eq!(v, 1.0 - SQRT_2 / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn odd_harmonic_vanishes() {
        assert_abs_diff_eq!(
            integrate_periodic(f64::cos, 1e-10).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn low_degree_trig_polynomials_are_exact() {
        // mean of cos²(3k) + sin⁴k = 1/2 + 3/8
        let v = integrate_periodic(|k| (3.0 * k).cos().powi(2) + k.sin().powi(4), 1e-10).unwrap();
        assert_abs_diff_eq!(v, 0.875, epsilon = 1e-12);
        let v =
            integrate_periodic(|k| 2.0 + (5.0 * k).sin() - 0.3 * (2.0 * k).cos(), 1e-10).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_integrand_halves_agree() {
        let f = |k: f64| (-2.0 * k * k * 9.0).exp() * k.cos().powi(2) / (1.0 + k.cos().powi(2));
        let left = integrate(f, -PI, 0.0, 1e-12).unwrap();
        let right = integrate(f, 0.0, PI, 1e-12).unwrap();
        assert_abs_diff_eq!(left, right, epsilon = 1e-12);
    }

    #[test]
    fn peaked_gaussian_is_resolved() {
        // |f̃(k)|² for σ₀ = 50 is normalized under dk/2π
        let s = 50.0;
        let v = integrate_periodic(
            |k| (8.0 * PI).sqrt() * s * (-2.0 * k * k * s * s).exp(),
            1e-10,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn bad_integrands_are_reported() {
        assert_eq!(
            integrate_periodic(|_| 1.0, 0.0),
            Err(QuadratureError::InvalidTolerance(0.0))
        );
        assert!(matches!(
            integrate_periodic(|k| 1.0 / k, 1e-10),
            Err(QuadratureError::NonFinite(_)) | Err(QuadratureError::NoConvergence { .. })
        ));
        // far more oscillations than the panel budget can resolve
        let err = integrate(|k| (1e7 * k).sin().abs(), -PI, PI, 1e-12).unwrap_err();
        assert!(err.best_estimate().is_some());
    }

    #[test]
    fn exact_quadratic_is_recovered() {
        let pts: Vec<(f64, f64)> = (1..=100)
            .map(|t| {
                let t = t as f64;
                (t, 2.0 + 3.0 * t + 5.0 * t * t)
            })
            .collect();
        let fit = quadratic_fit(&pts, 0.0).unwrap();
        assert_relative_eq!(fit.a, 2.0, max_relative = 1e-10);
        assert_relative_eq!(fit.b, 3.0, max_relative = 1e-10);
        assert_relative_eq!(fit.c, 5.0, max_relative = 1e-10);
        assert!(fit.residual_rms < 1e-10);
        assert_eq!(fit.points_used, 100);
    }

    #[test]
    fn burn_in_discards_early_points() {
        // a transient that only affects t < 10 is ignored entirely
        let pts: Vec<(f64, f64)> = (0..=100)
            .map(|t| {
                let t = t as f64;
                let y = 1.0 - 2.0 * t + 0.25 * t * t;
                (t, if t < 10.0 { y + 50.0 } else { y })
            })
            .collect();
        let fit = quadratic_fit(&pts, 0.1).unwrap();
        assert_eq!(fit.points_used, 91);
        assert_relative_eq!(fit.c, 0.25, max_relative = 1e-10);
        assert_relative_eq!(fit.a, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn degenerate_inputs_fail() {
        assert_eq!(
            quadratic_fit(&[(1.0, 1.0), (2.0, 2.0)], 0.0),
            Err(FitError::TooFewPoints(2))
        );
        let same_t = [(5.0, 1.0), (5.0, 2.0), (5.0, 3.0), (5.0, 4.0)];
        assert_eq!(quadratic_fit(&same_t, 0.0), Err(FitError::RankDeficient));
        let two_t = [(1.0, 1.0), (1.0, 2.0), (2.0, 3.0), (2.0, 4.0)];
        assert_eq!(quadratic_fit(&two_t, 0.0), Err(FitError::RankDeficient));
        assert_eq!(
            quadratic_fit(&same_t, 1.0),
            Err(FitError::InvalidBurnIn(1.0))
        );
        assert!(matches!(
            quadratic_fit(&[(0.0, 1.0), (1.0, f64::NAN), (2.0, 1.0)], 0.0),
            Err(FitError::NonFinite(_))
        ));
    }

    proptest! {
        #[test]
        fn fit_is_order_invariant(
            coeffs in (-10.0f64..10.0, -5.0f64..5.0, -1.0f64..1.0),
            noise in proptest::collection::vec(-1.0f64..1.0, 40),
            seed in 0usize..40,
        ) {
            let pts: Vec<(f64, f64)> = noise.iter().enumerate().map(|(i, e)| {
                let t = i as f64;
                (t, coeffs.0 + coeffs.1 * t + coeffs.2 * t * t + e)
            }).collect();
            let mut shuffled = pts.clone();
            shuffled.rotate_left(seed);
            shuffled.reverse();
            prop_assert_eq!(quadratic_fit(&pts, 0.1).unwrap(), quadratic_fit(&shuffled, 0.1).unwrap());
        }

        #[test]
        fn exact_quadratics_have_no_residual(
            a in -100.0f64..100.0, b in -10.0f64..10.0, c in 0.01f64..1.0,
        ) {
            let pts: Vec<(f64, f64)> = (0..200).map(|t| {
                let t = t as f64 * 5.0;
                (t, a + b * t + c * t * t)
            }).collect();
            let fit = quadratic_fit(&pts, 0.0).unwrap();
            prop_assert!((fit.c - c).abs() <= 1e-10 * c.abs());
            prop_assert!(fit.residual_rms < 1e-10 * (1.0 + c * 1e6));
        }
    }
}
