//! Long-time theory for balanced coins.
//!
//! In momentum space, with `f̃(k) = Σ_j f(j) e^{ikj}`, one step of the walk
//! acts on the spinor `(ã_k, b̃_k)` through
//!
//! ```text
//! W_k = −diag(e^{ik}, e^{−ik}) · C(½, θ, φ)
//! ```
//!
//! (the overall sign is a global phase). Its eigenvalues are
//! `λ_± = ±(e^{iδ}/√2)[√(1+cos²(k−δ)) ∓ i sin(k−δ)]` with `δ = (θ+φ)/2`.
//! The two eigenvectors `Φ_±` are labelled by their spin polarisation,
//! `⟨Φ_±|Z|Φ_±⟩ = ±cos(k−δ)/√(1+cos²(k−δ))`, which is also their group
//! velocity; `Φ_±` belongs to the eigenvalue `λ_∓`.
//!
//! Every long-time coefficient reduces to the spectral integral
//!
//! ```text
//! I(δ) = ∫ dk/2π |f̃(k)|² cos²(k−δ) / (1 + cos²(k−δ))
//! ```
//!
//! through `⟨j⟩_t ≈ I·[cos α + sin α cos(β+θ)]·t` and
//! `σ²(t) ≈ I·{1 − I·[cos α + sin α cos(β+θ)]²}·t²`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    bloch_spinor, CoinParams, InitialDistribution, Matrix2, SpinGrid, SpinState, Spinor,
};
use crate::numerics::{integrate_periodic, QuadratureError, DEFAULT_QUAD_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("the momentum-space theory needs a balanced coin (q = 1/2), got q = {0}")]
    UnbalancedCoin(f64),
    #[error("Gaussian width sigma0 must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("uniform-box states have no finite-width analytic law; use the uniform limit")]
    FiniteBox,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("malformed fit table: {0}")]
    FitTable(String),
}

/// Eigen-branch selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

fn require_balanced(coin: &CoinParams) -> Result<(), AnalyticError> {
    if coin.is_balanced() {
        Ok(())
    } else {
        Err(AnalyticError::UnbalancedCoin(coin.q()))
    }
}

/// `(λ₊, λ₋)` at quasi-momentum `k`.
pub fn eigenvalues_k(k: f64, delta: f64) -> (Complex64, Complex64) {
    let x = k - delta;
    let root = (1.0 + x.cos().powi(2)).sqrt();
    let phase = Complex64::from_polar(1.0 / SQRT_2, delta);
    let plus = phase * Complex64::new(root, -x.sin());
    let minus = -phase * Complex64::new(root, x.sin());
    (plus, minus)
}

/// The momentum-space step operator `W_k`.
pub fn walk_operator_k(k: f64, coin: &CoinParams) -> Result<Matrix2, AnalyticError> {
    require_balanced(coin)?;
    let c = coin.matrix();
    let (up, down) = (
        -Complex64::from_polar(1.0, k),
        -Complex64::from_polar(1.0, -k),
    );
    Ok([
        [up * c[0][0], up * c[0][1]],
        [down * c[1][0], down * c[1][1]],
    ])
}

/// `N_±` with `N_±² = 4 ∓ 2[cos(k−δ)√(1+cos²(k−δ)) ± sin²(k−δ)]`.
pub fn normalization_k(k: f64, delta: f64, branch: Branch) -> f64 {
    let x = k - delta;
    let (c, s) = (x.cos(), x.sin());
    let root = (1.0 + c * c).sqrt();
    let sg = branch.sign();
    (4.0 - sg * 2.0 * (c * root + sg * s * s)).sqrt()
}

/// Normalized eigenvector `Φ_±`, phased so that its spin-up component is
/// `e^{ik}/N_±`.
pub fn eigenvector_k(k: f64, coin: &CoinParams, branch: Branch) -> Result<Spinor, AnalyticError> {
    require_balanced(coin)?;
    let (lp, lm) = eigenvalues_k(k, coin.delta());
    let lambda = match branch {
        Branch::Plus => lm,
        Branch::Minus => lp,
    };
    let eik = Complex64::from_polar(1.0, k);
    let down = -Complex64::from_polar(1.0, -coin.theta()) * (lambda * SQRT_2 + eik);
    let norm = normalization_k(k, coin.delta(), branch);
    Ok((eik / norm, down / norm))
}

/// `⟨Φ_±|Z|Φ_±⟩ = ±cos(k−δ)/√(1+cos²(k−δ))`.
pub fn expect_z(k: f64, delta: f64, branch: Branch) -> f64 {
    let c = (k - delta).cos();
    branch.sign() * c / (1.0 + c * c).sqrt()
}

/// Expansion coefficients `c_± = ⟨Φ_±|Φ_k(0)⟩` of the momentum-space initial
/// spinor `(f̃·cos(α/2), f̃·e^{iβ}sin(α/2))`.
pub fn ck_coefficients(
    k: f64,
    ftilde: Complex64,
    spin: &SpinState,
    coin: &CoinParams,
) -> Result<(Complex64, Complex64), AnalyticError> {
    let (a0, b0) = bloch_spinor(spin);
    let (a, b) = (ftilde * a0, ftilde * b0);
    let project = |branch| -> Result<Complex64, AnalyticError> {
        let (u, d) = eigenvector_k(k, coin, branch)?;
        Ok(u.conj() * a + d.conj() * b)
    };
    Ok((project(Branch::Plus)?, project(Branch::Minus)?))
}

/// `|f̃(k)|²` of an initial position profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDensity {
    /// `|f̃|² = 1`.
    Local,
    /// `|f̃|² = √(8π)·σ₀·e^{−2k²σ₀²}`.
    Gaussian { sigma0: f64 },
    /// `|f̃|² = 2π·δ(k)`, the infinitely wide uniform state. Never sampled;
    /// integrals against it are evaluated at `k = 0`.
    UniformLimit,
}

impl SpectralDensity {
    /// Pointwise density, `None` for the singular uniform limit.
    pub fn density(&self, k: f64) -> Option<f64> {
        match *self {
            Self::Local => Some(1.0),
            Self::Gaussian { sigma0 } => {
                Some((8.0 * PI).sqrt() * sigma0 * (-2.0 * k * k * sigma0 * sigma0).exp())
            }
            Self::UniformLimit => None,
        }
    }

    /// `∫ dk/2π |f̃(k)|² g(k)`.
    fn average<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64, AnalyticError> {
        match *self {
            Self::UniformLimit => Ok(g(0.0)),
            Self::Gaussian { sigma0 } if !(sigma0.is_finite() && sigma0 > 0.0) => {
                Err(AnalyticError::InvalidSigma(sigma0))
            }
            _ => Ok(integrate_periodic(
                |k| self.density(k).expect("density is regular") * g(k),
                DEFAULT_QUAD_TOL,
            )?),
        }
    }
}

impl TryFrom<&InitialDistribution> for SpectralDensity {
    type Error = AnalyticError;

    fn try_from(dist: &InitialDistribution) -> Result<Self, Self::Error> {
        match *dist {
            InitialDistribution::Local => Ok(Self::Local),
            InitialDistribution::Gaussian { sigma0 } => Ok(Self::Gaussian { sigma0 }),
            InitialDistribution::UniformBox { .. } => Err(AnalyticError::FiniteBox),
        }
    }
}

/// `I_L = 1 − √2/2`, independent of δ.
pub const LOCAL_INTEGRAL: f64 = 1.0 - SQRT_2 / 2.0;

/// Spin-averaged local coefficient `(2√2 − 1)/8`.
pub const LOCAL_AVERAGE_COEFF: f64 = (2.0 * SQRT_2 - 1.0) / 8.0;

/// `cos²δ`, with the rounding residue of `cos(π/2 + nπ)` taken as zero so
/// the closed forms vanish exactly where the theory says they do.
fn cos_sq(delta: f64) -> f64 {
    let c = delta.cos();
    if c.abs() < 4.0 * f64::EPSILON * (1.0 + delta.abs()) {
        0.0
    } else {
        c * c
    }
}

fn dispersion_weight(k: f64, delta: f64) -> f64 {
    let c2 = (k - delta).cos().powi(2);
    c2 / (1.0 + c2)
}

/// `I(δ)` for the given density. The local and uniform cases use their
/// closed forms; the Gaussian case is integrated adaptively.
pub fn spectral_integral(density: &SpectralDensity, delta: f64) -> Result<f64, AnalyticError> {
    match density {
        SpectralDensity::Local => Ok(LOCAL_INTEGRAL),
        SpectralDensity::UniformLimit => {
            let c2 = cos_sq(delta);
            Ok(c2 / (1.0 + c2))
        }
        SpectralDensity::Gaussian { .. } => density.average(|k| dispersion_weight(k, delta)),
    }
}

/// `I(δ)` by quadrature for every regular density (no closed forms).
pub fn spectral_integral_quadrature(
    density: &SpectralDensity,
    delta: f64,
) -> Result<f64, AnalyticError> {
    density.average(|k| dispersion_weight(k, delta))
}

/// Drift coefficient `lim ⟨j⟩_t / t` computed in the eigenbasis,
/// `∫ dk/2π |f̃|² Σ_± |c_±|² ⟨Φ_±|Z|Φ_±⟩`.
///
/// For the local state this coincides with [`long_time_mean_coeff`]; for
/// wider states it is the exact eigenbasis value.
pub fn spectral_mean_coeff(
    density: &SpectralDensity,
    spin: &SpinState,
    coin: &CoinParams,
) -> Result<f64, AnalyticError> {
    require_balanced(coin)?;
    let delta = coin.delta();
    density.average(|k| {
        let (cp, cm) = ck_coefficients(k, Complex64::new(1.0, 0.0), spin, coin)
            .expect("coin balance checked above");
        cp.norm_sqr() * expect_z(k, delta, Branch::Plus)
            + cm.norm_sqr() * expect_z(k, delta, Branch::Minus)
    })
}

/// Variance coefficient computed in the eigenbasis. Both branches move with
/// speed `|cos(k−δ)|/√(1+cos²(k−δ))`, so `⟨j²⟩/t² → I(δ)` for any spinor and
/// the coefficient is `I − m²` with `m` from [`spectral_mean_coeff`].
///
/// For the local state `m = I·[cos α + sin α cos(β+θ)]` and this reduces to
/// [`long_time_variance_coeff`].
pub fn spectral_variance_coeff(
    density: &SpectralDensity,
    spin: &SpinState,
    coin: &CoinParams,
) -> Result<f64, AnalyticError> {
    let m = spectral_mean_coeff(density, spin, coin)?;
    let i = spectral_integral(density, coin.delta())?;
    Ok((i - m * m).max(0.0))
}

/// One published fit parameter with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficient {
    pub value: f64,
    pub stderr: f64,
}

const fn coeff(value: f64, stderr: f64) -> FitCoefficient {
    FitCoefficient { value, stderr }
}

/// Parameters `a_n` of one power `1/σ₀ⁿ` for each of μ, ν, ξ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRow {
    pub mu: FitCoefficient,
    pub nu: FitCoefficient,
    pub xi: FitCoefficient,
}

/// Fitted model for the Gaussian spectral integral: μ, ν and ξ are each
/// `Σ_{n=0}^{4} a_n / σ₀ⁿ`.
///
/// Serialized as `{"a0": {"mu": {"value", "stderr"}, "nu": …, "xi": …}, …, "a4": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitTable {
    pub a0: FitRow,
    pub a1: FitRow,
    pub a2: FitRow,
    pub a3: FitRow,
    pub a4: FitRow,
}

impl Default for FitTable {
    fn default() -> Self {
        Self::published()
    }
}

impl FitTable {
    /// The published parameter table.
    pub const fn published() -> Self {
        Self {
            a0: FitRow {
                mu: coeff(0.0022, 0.0004),
                nu: coeff(-0.0020, 0.0005),
                xi: coeff(0.0002, 0.0001),
            },
            a1: FitRow {
                mu: coeff(-0.0492, 0.0077),
                nu: coeff(1.2995, 0.0085),
                xi: coeff(-0.0053, 0.0020),
            },
            a2: FitRow {
                mu: coeff(0.2938, 0.0361),
                nu: coeff(-0.2668, 0.0400),
                xi: coeff(0.0296, 0.0095),
            },
            a3: FitRow {
                mu: coeff(0.5030, 0.0596),
                nu: coeff(-1.0016, 0.0661),
                xi: coeff(0.2548, 0.0157),
            },
            a4: FitRow {
                mu: coeff(-0.4612, 0.0312),
                nu: coeff(0.5991, 0.0346),
                xi: coeff(-0.1049, 0.0082),
            },
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, AnalyticError> {
        serde_json::from_str(s).map_err(|e| AnalyticError::FitTable(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit table always serializes")
    }

    pub fn rows(&self) -> [&FitRow; 5] {
        [&self.a0, &self.a1, &self.a2, &self.a3, &self.a4]
    }

    /// The fit was made for σ₀ ≥ 1; smaller widths are extrapolation.
    pub fn is_within_validity(sigma0: f64) -> bool {
        sigma0 >= 1.0
    }

    fn series(&self, sigma0: f64, pick: impl Fn(&FitRow) -> f64) -> f64 {
        self.rows()
            .iter()
            .enumerate()
            .map(|(n, row)| pick(row) / sigma0.powi(n as i32))
            .sum()
    }

    pub fn mu(&self, sigma0: f64) -> f64 {
        self.series(sigma0, |r| r.mu.value)
    }

    pub fn nu(&self, sigma0: f64) -> f64 {
        self.series(sigma0, |r| r.nu.value)
    }

    pub fn xi(&self, sigma0: f64) -> f64 {
        self.series(sigma0, |r| r.xi.value)
    }
}

/// Fitted Gaussian spectral integral
/// `(2σ₀/√(2π))·(μcos⁴δ + νcos²δ + ξ)/(1 + cos²δ)`.
pub fn gauss_i_fitted(delta: f64, sigma0: f64, table: &FitTable) -> f64 {
    let c2 = cos_sq(delta);
    let poly = table.mu(sigma0) * c2 * c2 + table.nu(sigma0) * c2 + table.xi(sigma0);
    2.0 * sigma0 / (2.0 * PI).sqrt() * poly / (1.0 + c2)
}

/// `cos α + sin α·cos(β + θ)`.
pub fn spin_bracket(spin: &SpinState, theta: f64) -> f64 {
    spin.alpha().cos() + spin.alpha().sin() * (spin.beta() + theta).cos()
}

/// Ballistic coefficients of one walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongTimeLaw {
    #[serde(rename = "I")]
    pub integral: f64,
    pub mean_coeff: f64,
    pub var_coeff: f64,
    pub velocity: f64,
}

/// Coefficient of `t` in `⟨j⟩_t`, `I·[cos α + sin α cos(β+θ)]`.
pub fn long_time_mean_coeff(integral: f64, spin: &SpinState, theta: f64) -> f64 {
    integral * spin_bracket(spin, theta)
}

/// Coefficient of `t²` in `σ²(t)`, `I·{1 − I·[cos α + sin α cos(β+θ)]²}`,
/// together with the drift and the dispersion velocity `√var_coeff`.
pub fn long_time_variance_coeff(integral: f64, spin: &SpinState, theta: f64) -> LongTimeLaw {
    let bracket = spin_bracket(spin, theta);
    let var_coeff = (integral * (1.0 - integral * bracket * bracket)).max(0.0);
    LongTimeLaw {
        integral,
        mean_coeff: integral * bracket,
        var_coeff,
        velocity: var_coeff.sqrt(),
    }
}

/// How the Gaussian spectral integral is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianMethod {
    Quadrature,
    FitTable,
}

/// Initial position family for the analytic laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Local,
    Gaussian { sigma0: f64, method: GaussianMethod },
    UniformLimit,
}

impl Model {
    pub fn density(&self) -> SpectralDensity {
        match *self {
            Model::Local => SpectralDensity::Local,
            Model::Gaussian { sigma0, .. } => SpectralDensity::Gaussian { sigma0 },
            Model::UniformLimit => SpectralDensity::UniformLimit,
        }
    }

    /// `I(δ)` for this family.
    pub fn integral(&self, delta: f64, table: &FitTable) -> Result<f64, AnalyticError> {
        match *self {
            Model::Gaussian {
                sigma0,
                method: GaussianMethod::FitTable,
            } => {
                if !(sigma0.is_finite() && sigma0 > 0.0) {
                    return Err(AnalyticError::InvalidSigma(sigma0));
                }
                Ok(gauss_i_fitted(delta, sigma0, table))
            }
            _ => spectral_integral(&self.density(), delta),
        }
    }
}

/// Spin-averaged coefficient of `t²`, averaging `α` uniformly over `[0, π]`
/// and `β` over a full period.
pub fn avg_variance_coeff(
    model: &Model,
    delta: f64,
    table: &FitTable,
) -> Result<f64, AnalyticError> {
    match model {
        Model::Local => Ok(LOCAL_AVERAGE_COEFF),
        Model::Gaussian { .. } => {
            let i = model.integral(delta, table)?;
            Ok((1.0 - 0.75 * i) * i)
        }
        Model::UniformLimit => {
            let c2 = cos_sq(delta);
            Ok((4.0 * c2 + c2 * c2) / (4.0 * (1.0 + c2).powi(2)))
        }
    }
}

/// One node of a dispersion-velocity surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub alpha: f64,
    pub beta: f64,
    pub velocity: f64,
}

/// `v_σ = √var_coeff` over a grid of initial qubits, reported at the grid's
/// nominal `(α, β)`.
pub fn velocity_surface(
    model: &Model,
    coin: &CoinParams,
    grid: &SpinGrid,
    table: &FitTable,
) -> Result<Vec<SurfacePoint>, AnalyticError> {
    require_balanced(coin)?;
    let integral = model.integral(coin.delta(), table)?;
    Ok(grid
        .points()
        .map(|p| SurfacePoint {
            alpha: p.alpha,
            beta: p.beta,
            velocity: long_time_variance_coeff(integral, &p.spin, coin.theta()).velocity,
        })
        .collect())
}
