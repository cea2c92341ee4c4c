//! Domain types: coins, qubits, initial position profiles and lattice states.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::CompensatedSum;

/// A 2×2 complex matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// A spin-½ amplitude pair `(up, down)`.
pub type Spinor = (Complex64, Complex64);

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("coin bias q must lie in [0, 1], got {0}")]
    InvalidBias(f64),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("polar angle alpha must lie in [0, pi], got {0}")]
    InvalidAlpha(f64),
    #[error("Gaussian width sigma0 must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("uniform box width must be a positive odd number of sites, got {0}")]
    InvalidBoxWidth(usize),
    #[error("time horizon must be at least 1 step")]
    InvalidHorizon,
    #[error("grid step must be positive and finite, got {0}")]
    InvalidGridStep(f64),
    #[error("amplitude arrays differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
}

fn finite(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}

/// SU(2) coin `C(q, θ, φ)`, up to a global phase.
///
/// `θ` and `φ` are stored wrapped into `[0, 2π)`; the derived phases
/// `δ = (θ+φ)/2` and `η = (θ−φ)/2` are always computed from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    q: f64,
    theta: f64,
    phi: f64,
}

impl CoinParams {
    pub fn new(q: f64, theta: f64, phi: f64) -> Result<Self, ModelError> {
        let q = finite("q", q)?;
        if !(0.0..=1.0).contains(&q) {
            return Err(ModelError::InvalidBias(q));
        }
        let theta = finite("theta", theta)?.rem_euclid(TAU);
        let phi = finite("phi", phi)?.rem_euclid(TAU);
        Ok(Self { q, theta, phi })
    }

    /// Balanced coin (`q = 1/2`) with the given relative phases.
    pub fn balanced(theta: f64, phi: f64) -> Result<Self, ModelError> {
        Self::new(0.5, theta, phi)
    }

    /// `θ = φ = 0`.
    pub fn hadamard() -> Self {
        Self {
            q: 0.5,
            theta: 0.0,
            phi: 0.0,
        }
    }

    /// `θ = φ = π/2` (the Fourier or Kempe coin).
    pub fn fourier() -> Self {
        Self {
            q: 0.5,
            theta: PI / 2.0,
            phi: PI / 2.0,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn delta(&self) -> f64 {
        (self.theta + self.phi) / 2.0
    }

    pub fn eta(&self) -> f64 {
        (self.theta - self.phi) / 2.0
    }

    pub fn is_balanced(&self) -> bool {
        (self.q - 0.5).abs() < 1e-12
    }

    /// The coin matrix
    /// `[[√q, √(1−q)e^{iθ}], [√(1−q)e^{iφ}, −√q e^{i(θ+φ)}]]`.
    pub fn matrix(&self) -> Matrix2 {
        coin_matrix(self)
    }
}

pub fn coin_matrix(coin: &CoinParams) -> Matrix2 {
    let sq = coin.q.sqrt();
    let sp = (1.0 - coin.q).sqrt();
    [
        [
            Complex64::new(sq, 0.0),
            Complex64::from_polar(sp, coin.theta),
        ],
        [
            Complex64::from_polar(sp, coin.phi),
            -Complex64::from_polar(sq, coin.theta + coin.phi),
        ],
    ]
}

/// Initial qubit on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    alpha: f64,
    beta: f64,
}

impl SpinState {
    /// `alpha` must lie in `[0, π]` (values within 1e-12 of the ends are
    /// clamped); `beta` is wrapped into `[−π, π)`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        let alpha = finite("alpha", alpha)?;
        let beta = finite("beta", beta)?;
        if !(-1e-12..=PI + 1e-12).contains(&alpha) {
            return Err(ModelError::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha: alpha.clamp(0.0, PI),
            beta: wrap_signed(beta),
        })
    }

    pub fn up() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn down() -> Self {
        Self {
            alpha: PI,
            beta: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spinor(&self) -> Spinor {
        bloch_spinor(self)
    }
}

fn wrap_signed(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// `(cos(α/2), e^{iβ} sin(α/2))`.
pub fn bloch_spinor(spin: &SpinState) -> Spinor {
    let half = spin.alpha / 2.0;
    (
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), spin.beta),
    )
}

/// One node of a [`SpinGrid`], keeping the nominal `(α, β)` the grid was
/// built from alongside the (wrapped) spin state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub spin: SpinState,
}

/// Cartesian grid `α ∈ {0, h, 2h, … ≤ π}`, `β ∈ {0, h, 2h, … ≤ 2π}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGrid {
    step: f64,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl SpinGrid {
    pub fn new(step: f64) -> Result<Self, ModelError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(ModelError::InvalidGridStep(step));
        }
        let count = |upper: f64| (upper / step + 1e-12).floor() as usize + 1;
        let alphas = (0..count(PI)).map(|i| i as f64 * step).collect();
        let betas = (0..count(TAU)).map(|i| i as f64 * step).collect();
        Ok(Self {
            step,
            alphas,
            betas,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in α-major order.
    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.alphas.iter().flat_map(move |&alpha| {
            self.betas.iter().map(move |&beta| GridPoint {
                alpha,
                beta,
                // alpha ≤ π and both are finite by construction
                spin: SpinState::new(alpha, beta).expect("grid node is a valid spin"),
            })
        })
    }

    pub fn spins(&self) -> Vec<SpinState> {
        self.points().map(|p| p.spin).collect()
    }
}

/// Spin states on the grid described by [`SpinGrid::new`]; `step = 0.1`
/// yields the 32 × 63 = 2016 states used for ensemble averages.
pub fn spin_grid(step: f64) -> Result<Vec<SpinState>, ModelError> {
    Ok(SpinGrid::new(step)?.spins())
}

/// Position profile `f(j)` of the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDistribution {
    /// `f(0) = 1`.
    Local,
    /// `f(j) ∝ exp(−j²/4σ₀²)`, renormalized over the sampled sites.
    Gaussian { sigma0: f64 },
    /// `f(j) = 1/√W` on `W` (odd) sites centered on the origin.
    UniformBox { width: usize },
}

impl InitialDistribution {
    pub fn gaussian(sigma0: f64) -> Result<Self, ModelError> {
        let d = Self::Gaussian { sigma0 };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform_box(width: usize) -> Result<Self, ModelError> {
        let d = Self::UniformBox { width };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Self::Local => Ok(()),
            Self::Gaussian { sigma0 } => {
                if sigma0.is_finite() && sigma0 > 0.0 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidSigma(sigma0))
                }
            }
            Self::UniformBox { width } => {
                if width % 2 == 1 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidBoxWidth(width))
                }
            }
        }
    }

    /// Half-width `r` of the sampled support `[−r, r]`.
    pub fn support_radius(&self) -> usize {
        match *self {
            Self::Local => 0,
            Self::Gaussian { sigma0 } => (6.0 * sigma0).ceil() as usize,
            Self::UniformBox { width } => (width - 1) / 2,
        }
    }

    /// Unit-norm real profile on `[−r, r]`, element `i` holding `f(i − r)`.
    pub fn profile(&self) -> Result<Vec<f64>, ModelError> {
        self.validate()?;
        let r = self.support_radius();
        Ok(match *self {
            Self::Local => vec![1.0],
            Self::Gaussian { sigma0 } => {
                let denom = 4.0 * sigma0 * sigma0;
                let raw: Vec<f64> = (0..=2 * r)
                    .map(|i| {
                        let j = i as f64 - r as f64;
                        (-(j * j) / denom).exp()
                    })
                    .collect();
                let norm = raw.iter().map(|f| f * f).sum::<f64>().sqrt();
                raw.into_iter().map(|f| f / norm).collect()
            }
            Self::UniformBox { width } => vec![1.0 / (width as f64).sqrt(); width],
        })
    }
}

/// Spin-up and spin-down amplitudes over a finite lattice window.
///
/// Element `i` of either array sits at lattice site `offset + i`. The window
/// is sized at construction so that the walk never reaches its edges within
/// the requested horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub(crate) t: usize,
    pub(crate) offset: i64,
    pub(crate) a: Vec<Complex64>,
    pub(crate) b: Vec<Complex64>,
    /// Inclusive index range holding every nonzero amplitude; `None` when
    /// the state is identically zero.
    pub(crate) support: Option<(usize, usize)>,
}

impl WalkState {
    pub fn from_amplitudes(
        t: usize,
        offset: i64,
        a: Vec<Complex64>,
        b: Vec<Complex64>,
    ) -> Result<Self, ModelError> {
        if a.len() != b.len() {
            return Err(ModelError::LengthMismatch {
                a: a.len(),
                b: b.len(),
            });
        }
        let zero = Complex64::new(0.0, 0.0);
        let nonzero = |i: &usize| a[*i] != zero || b[*i] != zero;
        let lo = (0..a.len()).find(nonzero);
        let hi = (0..a.len()).rev().find(nonzero);
        let support = lo.zip(hi);
        Ok(Self {
            t,
            offset,
            a,
            b,
            support,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Lattice index of array element 0.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn up(&self) -> &[Complex64] {
        &self.a
    }

    pub fn down(&self) -> &[Complex64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Lattice sites `(first, last)` covered by the window.
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.a.len() as i64 - 1)
    }

    /// Lattice sites `(first, last)` that may hold nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        self.support
            .map(|(lo, hi)| (self.offset + lo as i64, self.offset + hi as i64))
    }

    /// Amplitudes at lattice site `j`; zero outside the window.
    pub fn amplitude(&self, j: i64) -> Spinor {
        let i = j - self.offset;
        if i < 0 || i >= self.a.len() as i64 {
            let z = Complex64::new(0.0, 0.0);
            return (z, z);
        }
        (self.a[i as usize], self.b[i as usize])
    }

    /// `Σ_j |a(j)|² + |b(j)|²`.
    pub fn norm_sqr(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for (a, b) in self.a.iter().zip(&self.b) {
            acc.add(a.norm_sqr() + b.norm_sqr());
        }
        acc.value()
    }
}

/// `a(j,0) = f(j)·cos(α/2)`, `b(j,0) = f(j)·e^{iβ}sin(α/2)` on the window
/// `[−(T + r), T + r]`, where `r` is the profile's support radius.
pub fn build_initial_state(
    dist: &InitialDistribution,
    spin: &SpinState,
    horizon: usize,
) -> Result<WalkState, ModelError> {
    if horizon == 0 {
        return Err(ModelError::InvalidHorizon);
    }
    let profile = dist.profile()?;
    let r = dist.support_radius();
    let half = horizon + r;
    let len = 2 * half + 1;
    let (a0, b0) = bloch_spinor(spin);
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![zero; len];
    let mut b = vec![zero; len];
    for (i, f) in profile.iter().enumerate() {
        a[horizon + i] = a0 * f;
        b[horizon + i] = b0 * f;
    }
    WalkState::from_amplitudes(0, -(half as i64), a, b)
}
