//! Probability distributions, moments, side ratios and ensemble averages.

use rayon::prelude::*;
use thiserror::Error;

use crate::evolution::Walker;
use crate::model::{build_initial_state, CoinParams, InitialDistribution, SpinState, WalkState};
use crate::numerics::CompensatedSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("moments above order 4 are not supported (asked for {0})")]
    UnsupportedMoment(u32),
    #[error("side ratio is undefined: a spin component carries no probability on the {0:?} side")]
    UndefinedRatio(Side),
    #[error("ensemble grid is empty")]
    EmptyEnsemble,
    #[error("recording interval must be at least 1")]
    InvalidRecordInterval,
    #[error("could not start worker pool: {0}")]
    WorkerPool(String),
}

/// Probability carried by one lattice site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteProbability {
    pub j: i64,
    pub p_up: f64,
    pub p_down: f64,
    pub p_total: f64,
}

/// Per-site spin-resolved probabilities at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSnapshot {
    t: usize,
    offset: i64,
    p_up: Vec<f64>,
    p_down: Vec<f64>,
}

impl DistributionSnapshot {
    /// Builds a snapshot from explicit per-site values starting at `offset`.
    pub fn new(t: usize, offset: i64, p_up: Vec<f64>, p_down: Vec<f64>) -> Self {
        assert_eq!(
            p_up.len(),
            p_down.len(),
            "spin components must cover the same sites"
        );
        Self {
            t,
            offset,
            p_up,
            p_down,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.p_up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_up.is_empty()
    }

    pub fn p_up(&self) -> &[f64] {
        &self.p_up
    }

    pub fn p_down(&self) -> &[f64] {
        &self.p_down
    }

    pub fn records(&self) -> impl Iterator<Item = SiteProbability> + '_ {
        self.p_up
            .iter()
            .zip(&self.p_down)
            .enumerate()
            .map(move |(i, (&u, &d))| SiteProbability {
                j: self.offset + i as i64,
                p_up: u,
                p_down: d,
                p_total: u + d,
            })
    }

    /// Total probability at site `j` (zero outside the window).
    pub fn p_total(&self, j: i64) -> f64 {
        let i = j - self.offset;
        if i < 0 || i >= self.len() as i64 {
            return 0.0;
        }
        self.p_up[i as usize] + self.p_down[i as usize]
    }

    /// `Σ_j j^m |Ψ(j,t)|²` for `m ≤ 4`.
    pub fn moment(&self, m: u32) -> Result<f64, ObservableError> {
        if m > 4 {
            return Err(ObservableError::UnsupportedMoment(m));
        }
        let mut acc = CompensatedSum::default();
        for r in self.records() {
            acc.add((r.j as f64).powi(m as i32) * r.p_total);
        }
        Ok(acc.value())
    }

    /// `⟨j²⟩ − ⟨j⟩²`, clamped at zero against rounding.
    pub fn variance(&self) -> f64 {
        let (m1, m2) = (self.moment(1).unwrap_or(0.0), self.moment(2).unwrap_or(0.0));
        (m2 - m1 * m1).max(0.0)
    }

    /// Minority-to-majority spin mass on one half-line (site 0 excluded).
    pub fn side_ratio(&self, side: Side) -> Result<f64, ObservableError> {
        let (mut up, mut down) = (CompensatedSum::default(), CompensatedSum::default());
        for r in self.records() {
            let on_side = match side {
                Side::Negative => r.j < 0,
                Side::Positive => r.j > 0,
            };
            if on_side {
                up.add(r.p_up);
                down.add(r.p_down);
            }
        }
        let (up, down) = (up.value(), down.value());
        if up <= 0.0 || down <= 0.0 {
            return Err(ObservableError::UndefinedRatio(side));
        }
        Ok(up.min(down) / up.max(down))
    }
}

/// Half-line selector for [`DistributionSnapshot::side_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Negative,
    Positive,
}

pub fn probability_distribution(state: &WalkState) -> DistributionSnapshot {
    DistributionSnapshot {
        t: state.t(),
        offset: state.offset(),
        p_up: state.up().iter().map(|a| a.norm_sqr()).collect(),
        p_down: state.down().iter().map(|b| b.norm_sqr()).collect(),
    }
}

pub fn moment(snapshot: &DistributionSnapshot, m: u32) -> Result<f64, ObservableError> {
    snapshot.moment(m)
}

pub fn variance(snapshot: &DistributionSnapshot) -> f64 {
    snapshot.variance()
}

pub fn side_ratio(snapshot: &DistributionSnapshot, side: Side) -> Result<f64, ObservableError> {
    snapshot.side_ratio(side)
}

/// One row of a [`VarianceSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePoint {
    pub t: usize,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// `(t, ⟨j⟩, ⟨j²⟩, σ²)` along a trajectory.
///
/// For a single walk `variance = second_moment − mean²`. For an ensemble
/// average every column is averaged separately, so `variance` is the mean
/// of the member variances rather than the variance of the mean
/// distribution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarianceSeries {
    pub points: Vec<VariancePoint>,
}

impl VarianceSeries {
    pub fn last(&self) -> Option<&VariancePoint> {
        self.points.last()
    }

    pub fn at(&self, t: usize) -> Option<&VariancePoint> {
        self.points.iter().find(|p| p.t == t)
    }

    /// `(t, σ²(t))` pairs for fitting.
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.t as f64, p.variance))
            .collect()
    }
}

/// `(⟨j⟩, ⟨j²⟩)` of a walk state, summed over its support only.
pub fn state_moments(state: &WalkState) -> (f64, f64) {
    let (mut m1, mut m2) = (CompensatedSum::default(), CompensatedSum::default());
    let Some((lo, hi)) = state.support else {
        return (0.0, 0.0);
    };
    for i in lo..=hi {
        let p = state.a[i].norm_sqr() + state.b[i].norm_sqr();
        let j = (state.offset + i as i64) as f64;
        m1.add(j * p);
        m2.add(j * j * p);
    }
    (m1.value(), m2.value())
}

fn variance_point(state: &WalkState) -> VariancePoint {
    let (mean, second_moment) = state_moments(state);
    VariancePoint {
        t: state.t(),
        mean,
        second_moment,
        variance: (second_moment - mean * mean).max(0.0),
    }
}

fn should_record(t: usize, steps: usize, every: usize) -> bool {
    t.is_multiple_of(every) || t == steps
}

/// Evolves `state` for `steps` steps, recording moments at `t = 0`, at
/// every multiple of `record_every` and at the final step.
pub fn record_walk(
    state: WalkState,
    coin: &CoinParams,
    steps: usize,
    record_every: usize,
) -> crate::Result<(WalkState, VarianceSeries)> {
    if record_every == 0 {
        return Err(ObservableError::InvalidRecordInterval.into());
    }
    let mut series = VarianceSeries {
        points: vec![variance_point(&state)],
    };
    let mut walker = Walker::new(state, coin);
    for n in 1..=steps {
        walker.advance()?;
        if should_record(n, steps, record_every) {
            series.points.push(variance_point(walker.state()));
        }
    }
    Ok((walker.into_state(), series))
}

/// Knobs for [`ensemble_average`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub steps: usize,
    pub record_every: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl EnsembleOptions {
    pub fn new(steps: usize) -> Self {
        Self {
            steps,
            record_every: 1,
            workers: None,
        }
    }
}

/// Grid-averaged distribution at the final step and averaged moment series.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub members: usize,
    pub distribution: DistributionSnapshot,
    pub variance: VarianceSeries,
}

// Members are summed in fixed-size chunks, and chunk sums are merged in
// grid order, so the floating-point result is independent of worker count.
const CHUNK: usize = 16;

#[derive(Debug, Clone)]
struct PartialSums {
    p_up: Vec<f64>,
    p_down: Vec<f64>,
    mean: Vec<f64>,
    second: Vec<f64>,
    var: Vec<f64>,
    times: Vec<usize>,
}

impl PartialSums {
    fn merge(&mut self, other: &PartialSums) {
        for (x, y) in self.p_up.iter_mut().zip(&other.p_up) {
            *x += y;
        }
        for (x, y) in self.p_down.iter_mut().zip(&other.p_down) {
            *x += y;
        }
        for (x, y) in self.mean.iter_mut().zip(&other.mean) {
            *x += y;
        }
        for (x, y) in self.second.iter_mut().zip(&other.second) {
            *x += y;
        }
        for (x, y) in self.var.iter_mut().zip(&other.var) {
            *x += y;
        }
    }
}

fn run_member(
    dist: &InitialDistribution,
    coin: &CoinParams,
    spin: &SpinState,
    opts: &EnsembleOptions,
) -> crate::Result<(DistributionSnapshot, VarianceSeries)> {
    let state = build_initial_state(dist, spin, opts.steps.max(1))?;
    let (state, series) = record_walk(state, coin, opts.steps, opts.record_every)?;
    Ok((probability_distribution(&state), series))
}

fn run_chunk(
    dist: &InitialDistribution,
    coin: &CoinParams,
    spins: &[SpinState],
    opts: &EnsembleOptions,
) -> crate::Result<PartialSums> {
    let mut acc: Option<PartialSums> = None;
    for spin in spins {
        let (snap, series) = run_member(dist, coin, spin, opts)?;
        let member = PartialSums {
            p_up: snap.p_up,
            p_down: snap.p_down,
            mean: series.points.iter().map(|p| p.mean).collect(),
            second: series.points.iter().map(|p| p.second_moment).collect(),
            var: series.points.iter().map(|p| p.variance).collect(),
            times: series.points.iter().map(|p| p.t).collect(),
        };
        match acc.as_mut() {
            None => acc = Some(member),
            Some(a) => a.merge(&member),
        }
    }
    Ok(acc.expect("chunks are never empty"))
}

/// Arithmetic mean over the grid of per-site probabilities at the final
/// step and of each member's moment series.
///
/// Any member failure aborts the whole ensemble.
pub fn ensemble_average(
    dist: &InitialDistribution,
    coin: &CoinParams,
    grid: &[SpinState],
    opts: &EnsembleOptions,
) -> crate::Result<EnsembleAverage> {
    if grid.is_empty() {
        return Err(ObservableError::EmptyEnsemble.into());
    }
    if opts.record_every == 0 {
        return Err(ObservableError::InvalidRecordInterval.into());
    }
    dist.validate()?;

    let compute = || -> crate::Result<Vec<PartialSums>> {
        grid.par_chunks(CHUNK)
            .map(|chunk| run_chunk(dist, coin, chunk, opts))
            .collect()
    };
    let partials = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ObservableError::WorkerPool(e.to_string()))?
            .install(compute)?,
        None => compute()?,
    };

    let mut iter = partials.into_iter();
    let mut total = iter.next().expect("grid is non-empty");
    for p in iter {
        total.merge(&p);
    }
    let n = grid.len() as f64;
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x / n).collect::<Vec<_>>();
    let offset = build_initial_state(dist, &grid[0], opts.steps.max(1))?.offset();
    let distribution =
        DistributionSnapshot::new(opts.steps, offset, scale(total.p_up), scale(total.p_down));
    let points = total
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| VariancePoint {
            t,
            mean: total.mean[i] / n,
            second_moment: total.second[i] / n,
            variance: total.var[i] / n,
        })
        .collect();
    Ok(EnsembleAverage {
        members: grid.len(),
        distribution,
        variance: VarianceSeries { points },
    })
}
