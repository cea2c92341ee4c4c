//! Time stepping of the amplitude recurrences
//!
//! ```text
//! a(j,t) = √q·a(j−1,t−1) + √(1−q)e^{iθ}·b(j−1,t−1)
//! b(j,t) = √(1−q)e^{iφ}·a(j+1,t−1) − √q e^{i(θ+φ)}·b(j+1,t−1)
//! ```
//!
//! i.e. the coin mixes the two spin components on every site, then the
//! spin-up part moves one site right and the spin-down part one site left.
//!
//! Worked example, Hadamard coin, `|↑⟩` at the origin:
//!
//! ```text
//! t=1: a(1) = 1/√2            b(−1) = 1/√2
//! t=2: a(2) = 1/2   a(0) = 1/2   b(0) = 1/2   b(−2) = −1/2
//! t=3: a(3) = 1/(2√2)  a(1) = 1/√2  a(−1) = −1/(2√2)
//!      b(1) = 1/(2√2)  b(−1) = 0    b(−3) = 1/(2√2)
//!  =>  P(3) = 1/8, P(1) = 5/8, P(−1) = 1/8, P(−3) = 1/8
//! ```

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{CoinParams, Matrix2, WalkState};

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error(
        "walk would leave its lattice window [{first}, {last}] at step {t}; \
         build the state with a longer horizon"
    )]
    WindowOverflow { t: usize, first: i64, last: i64 },
}

/// Called with the state after every step of [`evolve`].
pub trait Observer {
    fn observe(&mut self, state: &WalkState);
}

impl<F: FnMut(&WalkState)> Observer for F {
    fn observe(&mut self, state: &WalkState) {
        self(state)
    }
}

/// Observer that records nothing.
pub struct Silent;

impl Observer for Silent {
    fn observe(&mut self, _: &WalkState) {}
}

/// A walk being advanced in place with a pair of swapped buffers.
#[derive(Debug, Clone)]
pub struct Walker {
    state: WalkState,
    coin: Matrix2,
    next_a: Vec<Complex64>,
    next_b: Vec<Complex64>,
}

impl Walker {
    pub fn new(state: WalkState, coin: &CoinParams) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let n = state.len();
        Self {
            state,
            coin: coin.matrix(),
            next_a: vec![zero; n],
            next_b: vec![zero; n],
        }
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }

    pub fn into_state(self) -> WalkState {
        self.state
    }

    /// Advances one time step.
    ///
    /// Only the index range that can hold amplitude is swept; it grows by
    /// one site per side and per step, and the step fails before that range
    /// would cross the window edge.
    pub fn advance(&mut self) -> Result<(), WalkError> {
        let Some((lo, hi)) = self.state.support else {
            self.state.t += 1;
            return Ok(());
        };
        let n = self.state.len();
        if lo == 0 || hi + 1 >= n {
            let (first, last) = self.state.window();
            return Err(WalkError::WindowOverflow {
                t: self.state.t + 1,
                first,
                last,
            });
        }
        let [[c11, c12], [c21, c22]] = self.coin;
        let zero = Complex64::new(0.0, 0.0);
        let (a, b) = (&self.state.a, &self.state.b);
        let (na, nb) = (&mut self.next_a, &mut self.next_b);

        // the buffers held the state at t−1, whose support lies inside
        // [lo+1, hi−1]; everything written below covers [lo−1, hi+1]
        na[lo - 1] = zero;
        na[lo] = zero;
        nb[hi] = zero;
        nb[hi + 1] = zero;
        for i in lo..=hi {
            let (ai, bi) = (a[i], b[i]);
            na[i + 1] = c11 * ai + c12 * bi;
            nb[i - 1] = c21 * ai + c22 * bi;
        }

        std::mem::swap(&mut self.state.a, &mut self.next_a);
        std::mem::swap(&mut self.state.b, &mut self.next_b);
        self.state.support = Some((lo - 1, hi + 1));
        self.state.t += 1;
        Ok(())
    }
}

/// One application of the walk operator, returning a new state.
pub fn step(state: &WalkState, coin: &CoinParams) -> Result<WalkState, WalkError> {
    let mut walker = Walker::new(state.clone(), coin);
    walker.advance()?;
    Ok(walker.into_state())
}

/// Applies [`step`] `steps` times, handing the state to `observer` after
/// each step. `steps = 0` returns the input untouched.
pub fn evolve<O: Observer + ?Sized>(
    state: WalkState,
    coin: &CoinParams,
    steps: usize,
    observer: &mut O,
) -> Result<WalkState, WalkError> {
    let mut walker = Walker::new(state, coin);
    for _ in 0..steps {
        walker.advance()?;
        observer.observe(walker.state());
    }
    Ok(walker.into_state())
}
