//! Uniform reporting grids shared by every propagator.

use crate::statevector::Statevector;
use crate::{Error, Result};

/// Upper bound on the number of steps a grid may contain.
pub const DEFAULT_STEP_CAP: usize = 10_000_000;

/// `t_k = t_start + k dt` for `k = 0..=steps`, with `t_steps <= t_end`.
///
/// Times are computed from the index, never accumulated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::with_cap(t_start, t_end, dt, DEFAULT_STEP_CAP)
    }

    pub fn with_cap(t_start: f64, t_end: f64, dt: f64, cap: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::NonFinite("time window"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if t_end < t_start {
            return Err(Error::InvalidParameter(format!(
                "t_end ({t_end}) precedes t_start ({t_start})"
            )));
        }
        let span = (t_end - t_start) / dt;
        // Absorb round-off such as (214.64 - 210.64) / 0.2 = 19.999999999999
        let steps = (span + 1e-9 * span.max(1.0)).floor();
        if steps > cap as f64 {
            return Err(Error::InvalidParameter(format!(
                "{steps} steps exceed the cap of {cap}"
            )));
        }
        Ok(Self {
            t_start,
            dt,
            steps: steps as usize,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// States on a time grid, including the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Statevector>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&Statevector> {
        self.states.last()
    }

    /// Marginal probability of `outcome` on `qubit` at every grid point.
    pub fn marginals(&self, qubit: usize, outcome: bool) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|s| s.marginal_probability(qubit, outcome))
            .collect()
    }
}
