//! Sampled phase controls.
//!
//! A pulse is a piecewise-constant laser phase on a uniform time grid with
//! the drive amplitude pinned at its maximum (set to 1). `phi[j]` is the
//! phase held on step `j`, i.e. on `[j*dt, (j+1)*dt)`; step values produced
//! from a smooth phase curve are midpoint samples of that curve.

use serde::{Deserialize, Serialize};

use crate::error::PulseError;

/// Piecewise-constant phase control on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePulse {
    /// Step length, in inverse Rabi frequencies.
    pub dt: f64,
    /// Phase on each step, radians.
    pub phi: Vec<f64>,
}

impl PhasePulse {
    pub fn new(dt: f64, phi: Vec<f64>) -> Result<Self, PulseError> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(PulseError::BadStep(dt));
        }
        if phi.is_empty() {
            return Err(PulseError::Empty);
        }
        if let Some(&bad) = phi.iter().find(|p| !p.is_finite()) {
            return Err(PulseError::NonFinite(bad));
        }
        Ok(Self { dt, phi })
    }

    /// Constant-phase pulse of duration `t` sampled at roughly `dt_target`.
    pub fn constant(phi: f64, t: f64, dt_target: f64) -> Result<Self, PulseError> {
        let n = (t / dt_target).round().max(1.0) as usize;
        Self::new(t / n as f64, vec![phi; n])
    }

    /// Linear ramp `phi(t) = slope * t + offset`, stored as midpoint samples.
    pub fn linear(slope: f64, offset: f64, t: f64, dt_target: f64) -> Result<Self, PulseError> {
        let n = (t / dt_target).round().max(1.0) as usize;
        let dt = t / n as f64;
        let phi = (0..n).map(|j| slope * (j as f64 + 0.5) * dt + offset).collect();
        Self::new(dt, phi)
    }

    pub fn steps(&self) -> usize {
        self.phi.len()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.phi.len() as f64
    }

    /// Phase held at time `t` (clamped to the pulse support).
    pub fn sample(&self, t: f64) -> f64 {
        let j = ((t / self.dt).floor() as isize).clamp(0, self.phi.len() as isize - 1);
        self.phi[j as usize]
    }

    /// New pulse with a constant phase offset added to every step.
    pub fn shifted(&self, offset: f64) -> Self {
        Self { dt: self.dt, phi: self.phi.iter().map(|p| p + offset).collect() }
    }

    /// The mirrored control `t -> T - t`, `phi -> 2 pi - phi`: the other
    /// member of the time-reversal symmetry family.
    pub fn time_reversed(&self) -> Self {
        let phi = self.phi.iter().rev().map(|p| 2.0 * std::f64::consts::PI - p).collect();
        Self { dt: self.dt, phi }
    }

    /// Resample onto `n` uniform steps of the same total duration, reading
    /// the piecewise-constant value at each new step midpoint.
    pub fn resampled(&self, n: usize) -> Self {
        let t = self.duration();
        let dt = t / n as f64;
        let phi = (0..n).map(|j| self.sample((j as f64 + 0.5) * dt)).collect();
        Self { dt, phi }
    }
}
