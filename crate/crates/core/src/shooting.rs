//! Shooting integration of the detuning equation of motion.
//!
//! The detuning solves `dd/dt = -V'(d)` (second-order form, which stays
//! regular at the turning points) from `d(0) = 0`,
//! `d'(0) = sign * sqrt(-2 V(0))`, so the conserved energy
//! `d'^2/2 + V(d)` is exactly zero. The pulse ends at a prescribed zero
//! crossing of `d`, located by bisection on the step that brackets it; the
//! curve is then re-integrated on a uniform grid that lands exactly on the
//! crossing time.

use serde::{Deserialize, Serialize};

use crate::error::{PulseError, ShootingError};
use crate::potential::QuarticPotential;
use crate::pulse::PhasePulse;

/// Default integration step, in inverse Rabi frequencies.
pub const DEFAULT_DT: f64 = 1e-3;
/// Give up looking for crossings past this time.
pub const DEFAULT_TIME_CAP: f64 = 100.0;
/// Allowed zero-energy residual along the curve.
pub const ENERGY_TOL: f64 = 1e-6;
/// Crossing localization tolerance in the detuning value.
const CROSSING_TOL: f64 = 1e-10;

/// Nodal samples of the detuning and its rate on a uniform grid covering
/// `[0, T]`; `delta[j]` sits at `t = j*dt` and `T = dt * (len - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningCurve {
    pub dt: f64,
    pub delta: Vec<f64>,
    pub ddelta: Vec<f64>,
    pub t_final: f64,
}

impl DetuningCurve {
    pub fn steps(&self) -> usize {
        self.delta.len() - 1
    }

    /// Max of `|d'^2/2 + V(d)|` over the samples.
    pub fn max_energy_residual(&self, pot: &QuarticPotential) -> f64 {
        self.delta
            .iter()
            .zip(&self.ddelta)
            .map(|(&d, &dd)| (0.5 * dd * dd + pot.value(d)).abs())
            .fold(0.0, f64::max)
    }
}

fn accel(pot: &QuarticPotential, d: f64) -> f64 {
    -pot.derivative(d)
}

/// One classical RK4 step of the system `(d, d')`.
fn rk4_step(pot: &QuarticPotential, d: f64, v: f64, h: f64) -> (f64, f64) {
    let a1 = accel(pot, d);
    let (d2, v2) = (d + 0.5 * h * v, v + 0.5 * h * a1);
    let a2 = accel(pot, d2);
    let (d3, v3) = (d + 0.5 * h * v2, v + 0.5 * h * a2);
    let a3 = accel(pot, d3);
    let (d4, v4) = (d + h * v3, v + h * a3);
    let a4 = accel(pot, d4);
    (
        d + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
        v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    )
}

/// Integrate until the `crossings`-th zero of `d(t)` with `t > 0` and return
/// nodal samples on a grid whose last node is the crossing time.
pub fn integrate_detuning(
    pot: &QuarticPotential,
    crossings: u32,
    sign: i8,
    dt: f64,
) -> Result<DetuningCurve, ShootingError> {
    integrate_detuning_capped(pot, crossings, sign, dt, DEFAULT_TIME_CAP)
}

pub fn integrate_detuning_capped(
    pot: &QuarticPotential,
    crossings: u32,
    sign: i8,
    dt: f64,
    time_cap: f64,
) -> Result<DetuningCurve, ShootingError> {
    assert!(crossings >= 1, "need at least one terminal crossing");
    assert!(dt > 0.0 && dt.is_finite());
    let v0 = pot.value(0.0);
    if !(v0 < 0.0) {
        return Err(ShootingError::ForbiddenStart(v0));
    }
    let speed0 = f64::from(sign.signum()) * (-2.0 * v0).sqrt();

    // Pass 1: march at the raw step and bisect the bracketing step of the
    // final crossing.
    let mut d = 0.0f64;
    let mut v = speed0;
    let mut t = 0.0f64;
    let mut seen = 0u32;
    let t_final = loop {
        if t > time_cap {
            return Err(ShootingError::NoCrossing { wanted: crossings, cap: time_cap });
        }
        let (dn, vn) = rk4_step(pot, d, v, dt);
        if d * dn < 0.0 || (dn == 0.0 && d != 0.0) {
            seen += 1;
            if seen == crossings {
                // Bisect on the sub-step length h: d(t + h) = 0. Run to
                // machine precision so the located time is a smooth
                // function of the potential parameters; this lands far
                // inside the 1e-10 localization tolerance.
                let (mut lo, mut hi) = (0.0, dt);
                for _ in 0..80 {
                    let h = 0.5 * (lo + hi);
                    let (dm, _) = rk4_step(pot, d, v, h);
                    if dm == 0.0 {
                        lo = h;
                        hi = h;
                        break;
                    }
                    if d * dm < 0.0 {
                        hi = h;
                    } else {
                        lo = h;
                    }
                }
                let h = 0.5 * (lo + hi);
                debug_assert!(rk4_step(pot, d, v, h).0.abs() <= CROSSING_TOL);
                break t + h;
            }
        }
        d = dn;
        v = vn;
        t += dt;
    };

    // Pass 2: re-integrate on a uniform grid ending exactly at t_final.
    let n = (t_final / dt).round().max(1.0) as usize;
    let h = t_final / n as f64;
    let mut delta = Vec::with_capacity(n + 1);
    let mut ddelta = Vec::with_capacity(n + 1);
    let (mut d, mut v) = (0.0, speed0);
    delta.push(d);
    ddelta.push(v);
    for _ in 0..n {
        let (dn, vn) = rk4_step(pot, d, v, h);
        d = dn;
        v = vn;
        delta.push(d);
        ddelta.push(v);
    }
    let curve = DetuningCurve { dt: h, delta, ddelta, t_final };
    let residual = curve.max_energy_residual(pot);
    if residual > ENERGY_TOL {
        return Err(ShootingError::EnergyDrift { residual, tol: ENERGY_TOL });
    }
    Ok(curve)
}

/// Nodal phases `phi(t_j) = phi0 + integral of d` by the cumulative
/// trapezoidal rule on the curve grid.
pub fn phase_nodes(curve: &DetuningCurve, phi0: f64) -> Vec<f64> {
    let mut phi = Vec::with_capacity(curve.delta.len());
    let mut acc = phi0;
    phi.push(acc);
    for w in curve.delta.windows(2) {
        acc += 0.5 * curve.dt * (w[0] + w[1]);
        phi.push(acc);
    }
    phi
}

/// Piecewise-constant pulse carrying the phase integral of the curve; step
/// `j` holds the midpoint value `(phi(t_j) + phi(t_{j+1}))/2`.
pub fn phase_from_detuning(curve: &DetuningCurve, phi0: f64) -> Result<PhasePulse, PulseError> {
    let nodes = phase_nodes(curve, phi0);
    let phi = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    PhasePulse::new(curve.dt, phi)
}
