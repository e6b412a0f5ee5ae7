//! Constant-detuning (abnormal) pulse analysis for two blocks.
//!
//! Abnormal extremals force a detuning that is constant in time,
//! `phi(t) = (a/b) t + c`. Closure of both blocks back to their ground
//! states then quantizes the candidates: `T = 2 pi sqrt(l'^2 - l^2)` and
//! `delta = +/- sqrt((2 l^2 - l'^2)/(l'^2 - l^2))` over integer pairs
//! `l < l' <= sqrt(2) l`. Because the smallest gap between squares past the
//! excluded `(1, 2)` pair is 7, every candidate is slower than the shaped
//! optimum; each is validated here by actual propagation, not only by the
//! closed formulas. For the simultaneous-excitation target the closure
//! conditions `cos(T/2) = cos(T sqrt(2)/2) = 0` have no common exact
//! solution at all; the scan below ships the strongest runnable evidence of
//! that, together with a rational stand-in that shows the checker would
//! detect a degeneracy if one existed.

use serde::Serialize;

use crate::error::PulseError;
use crate::propagate::propagate_constant_detuning;
use crate::pulse::PhasePulse;
use crate::qm::{Ket2, TlsIndex};
use crate::shooting::DEFAULT_DT;

pub const CLOSURE_TOL: f64 = 1e-9;

/// `T >= 2 sqrt(3) pi`, from the minimal gap between two squares.
pub fn time_lower_bound() -> f64 {
    2.0 * 3.0f64.sqrt() * std::f64::consts::PI
}

/// One constant-detuning candidate, validated by propagation.
#[derive(Debug, Clone, Serialize)]
pub struct AbnormalCandidate {
    pub l: u32,
    pub l_prime: u32,
    /// Signed detuning; both signs of the square root appear as separate
    /// candidates.
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Worst deviation of either block from returning to its ground state,
    /// `max_k (1 - |<0|psi_k(T)>|)`.
    pub closure_defect: f64,
    /// Whether the acquired phases satisfy the controlled-Z line
    /// `theta_2 - 2 theta_1 = pi (mod 2 pi)` to 1e-9.
    pub gate_phase_achieved: bool,
}

fn wrap_to_pi(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = x.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

fn validate_candidate(l: u32, l_prime: u32, delta: f64, t_final: f64) -> AbnormalCandidate {
    let psi1 = propagate_constant_detuning(TlsIndex(1), delta, t_final, &Ket2::ground());
    let psi2 = propagate_constant_detuning(TlsIndex(2), delta, t_final, &Ket2::ground());
    let o1 = psi1.a0;
    let o2 = psi2.a0;
    let closure_defect = (1.0 - o1.norm()).max(1.0 - o2.norm());
    let gate_phase_achieved = wrap_to_pi(o2.arg() - 2.0 * o1.arg() - std::f64::consts::PI).abs()
        < 1e-9
        && closure_defect <= CLOSURE_TOL;
    AbnormalCandidate { l, l_prime, delta, t_final, closure_defect, gate_phase_achieved }
}

/// Enumerate all candidates with `l' <= l_max`, both detuning signs, sorted
/// by duration (then by detuning for determinism).
pub fn abnormal_case2_scan(l_max: u32) -> Vec<AbnormalCandidate> {
    assert!(l_max >= 2);
    let mut out = Vec::new();
    for l in 1..l_max {
        // real detuning needs l'^2 <= 2 l^2
        let upper = ((2.0 * f64::from(l) * f64::from(l)).sqrt().floor() as u32).min(l_max);
        for l_prime in (l + 1)..=upper {
            let lsq = f64::from(l) * f64::from(l);
            let lpsq = f64::from(l_prime) * f64::from(l_prime);
            let delta = ((2.0 * lsq - lpsq) / (lpsq - lsq)).sqrt();
            let t_final = 2.0 * std::f64::consts::PI * (lpsq - lsq).sqrt();
            out.push(validate_candidate(l, l_prime, delta, t_final));
            out.push(validate_candidate(l, l_prime, -delta, t_final));
        }
    }
    out.sort_by(|a, b| {
        a.t_final
            .partial_cmp(&b.t_final)
            .unwrap()
            .then(a.delta.partial_cmp(&b.delta).unwrap())
    });
    out
}

/// Evidence that the simultaneous-excitation closure conditions have no
/// exact common solution.
#[derive(Debug, Clone)]
pub struct Case1Report {
    /// Smallest distance of `sqrt(2) x_n` to the grid `pi/2 + pi Z` over
    /// `x_n = pi/2 + pi n`, `n = 0..=n_max`.
    pub min_residual: f64,
    pub argmin_n: u64,
    /// Running minima `(n, residual)`: the trend shows approximate
    /// solutions get arbitrarily good while never reaching zero.
    pub envelope: Vec<(u64, f64)>,
}

fn half_grid_distance(x: f64) -> f64 {
    // distance of x to pi/2 + pi Z
    let r = (x - 0.5 * std::f64::consts::PI).rem_euclid(std::f64::consts::PI);
    r.min(std::f64::consts::PI - r)
}

/// Scan the exact solutions of the first block's closure condition and
/// measure how far the second block's condition is from holding at each.
pub fn case1_exact_infeasibility(n_max: u64) -> Case1Report {
    let sqrt2 = 2.0f64.sqrt();
    let mut min_residual = f64::MAX;
    let mut argmin_n = 0;
    let mut envelope = Vec::new();
    for n in 0..=n_max {
        let x = std::f64::consts::PI * (0.5 + n as f64);
        let residual = half_grid_distance(sqrt2 * x);
        if residual < min_residual {
            min_residual = residual;
            argmin_n = n;
            envelope.push((n, residual));
        }
    }
    Case1Report { min_residual, argmin_n, envelope }
}

/// Control experiment: replace `sqrt(2)` by the rational `p/q` and rerun the
/// same check in exact integer arithmetic. The residual of
/// `(p/q) x_n` to `pi/2 + pi Z` is `pi/(2q)` times
/// `min(m, 2q - m)` with `m = (p (2n+1) - q) mod 2q`, which hits exactly
/// zero for suitable `n`; a sound checker must report that.
pub fn rational_control_min_residual(p: u64, q: u64, n_max: u64) -> (f64, u64) {
    let mut best = u64::MAX;
    let mut argmin = 0;
    for n in 0..=n_max {
        // (p (2n+1) - q) mod 2q, using -q = +q (mod 2q) to stay unsigned
        let m = (p * (2 * n + 1) + q) % (2 * q);
        let folded = m.min(2 * q - m);
        if folded < best {
            best = folded;
            argmin = n;
            if best == 0 {
                break;
            }
        }
    }
    (best as f64 * std::f64::consts::PI / (2.0 * q as f64), argmin)
}

/// Sampled linear phase ramp `phi(t) = slope t + c`.
pub fn constant_detuning_pulse(slope: f64, c: f64, t_final: f64) -> Result<PhasePulse, PulseError> {
    PhasePulse::linear(slope, c, t_final, DEFAULT_DT)
}
