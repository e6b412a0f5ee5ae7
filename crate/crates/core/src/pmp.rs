//! Costate-vector reconstruction and verification of the optimality
//! conditions.
//!
//! The correlation vectors `v_k = Im <chi_k| sigma |psi_k>` obey
//! `v_k' = sqrt(k) (cos phi, -sin phi, 0) x v_k`; their radii, the z-sum `C`
//! and the transverse-sum constraint
//! `(sum sqrt(k) v_k_x)^2 + (sum sqrt(k) v_k_y)^2 = 4` are conserved, and the
//! detuning satisfies `d = (1/2) sum k v_k_z`. For two blocks all of this is
//! rigid enough that the vectors can be rebuilt algebraically from the
//! detuning curve and the conserved triple alone; comparing that
//! reconstruction against the actual differential equations is the
//! verification step.

use num_complex::Complex64 as C64;

use crate::error::PmpError;
use crate::optimize::ExtremalRecord;
use crate::potential::InvariantTriple;
use crate::pulse::PhasePulse;
use crate::shooting::{phase_nodes, DetuningCurve};

const SQRT8: f64 = 2.828427124746190097603377448419396157;

/// Nodal samples of the two costate vectors.
#[derive(Debug, Clone)]
pub struct PmpVectors {
    pub dt: f64,
    pub v1: Vec<[f64; 3]>,
    pub v2: Vec<[f64; 3]>,
}

impl PmpVectors {
    pub fn len(&self) -> usize {
        self.v1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v1.is_empty()
    }

    /// Max drift of the radii from their initial values.
    pub fn max_radius_drift(&self) -> f64 {
        let mut worst = 0.0f64;
        for v in [&self.v1, &self.v2] {
            let r0 = norm3(&v[0]);
            for x in v {
                worst = worst.max((norm3(x) - r0).abs());
            }
        }
        worst
    }

    /// Max drift of `v1_z + v2_z` from its initial value.
    pub fn max_zsum_drift(&self) -> f64 {
        let c0 = self.v1[0][2] + self.v2[0][2];
        self.v1
            .iter()
            .zip(&self.v2)
            .map(|(a, b)| (a[2] + b[2] - c0).abs())
            .fold(0.0, f64::max)
    }

    /// Max deviation of the transverse-sum constraint from 4.
    pub fn max_constraint4_residual(&self) -> f64 {
        self.v1
            .iter()
            .zip(&self.v2)
            .map(|(a, b)| {
                let sx = a[0] + 2.0f64.sqrt() * b[0];
                let sy = a[1] + 2.0f64.sqrt() * b[1];
                (sx * sx + sy * sy - 4.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Rebuild both costate vectors along the curve from the conserved triple.
///
/// The z-components follow linearly from the detuning relation and the
/// conserved z-sum (`z1 = -2d + 2C`, `z2 = 2d - C`); the relative transverse
/// angle comes from the constraint and the `z1` rate; the overall angle is
/// fixed by control consistency `cos phi = (1/2) sum sqrt(k) v_k_x` (and its
/// sine counterpart), which determines it completely. Phases use the
/// `phi(0) = 0` gauge of the synthesized pulses.
pub fn reconstruct_vectors(
    curve: &DetuningCurve,
    inv: &InvariantTriple,
) -> Result<PmpVectors, PmpError> {
    let phi = phase_nodes(curve, 0.0);
    let r1sq = inv.r1 * inv.r1;
    let r2sq = inv.r2 * inv.r2;
    let mut v1 = Vec::with_capacity(curve.delta.len());
    let mut v2 = Vec::with_capacity(curve.delta.len());

    for ((&d, &dd), &ph) in curve.delta.iter().zip(&curve.ddelta).zip(&phi) {
        let z1 = -2.0 * d + 2.0 * inv.c;
        let z2 = 2.0 * d - inv.c;
        let rho1sq = r1sq - z1 * z1;
        let rho2sq = r2sq - z2 * z2;
        if rho1sq < -1e-9 || rho2sq < -1e-9 {
            return Err(PmpError::InconsistentInvariants(format!(
                "transverse radius squared fell to {:.3e}",
                rho1sq.min(rho2sq)
            )));
        }
        let rho1 = rho1sq.max(0.0).sqrt();
        let rho2 = rho2sq.max(0.0).sqrt();

        let denom = SQRT8 * rho1 * rho2;
        let (cos_rel, sin_rel) = if denom < 1e-12 {
            // grazing turning point: the transverse parts vanish, the
            // relative angle is immaterial
            (1.0, 0.0)
        } else {
            let c = (4.0 - rho1sq - 2.0 * rho2sq) / denom;
            let s = -8.0 * dd / denom;
            if c.abs() > 1.0 + 1e-6 {
                return Err(PmpError::InconsistentInvariants(format!(
                    "|cos(xi1 - xi2)| = {:.6}",
                    c.abs()
                )));
            }
            let n = c.hypot(s);
            (c / n, s / n)
        };

        // w = rho1 + sqrt(2) rho2 e^{-i rel}; control consistency demands
        // e^{i xi1} w = 2 e^{-i phi}
        let rel = sin_rel.atan2(cos_rel);
        let w = C64::new(rho1 + 2.0f64.sqrt() * rho2 * cos_rel, -(2.0f64.sqrt()) * rho2 * sin_rel);
        let xi1 = -ph - w.arg();
        let xi2 = xi1 - rel;
        v1.push([rho1 * xi1.cos(), rho1 * xi1.sin(), z1]);
        v2.push([rho2 * xi2.cos(), rho2 * xi2.sin(), z2]);
    }
    Ok(PmpVectors { dt: curve.dt, v1, v2 })
}

/// Residuals of one verification pass; every bound is pinned here.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub energy: f64,
    pub radius_drift: f64,
    pub zsum_drift: f64,
    pub constraint4: f64,
    pub ode_residual: f64,
    pub detuning_relation: f64,
}

impl VerificationReport {
    pub const TOL_ENERGY: f64 = 1e-6;
    pub const TOL_RADIUS: f64 = 1e-6;
    pub const TOL_ZSUM: f64 = 1e-6;
    pub const TOL_CONSTRAINT4: f64 = 1e-5;
    pub const TOL_ODE: f64 = 1e-3;
    pub const TOL_DETUNING: f64 = 1e-6;

    pub fn pass(&self) -> bool {
        self.energy <= Self::TOL_ENERGY
            && self.radius_drift <= Self::TOL_RADIUS
            && self.zsum_drift <= Self::TOL_ZSUM
            && self.constraint4 <= Self::TOL_CONSTRAINT4
            && self.ode_residual <= Self::TOL_ODE
            && self.detuning_relation <= Self::TOL_DETUNING
    }

    pub fn rows(&self) -> [(&'static str, f64, f64); 6] {
        [
            ("energy", self.energy, Self::TOL_ENERGY),
            ("radius drift", self.radius_drift, Self::TOL_RADIUS),
            ("z-sum drift", self.zsum_drift, Self::TOL_ZSUM),
            ("transverse-sum = 4", self.constraint4, Self::TOL_CONSTRAINT4),
            ("costate ODE", self.ode_residual, Self::TOL_ODE),
            ("detuning relation", self.detuning_relation, Self::TOL_DETUNING),
        ]
    }
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, value, tol) in self.rows() {
            writeln!(
                f,
                "{:<20} {:>12.3e}  (tol {:>8.1e})  {}",
                name,
                value,
                tol,
                if value <= tol { "pass" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

/// Verify every optimality invariant of a synthesized record.
pub fn verify_pmp(record: &ExtremalRecord) -> Result<VerificationReport, PmpError> {
    if record.delta.len() < 5 {
        return Err(PmpError::MissingData("detuning curve with at least five samples"));
    }
    if record.ddelta.len() != record.delta.len() {
        return Err(PmpError::MissingData("detuning rate samples matching the curve"));
    }
    if record.phi.len() != record.delta.len() {
        return Err(PmpError::MissingData("nodal phases matching the curve"));
    }
    let curve = record.curve();
    let vectors = reconstruct_vectors(&curve, &record.invariants)?;

    let energy = curve.max_energy_residual(&record.potential);
    let radius_drift = {
        // against the conserved triple itself, not just the initial sample
        let mut worst = 0.0f64;
        for (v, r) in [(&vectors.v1, record.invariants.r1), (&vectors.v2, record.invariants.r2)] {
            for x in v {
                worst = worst.max((norm3(x) - r).abs());
            }
        }
        worst
    };
    let zsum_drift = vectors
        .v1
        .iter()
        .zip(&vectors.v2)
        .map(|(a, b)| (a[2] + b[2] - record.invariants.c).abs())
        .fold(0.0, f64::max);
    let constraint4 = vectors.max_constraint4_residual();
    let detuning_relation = vectors
        .v1
        .iter()
        .zip(&vectors.v2)
        .zip(&record.delta)
        .map(|((a, b), &d)| (d - 0.5 * (a[2] + 2.0 * b[2])).abs())
        .fold(0.0, f64::max);
    let ode_residual = ode_residual(&vectors, &record.phi);

    Ok(VerificationReport {
        energy,
        radius_drift,
        zsum_drift,
        constraint4,
        ode_residual,
        detuning_relation,
    })
}

/// Central finite differences of the reconstructed vectors against the
/// cross-product right-hand side, max over interior nodes, blocks and
/// components.
fn ode_residual(vectors: &PmpVectors, phi: &[f64]) -> f64 {
    let dt = vectors.dt;
    let mut worst = 0.0f64;
    for (k, v) in [(1.0f64, &vectors.v1), (2.0, &vectors.v2)] {
        let sk = k.sqrt();
        for j in 1..v.len() - 1 {
            let axis = [phi[j].cos(), -phi[j].sin(), 0.0];
            let rhs = cross(&axis, &v[j]);
            for c in 0..3 {
                let fd = (v[j + 1][c] - v[j - 1][c]) / (2.0 * dt);
                worst = worst.max((fd - sk * rhs[c]).abs());
            }
        }
    }
    worst
}

/// Result of driving the general N-block costate system with a pulse.
#[derive(Debug, Clone)]
pub struct GeneralCostates {
    pub dt: f64,
    /// `samples[j][k]` is the vector of block `k+1` at node `j`.
    pub samples: Vec<Vec<[f64; 3]>>,
    pub max_constraint4_drift: f64,
    pub max_radius_drift: f64,
    pub max_zsum_drift: f64,
}

/// Integrate `v_k' = sqrt(k) (cos phi, -sin phi, 0) x v_k` for `k = 1..=N`
/// under a piecewise-constant pulse. Each step is an exact rotation about
/// the in-plane axis, so radii are conserved to rounding; the reported
/// drifts measure how consistent the pulse is with the costate system.
pub fn costate_ode_general(
    pulse: &PhasePulse,
    v_init: &[[f64; 3]],
) -> Result<GeneralCostates, PmpError> {
    let n = v_init.len();
    if n == 0 {
        return Err(PmpError::InconsistentInitialData("no initial vectors".into()));
    }
    let (sx, sy) = transverse_sums(v_init);
    let c4 = sx * sx + sy * sy;
    if (c4 - 4.0).abs() > 1e-6 {
        return Err(PmpError::InconsistentInitialData(format!(
            "transverse-sum constraint is {c4:.8}, not 4"
        )));
    }
    let phi0 = pulse.phi[0];
    if (phi0.cos() - 0.5 * sx).abs() > 1e-6 || (phi0.sin() + 0.5 * sy).abs() > 1e-6 {
        return Err(PmpError::InconsistentInitialData(format!(
            "control consistency at t = 0: cos phi = {:.8} vs {:.8}, sin phi = {:.8} vs {:.8}",
            phi0.cos(),
            0.5 * sx,
            phi0.sin(),
            -0.5 * sy
        )));
    }

    let radii0: Vec<f64> = v_init.iter().map(norm3).collect();
    let zsum0: f64 = v_init.iter().map(|v| v[2]).sum();
    let mut samples = Vec::with_capacity(pulse.steps() + 1);
    samples.push(v_init.to_vec());
    let mut current = v_init.to_vec();
    let mut drift4 = (c4 - 4.0f64).abs();
    let mut drift_r = 0.0f64;
    let mut drift_z = 0.0f64;

    for &ph in &pulse.phi {
        let axis = [ph.cos(), -ph.sin(), 0.0];
        for (k, v) in current.iter_mut().enumerate() {
            let theta = ((k + 1) as f64).sqrt() * pulse.dt;
            *v = rotate(v, &axis, theta);
        }
        let (sx, sy) = transverse_sums(&current);
        drift4 = drift4.max((sx * sx + sy * sy - 4.0).abs());
        for (v, r0) in current.iter().zip(&radii0) {
            drift_r = drift_r.max((norm3(v) - r0).abs());
        }
        let zsum: f64 = current.iter().map(|v| v[2]).sum();
        drift_z = drift_z.max((zsum - zsum0).abs());
        samples.push(current.clone());
    }

    Ok(GeneralCostates {
        dt: pulse.dt,
        samples,
        max_constraint4_drift: drift4,
        max_radius_drift: drift_r,
        max_zsum_drift: drift_z,
    })
}

fn transverse_sums(vs: &[[f64; 3]]) -> (f64, f64) {
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (k, v) in vs.iter().enumerate() {
        let sk = ((k + 1) as f64).sqrt();
        sx += sk * v[0];
        sy += sk * v[1];
    }
    (sx, sy)
}

/// Rodrigues rotation of `v` about the unit axis `u` by angle `theta`.
fn rotate(v: &[f64; 3], u: &[f64; 3], theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    let uxv = cross(u, v);
    let udv = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    [
        v[0] * c + uxv[0] * s + u[0] * udv * (1.0 - c),
        v[1] * c + uxv[1] * s + u[1] * udv * (1.0 - c),
        v[2] * c + uxv[2] * s + u[2] * udv * (1.0 - c),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{potential_from_asym, potential_from_sym, recover_invariants};
    use crate::shooting::integrate_detuning;

    fn case_i_curve() -> (DetuningCurve, InvariantTriple) {
        let pot = potential_from_sym(1.26, -1.17).unwrap();
        let curve = integrate_detuning(&pot, 2, 1, 1e-3).unwrap();
        let inv = recover_invariants(&pot).unwrap();
        (curve, inv)
    }

    #[test]
    fn zero_zsum_makes_v1z_track_the_detuning() {
        let (curve, inv) = case_i_curve();
        let vectors = reconstruct_vectors(&curve, &inv).unwrap();
        for (v, &d) in vectors.v1.iter().zip(&curve.delta) {
            assert!((v[2] + 2.0 * d).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_are_equatorial_when_zsum_vanishes() {
        let (curve, inv) = case_i_curve();
        let vectors = reconstruct_vectors(&curve, &inv).unwrap();
        assert!(vectors.v1[0][2].abs() < 1e-12);
        assert!(vectors.v2[0][2].abs() < 1e-12);
        let last = vectors.len() - 1;
        assert!(vectors.v1[last][2].abs() < 1e-7);
        assert!(vectors.v2[last][2].abs() < 1e-7);
    }

    #[test]
    fn reconstruction_satisfies_all_conservation_laws() {
        for (curve, inv) in [case_i_curve(), {
            let pot = potential_from_asym(0.67, -0.84, -0.39).unwrap();
            let curve = integrate_detuning(&pot, 3, 1, 1e-3).unwrap();
            let inv = recover_invariants(&pot).unwrap();
            (curve, inv)
        }] {
            let vectors = reconstruct_vectors(&curve, &inv).unwrap();
            assert!(vectors.max_radius_drift() < 1e-9);
            assert!(vectors.max_zsum_drift() < 1e-9);
            assert!(vectors.max_constraint4_residual() < 1e-5);
        }
    }

    #[test]
    fn reconstruction_obeys_the_costate_ode() {
        let (curve, inv) = case_i_curve();
        let vectors = reconstruct_vectors(&curve, &inv).unwrap();
        let phi = phase_nodes(&curve, 0.0);
        assert!(ode_residual(&vectors, &phi) < 1e-3);
    }

    #[test]
    fn inconsistent_radii_are_rejected() {
        let (curve, mut inv) = case_i_curve();
        inv.r2 = 0.3; // far below the max of |z2|
        assert!(matches!(
            reconstruct_vectors(&curve, &inv),
            Err(PmpError::InconsistentInvariants(_))
        ));
    }

    #[test]
    fn ode_endpoint_matches_reconstruction() {
        let (curve, inv) = case_i_curve();
        let vectors = reconstruct_vectors(&curve, &inv).unwrap();
        let pulse = crate::shooting::phase_from_detuning(&curve, 0.0).unwrap();
        let init = vec![vectors.v1[0], vectors.v2[0]];
        let run = costate_ode_general(&pulse, &init).unwrap();
        let last = run.samples.last().unwrap();
        let want = [vectors.v1.last().unwrap(), vectors.v2.last().unwrap()];
        for (got, want) in last.iter().zip(want) {
            for c in 0..3 {
                assert!(
                    (got[c] - want[c]).abs() < 1e-4,
                    "component {c}: {} vs {}",
                    got[c],
                    want[c]
                );
            }
        }
        assert!(run.max_radius_drift < 1e-9);
        assert!(run.max_zsum_drift < 1e-6);
        assert!(run.max_constraint4_drift < 1e-5);
    }

    #[test]
    fn stationary_control_fixes_the_single_block_vector() {
        let phi0 = 0.8f64;
        let pulse = PhasePulse::constant(phi0, 5.0, 1e-3).unwrap();
        let init = vec![[2.0 * phi0.cos(), -2.0 * phi0.sin(), 0.0]];
        let run = costate_ode_general(&pulse, &init).unwrap();
        let last = run.samples.last().unwrap()[0];
        for c in 0..3 {
            assert!((last[c] - init[0][c]).abs() < 1e-12);
        }
    }

    #[test]
    fn three_block_radii_survive_any_pulse() {
        // radii are conserved regardless of control consistency; build
        // consistent initial data by rescaling the transverse components
        let raw: [[f64; 3]; 3] =
            [[0.3, -0.2, 0.5], [0.4, 0.1, -0.8], [-0.2, 0.6, 0.1]];
        let (sx, sy) = transverse_sums(&raw);
        let scale = 2.0 / sx.hypot(sy);
        let init: Vec<[f64; 3]> =
            raw.iter().map(|v| [v[0] * scale, v[1] * scale, v[2]]).collect();
        let (sx, sy) = transverse_sums(&init);
        let phi0 = (-sy).atan2(sx);
        let pulse = PhasePulse::constant(phi0, 10.0, 1e-3).unwrap();
        let run = costate_ode_general(&pulse, &init).unwrap();
        assert!(run.max_radius_drift < 1e-6);
    }

    #[test]
    fn inconsistent_initial_data_is_rejected() {
        let pulse = PhasePulse::constant(0.0, 1.0, 1e-3).unwrap();
        let err = costate_ode_general(&pulse, &[[5.0, 0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, PmpError::InconsistentInitialData(_)));
        // constraint holds but the phase points the wrong way
        let err = costate_ode_general(&pulse, &[[0.0, 2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, PmpError::InconsistentInitialData(_)));
    }
}
