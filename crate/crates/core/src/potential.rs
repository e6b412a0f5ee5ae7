//! The quartic detuning potential and its parametrizations.
//!
//! For two blocks the optimal detuning behaves like a zero-energy classical
//! particle in `V(d) = d^4/8 + c2 d^2 + c1 d + c0`. The coefficients are
//! fixed by three conserved quantities of the costate vectors: the radii
//! `r1`, `r2` and the z-sum `C`. Two factored parametrizations expose the
//! real roots directly: a symmetric one `(d0, V0)` and an asymmetric one
//! `(d+, d-, V0)`.

use serde::{Deserialize, Serialize};

use crate::error::PotentialError;

/// Coefficients of `V(d) = c4 d^4 + c3 d^3 + c2 d^2 + c1 d + c0`; in this
/// family `c4 = 1/8` and `c3 = 0` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticPotential {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// The conserved triple behind a quartic potential: `C` is the summed
/// z-component of the costate vectors, `r1`, `r2` their radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantTriple {
    #[serde(rename = "C")]
    pub c: f64,
    pub r1: f64,
    pub r2: f64,
}

impl QuarticPotential {
    pub fn value(&self, d: f64) -> f64 {
        (((self.c4 * d + self.c3) * d + self.c2) * d + self.c1) * d + self.c0
    }

    pub fn derivative(&self, d: f64) -> f64 {
        ((4.0 * self.c4 * d + 3.0 * self.c3) * d + 2.0 * self.c2) * d + self.c1
    }

    /// All real roots, ascending, found by bisection on sign changes over a
    /// bracketing scan. Good to ~1e-12 in the root.
    pub fn real_roots(&self) -> Vec<f64> {
        // All roots of d^4/8 + ... lie within |d| <= 1 + 8*max|c_i|.
        let bound = 1.0
            + 8.0 * self.c0.abs().max(self.c1.abs()).max(self.c2.abs()).max(self.c3.abs());
        let n = 4000;
        let mut roots = Vec::new();
        let mut prev_d = -bound;
        let mut prev_v = self.value(prev_d);
        for j in 1..=n {
            let d = -bound + 2.0 * bound * j as f64 / n as f64;
            let v = self.value(d);
            if prev_v == 0.0 {
                roots.push(prev_d);
            } else if prev_v * v < 0.0 {
                let (mut lo, mut hi) = (prev_d, d);
                let (mut flo, _) = (prev_v, v);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fmid = self.value(mid);
                    if fmid == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo * fmid < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_d = d;
            prev_v = v;
        }
        if prev_v == 0.0 {
            roots.push(prev_d);
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        roots
    }
}

/// Symmetric two-root form `V(d) = (d^2 - d0^2)(d^2/8 - v0/d0^2)` with roots
/// at exactly `+/- d0` and depth `V(0) = v0 < 0`.
pub fn potential_from_sym(delta0: f64, v0: f64) -> Result<QuarticPotential, PotentialError> {
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(PotentialError::InvalidParameters(format!("delta0 = {delta0}, need > 0")));
    }
    if !(v0 < 0.0) || !v0.is_finite() {
        return Err(PotentialError::InvalidParameters(format!(
            "v0 = {v0}, need < 0 for a classically allowed start"
        )));
    }
    let d0sq = delta0 * delta0;
    Ok(QuarticPotential {
        c0: v0,
        c1: 0.0,
        c2: -(v0 / d0sq + d0sq / 8.0),
        c3: 0.0,
        c4: 0.125,
    })
}

/// Asymmetric two-root form
/// `V(d) = (d - d+)(d - d-)(d^2/8 + (d+ + d-) d/8 + v0/(d+ d-))`
/// with roots at exactly `d+` and `d-` and `V(0) = v0 < 0`.
pub fn potential_from_asym(
    delta_plus: f64,
    delta_minus: f64,
    v0: f64,
) -> Result<QuarticPotential, PotentialError> {
    if !(delta_plus > 0.0) || !(delta_minus < 0.0) {
        return Err(PotentialError::InvalidParameters(format!(
            "need delta_plus > 0 > delta_minus, got ({delta_plus}, {delta_minus})"
        )));
    }
    if !(v0 < 0.0) || !v0.is_finite() {
        return Err(PotentialError::InvalidParameters(format!("v0 = {v0}, need < 0")));
    }
    let s = delta_plus + delta_minus;
    let p = delta_plus * delta_minus;
    let q = v0 / p;
    Ok(QuarticPotential {
        c0: v0,
        c1: s * (p / 8.0 - q),
        c2: q + (p - s * s) / 8.0,
        c3: 0.0,
        c4: 0.125,
    })
}

/// Coefficients from the conserved triple:
/// `c2 = (-2C^2 + r1^2 - 2 r2^2 + 12)/16`, `c1 = -C`,
/// `c0 = ((6C^2 - r1^2 - 2r2^2 + 4)^2 - 8(4C^2 - r1^2)(C^2 - r2^2))/128`.
pub fn potential_coeffs(inv: &InvariantTriple) -> QuarticPotential {
    let c2 = inv.c * inv.c;
    let r1sq = inv.r1 * inv.r1;
    let r2sq = inv.r2 * inv.r2;
    let p = 6.0 * c2 - r1sq - 2.0 * r2sq + 4.0;
    QuarticPotential {
        c0: (p * p - 8.0 * (4.0 * c2 - r1sq) * (c2 - r2sq)) / 128.0,
        c1: -inv.c,
        c2: (-2.0 * c2 + r1sq - 2.0 * r2sq + 12.0) / 16.0,
        c3: 0.0,
        c4: 0.125,
    }
}

/// Invert the coefficient map. `C = -c1`; eliminating `r1^2` from the `c2`
/// relation makes the `c0` relation linear in `r2^2`, so the solution is
/// unique when it exists. Fails when either squared radius comes out
/// negative, which marks coefficients outside the reachable family.
pub fn recover_invariants(pot: &QuarticPotential) -> Result<InvariantTriple, PotentialError> {
    if (pot.c4 - 0.125).abs() > 1e-12 || pot.c3.abs() > 1e-12 {
        return Err(PotentialError::InvalidParameters(format!(
            "expected c4 = 1/8 and c3 = 0, got ({}, {})",
            pot.c4, pot.c3
        )));
    }
    let c = -pot.c1;
    let csq = c * c;
    // r1^2 = 2 r2^2 + kappa from the c2 relation
    let kappa = 16.0 * pot.c2 + 2.0 * csq - 12.0;
    let alpha = 6.0 * csq - kappa + 4.0;
    let beta = 4.0 * csq - kappa;
    let r2sq = (alpha * alpha - 8.0 * beta * csq - 128.0 * pot.c0) / 32.0;
    let r1sq = 2.0 * r2sq + kappa;
    if r1sq < -1e-12 || r2sq < -1e-12 {
        return Err(PotentialError::NoRealSolution);
    }
    let inv = InvariantTriple { c, r1: r1sq.max(0.0).sqrt(), r2: r2sq.max(0.0).sqrt() };
    // Guard against silent drift of the two polynomial relations.
    let back = potential_coeffs(&inv);
    let residual = (back.c0 - pot.c0).abs().max((back.c2 - pot.c2).abs());
    if residual > 1e-9 * (1.0 + pot.c0.abs().max(pot.c2.abs())) {
        return Err(PotentialError::NoRealSolution);
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_expansion_matches_hand_result() {
        // (d^2 - 1)(d^2/8 + 1) = d^4/8 + 7/8 d^2 - 1
        let pot = potential_from_sym(1.0, -1.0).unwrap();
        assert_abs_diff_eq!(pot.c4, 0.125);
        assert_abs_diff_eq!(pot.c3, 0.0);
        assert_abs_diff_eq!(pot.c2, 7.0 / 8.0);
        assert_abs_diff_eq!(pot.c1, 0.0);
        assert_abs_diff_eq!(pot.c0, -1.0);
    }

    #[test]
    fn symmetric_case_i_parameters() {
        let pot = potential_from_sym(1.26, -1.17).unwrap();
        assert!(pot.value(1.26).abs() < 1e-12);
        assert!(pot.value(-1.26).abs() < 1e-12);
        assert!((pot.value(0.0) + 1.17).abs() < 1e-12);
    }

    #[test]
    fn symmetric_roots_exact_by_construction() {
        let pot = potential_from_sym(2.0, -0.5).unwrap();
        assert!(pot.value(2.0).abs() < 1e-12);
        assert!(pot.value(-2.0).abs() < 1e-12);
        let roots = pot.real_roots();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 2.0).abs() < 1e-9);
        assert!((roots[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_case_ii_parameters() {
        let pot = potential_from_asym(0.67, -0.84, -0.39).unwrap();
        assert!(pot.value(0.67).abs() < 1e-12);
        assert!(pot.value(-0.84).abs() < 1e-12);
        assert!((pot.value(0.0) + 0.39).abs() < 1e-12);
        assert_abs_diff_eq!(pot.c4, 0.125);
        assert_abs_diff_eq!(pot.c3, 0.0);
    }

    #[test]
    fn asymmetric_reduces_to_symmetric_limit() {
        let a = potential_from_asym(1.0, -1.0, -1.0).unwrap();
        let b = potential_from_sym(1.0, -1.0).unwrap();
        assert_abs_diff_eq!(a.c0, b.c0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.c1, b.c1, epsilon = 1e-15);
        assert_abs_diff_eq!(a.c2, b.c2, epsilon = 1e-15);
    }

    #[test]
    fn asymmetric_wide_roots() {
        let pot = potential_from_asym(3.07, -0.13, -1.00).unwrap();
        assert!(pot.value(3.07).abs() < 1e-12);
        assert!(pot.value(-0.13).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_parameter_signs() {
        assert!(potential_from_sym(1.0, 0.5).is_err());
        assert!(potential_from_sym(-1.0, -0.5).is_err());
        assert!(potential_from_asym(-0.5, -1.0, -0.3).is_err());
        assert!(potential_from_asym(0.5, 1.0, -0.3).is_err());
        assert!(potential_from_asym(0.5, -1.0, 0.3).is_err());
    }

    #[test]
    fn coefficient_map_hand_values() {
        let pot = potential_coeffs(&InvariantTriple { c: 0.0, r1: 2.0, r2: 2.0 });
        assert_abs_diff_eq!(pot.c2, 0.5);
        assert_abs_diff_eq!(pot.c1, 0.0);
        assert_abs_diff_eq!(pot.c0, -0.5);

        let pot = potential_coeffs(&InvariantTriple { c: 0.0, r1: 0.0, r2: 0.0 });
        assert_abs_diff_eq!(pot.c2, 0.75);
        assert_abs_diff_eq!(pot.c0, 0.125);

        let pot = potential_coeffs(&InvariantTriple { c: 1.0, r1: 1.0, r2: 1.0 });
        assert_abs_diff_eq!(pot.c2, 9.0 / 16.0);
        assert_abs_diff_eq!(pot.c1, -1.0);
        assert_abs_diff_eq!(pot.c0, 49.0 / 128.0);
    }

    #[test]
    fn recover_round_trips_hand_cases() {
        for inv in [
            InvariantTriple { c: 0.0, r1: 2.0, r2: 2.0 },
            InvariantTriple { c: 1.0, r1: 1.0, r2: 1.0 },
        ] {
            let got = recover_invariants(&potential_coeffs(&inv)).unwrap();
            assert_abs_diff_eq!(got.c, inv.c, epsilon = 1e-12);
            assert_abs_diff_eq!(got.r1, inv.r1, epsilon = 1e-12);
            assert_abs_diff_eq!(got.r2, inv.r2, epsilon = 1e-12);
        }
    }

    #[test]
    fn case_i_potential_has_a_real_branch() {
        let pot = potential_from_sym(1.26, -1.17).unwrap();
        let inv = recover_invariants(&pot).unwrap();
        assert_abs_diff_eq!(inv.c, 0.0, epsilon = 1e-12);
        assert!(inv.r1 >= 0.0 && inv.r2 >= 0.0);
        let back = potential_coeffs(&inv);
        assert!((back.c0 - pot.c0).abs() < 1e-9);
        assert!((back.c1 - pot.c1).abs() < 1e-9);
        assert!((back.c2 - pot.c2).abs() < 1e-9);
    }

    #[test]
    fn unreachable_coefficients_are_rejected() {
        // A deep symmetric well with tiny curvature needs r2^2 < 0.
        let pot = QuarticPotential { c0: 10.0, c1: 0.0, c2: 2.0, c3: 0.0, c4: 0.125 };
        assert!(matches!(recover_invariants(&pot), Err(PotentialError::NoRealSolution)));
        let bad = QuarticPotential { c0: -1.0, c1: 0.0, c2: 0.5, c3: 0.1, c4: 0.125 };
        assert!(recover_invariants(&bad).is_err());
    }

    proptest::proptest! {
        #[test]
        fn recover_round_trips_where_real(
            c in -2.0f64..2.0,
            r1 in 0.0f64..3.0,
            r2 in 0.0f64..3.0,
        ) {
            let inv = InvariantTriple { c, r1, r2 };
            let pot = potential_coeffs(&inv);
            if let Ok(got) = recover_invariants(&pot) {
                proptest::prop_assert!((got.c - c).abs() < 1e-9);
                proptest::prop_assert!((got.r1 - r1).abs() < 1e-9);
                proptest::prop_assert!((got.r2 - r2).abs() < 1e-9);
            }
        }
    }
}
