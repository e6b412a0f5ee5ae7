//! Full two-atom blockade model and the block-reduction check.
//!
//! Two three-level atoms (`0`, `1`, laser-coupled `1 <-> r`) with an
//! interaction `B` on the doubly excited state. Basis ordering is fixed for
//! file I/O stability:
//!
//! ```text
//! 0: |00>  1: |01>  2: |10>  3: |11>  4: |0r>
//! 5: |r0>  6: |1r>  7: |r1>  8: |rr>
//! ```
//!
//! Each pulse step exponentiates the constant 9x9 Hamiltonian slice exactly
//! through a Hermitian eigendecomposition (cyclic Jacobi, written out here
//! to keep the crate dependency-free), so unitarity holds to rounding even
//! at `B` many orders of magnitude above the drive.

use num_complex::Complex64 as C64;

use crate::error::BlockadeError;
use crate::propagate::propagate_piecewise;
use crate::pulse::PhasePulse;
use crate::qm::{Ket2, TlsIndex};

pub const DIM: usize = 9;
pub const BASIS_LABELS: [&str; DIM] =
    ["00", "01", "10", "11", "0r", "r0", "1r", "r1", "rr"];

/// Amplitudes over the fixed nine-state basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockadeState9(pub [C64; DIM]);

impl BlockadeState9 {
    pub fn basis(index: usize) -> Self {
        let mut a = [C64::new(0.0, 0.0); DIM];
        a[index] = C64::new(1.0, 0.0);
        Self(a)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn dot(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Population of the doubly excited state `|rr>`.
    pub fn double_excitation(&self) -> f64 {
        self.0[8].norm_sqr()
    }
}

fn hamiltonian(phi: f64, b: f64) -> [[C64; DIM]; DIM] {
    let z = C64::new(0.0, 0.0);
    let mut h = [[z; DIM]; DIM];
    let g = C64::from_polar(0.5, phi);
    // laser couplings |1>_j <-> |r>_j, amplitude 1/2, phase e^{i phi} on
    // the lowering side |1><r|
    for &(one, ryd) in &[(1usize, 4usize), (2, 5), (3, 6), (3, 7), (7, 8), (6, 8)] {
        h[one][ryd] = g;
        h[ryd][one] = g.conj();
    }
    h[8][8] = C64::new(b, 0.0);
    h
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix: returns
/// eigenvalues and the unitary of column eigenvectors.
fn hermitian_eigen(mut a: [[C64; DIM]; DIM]) -> ([f64; DIM], [[C64; DIM]; DIM]) {
    let mut v = [[C64::new(0.0, 0.0); DIM]; DIM];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                off += a[p][q].norm_sqr();
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                let apq = a[p][q];
                let m = apq.norm();
                if m < 1e-300 {
                    continue;
                }
                let beta = apq.arg();
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * m);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // block of the complex rotation G with G^dag A G zeroing apq
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = C64::from_polar(s, -beta) * -1.0;
                let gqq = C64::from_polar(c, -beta);
                // A <- A G (columns), then A <- G^dag A (rows)
                for i in 0..DIM {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = aip * gpp + aiq * gqp;
                    a[i][q] = aip * gpq + aiq * gqq;
                }
                for j in 0..DIM {
                    let (apj, aqj) = (a[p][j], a[q][j]);
                    a[p][j] = gpp.conj() * apj + gqp.conj() * aqj;
                    a[q][j] = gpq.conj() * apj + gqq.conj() * aqj;
                }
                for i in 0..DIM {
                    let (vip, viq) = (v[i][p], v[i][q]);
                    v[i][p] = vip * gpp + viq * gqp;
                    v[i][q] = vip * gpq + viq * gqq;
                }
            }
        }
    }
    let mut evals = [0.0f64; DIM];
    for i in 0..DIM {
        evals[i] = a[i][i].re;
    }
    (evals, v)
}

/// Apply `exp(-i H dt)` for the constant slice at phase `phi`.
fn step(state: &mut BlockadeState9, phi: f64, b: f64, dt: f64) {
    let (evals, v) = hermitian_eigen(hamiltonian(phi, b));
    // y = V^dag psi, rotate phases, psi = V y
    let mut y = [C64::new(0.0, 0.0); DIM];
    for (i, yi) in y.iter_mut().enumerate() {
        for j in 0..DIM {
            *yi += v[j][i].conj() * state.0[j];
        }
        *yi *= C64::from_polar(1.0, -evals[i] * dt);
    }
    for (i, si) in state.0.iter_mut().enumerate() {
        *si = C64::new(0.0, 0.0);
        for (j, yj) in y.iter().enumerate() {
            *si += v[i][j] * *yj;
        }
    }
}

/// Evolve a nine-level state through the whole pulse.
pub fn propagate_full_blockade(
    pulse: &PhasePulse,
    b: f64,
    psi0: &BlockadeState9,
) -> Result<BlockadeState9, BlockadeError> {
    if b < 0.0 || !b.is_finite() {
        return Err(BlockadeError::NegativeInteraction(b));
    }
    let mut state = psi0.clone();
    // consecutive equal phases reuse the eigendecomposition
    let mut cached: Option<(f64, [f64; DIM], [[C64; DIM]; DIM])> = None;
    for &phi in &pulse.phi {
        let recompute = match &cached {
            Some((p, _, _)) => *p != phi,
            None => true,
        };
        if recompute {
            let (e, v) = hermitian_eigen(hamiltonian(phi, b));
            cached = Some((phi, e, v));
        }
        let (_, evals, v) = cached.as_ref().unwrap();
        let mut y = [C64::new(0.0, 0.0); DIM];
        for (i, yi) in y.iter_mut().enumerate() {
            for j in 0..DIM {
                *yi += v[j][i].conj() * state.0[j];
            }
            *yi *= C64::from_polar(1.0, -evals[i] * pulse.dt);
        }
        for (i, si) in state.0.iter_mut().enumerate() {
            *si = C64::new(0.0, 0.0);
            for (j, yj) in y.iter().enumerate() {
                *si += v[i][j] * *yj;
            }
        }
    }
    Ok(state)
}

/// Per-block comparison of the full model against the effective two-level
/// evolution.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub b: f64,
    /// `1 - |overlap|^2` for the singly occupied block started in `|01>`.
    pub infidelity_single: f64,
    /// Same for the doubly occupied block started in `|11>`.
    pub infidelity_double: f64,
    /// Worst `|rr>` population seen at the end of either run.
    pub double_excitation: f64,
}

impl ReductionReport {
    pub fn max_infidelity(&self) -> f64 {
        self.infidelity_single.max(self.infidelity_double)
    }
}

/// Quantifies how well the blockade keeps the dynamics inside the effective
/// blocks: evolves `|01>` and `|11>` under the full model and overlaps the
/// results with the embedded effective states.
pub fn blockade_reduction_error(
    pulse: &PhasePulse,
    b: f64,
) -> Result<ReductionReport, BlockadeError> {
    if b < 10.0 {
        return Err(BlockadeError::WeakBlockade(b));
    }
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;

    // block k = 1: |0>_1 = |01>, |1>_1 = |0r>
    let full1 = propagate_full_blockade(pulse, b, &BlockadeState9::basis(1))?;
    let eff1 = propagate_piecewise(pulse, TlsIndex(1), &Ket2::ground());
    let eff1 = eff1.final_state();
    let mut emb1 = BlockadeState9::basis(0);
    emb1.0[0] = C64::new(0.0, 0.0);
    emb1.0[1] = eff1.a0;
    emb1.0[4] = eff1.a1;
    let infidelity_single = 1.0 - emb1.dot(&full1).norm_sqr();

    // block k = 2: |0>_2 = |11>, |1>_2 = (|1r> + |r1>)/sqrt(2)
    let full2 = propagate_full_blockade(pulse, b, &BlockadeState9::basis(3))?;
    let eff2 = propagate_piecewise(pulse, TlsIndex(2), &Ket2::ground());
    let eff2 = eff2.final_state();
    let mut emb2 = BlockadeState9::basis(0);
    emb2.0[0] = C64::new(0.0, 0.0);
    emb2.0[3] = eff2.a0;
    emb2.0[6] = eff2.a1 * sqrt_half;
    emb2.0[7] = eff2.a1 * sqrt_half;
    let infidelity_double = 1.0 - emb2.dot(&full2).norm_sqr();

    Ok(ReductionReport {
        b,
        infidelity_single,
        infidelity_double,
        double_excitation: full1.double_excitation().max(full2.double_excitation()),
    })
}
