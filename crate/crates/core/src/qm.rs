//! Two-level state vectors, Pauli algebra, and the effective Hamiltonians of
//! the blockaded k-atom blocks.
//!
//! Everything is expressed in units of the peak Rabi frequency: the drive
//! amplitude is pinned at 1, times are measured in inverse Rabi frequencies
//! and detunings in Rabi frequencies.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Index of an effective two-level block; the laser coupling is enhanced by
/// a factor `sqrt(k)` on the k-th block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TlsIndex(pub u32);

impl TlsIndex {
    /// Coupling enhancement `sqrt(k)`.
    pub fn coupling(self) -> f64 {
        f64::from(self.0).sqrt()
    }
}

/// Pauli axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Normalized complex amplitude pair `(a0, a1)` over the block basis
/// `{|0>, |1>}` with `|0> = (1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ket2 {
    pub a0: C64,
    pub a1: C64,
}

impl Ket2 {
    pub const fn new(a0: C64, a1: C64) -> Self {
        Self { a0, a1 }
    }

    /// Basis state `|0>`.
    pub fn ground() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Basis state `|1>`.
    pub fn excited() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    /// Hermitian inner product `<self|other>`.
    pub fn dot(&self, other: &Ket2) -> C64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// Population of `|0>` and `|1>`.
    pub fn populations(&self) -> (f64, f64) {
        (self.a0.norm_sqr(), self.a1.norm_sqr())
    }

    /// Bloch coordinates `(x, y, z)` with `x = 2 Re(a0* a1)`,
    /// `y = 2 Im(a0* a1)`, `z = |a0|^2 - |a1|^2`.
    pub fn bloch(&self) -> (f64, f64, f64) {
        let c = self.a0.conj() * self.a1;
        (2.0 * c.re, 2.0 * c.im, self.a0.norm_sqr() - self.a1.norm_sqr())
    }

    /// Rescale to unit norm. Used by tests and diagnostics only; propagation
    /// never renormalizes, so unitarity violations stay observable.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self::new(self.a0 / n, self.a1 / n)
    }

    pub fn is_finite(&self) -> bool {
        self.a0.re.is_finite()
            && self.a0.im.is_finite()
            && self.a1.re.is_finite()
            && self.a1.im.is_finite()
    }
}

/// Dense complex 2x2 matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Self { m: [[m00, m01], [m10, m11]] }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn mul(&self, rhs: &Mat2) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        out
    }

    pub fn apply(&self, v: &Ket2) -> Ket2 {
        Ket2::new(
            self.m[0][0] * v.a0 + self.m[0][1] * v.a1,
            self.m[1][0] * v.a0 + self.m[1][1] * v.a1,
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat2) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }

    /// Max entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - adj.m[i][j]).norm());
            }
        }
        d
    }

    pub fn max_abs_diff(&self, rhs: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - rhs.m[i][j]).norm());
            }
        }
        d
    }
}

pub fn pauli(axis: Axis) -> Mat2 {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => Mat2::new(o, one, one, o),
        Axis::Y => Mat2::new(o, -i, i, o),
        Axis::Z => Mat2::new(one, o, o, -one),
    }
}

/// Drive Hamiltonian of block `k` at laser phase `phi`:
/// `(sqrt(k)/2) (cos(phi) sx - sin(phi) sy)`, i.e. off-diagonal entries
/// `(sqrt(k)/2) e^{+/- i phi}` and zero diagonal.
pub fn hamiltonian_phase(k: TlsIndex, phi: f64) -> Mat2 {
    let g = 0.5 * k.coupling();
    let e = C64::from_polar(g, phi);
    Mat2::new(C64::new(0.0, 0.0), e, e.conj(), C64::new(0.0, 0.0))
}

/// Rotating-frame Hamiltonian of block `k` at constant detuning `delta`:
/// diagonal `(0, delta)`, off-diagonal `sqrt(k)/2`.
pub fn hamiltonian_detuned(k: TlsIndex, delta: f64) -> Mat2 {
    let g = C64::new(0.5 * k.coupling(), 0.0);
    Mat2::new(C64::new(0.0, 0.0), g, g, C64::new(delta, 0.0))
}

/// `Im <chi| sigma_mu |psi>`. Inputs need not be normalized; the same form is
/// used for costates.
pub fn imag_sandwich(chi: &Ket2, mu: Axis, psi: &Ket2) -> f64 {
    let sp = pauli(mu).apply(psi);
    chi.dot(&sp).im
}

/// All three components `(Im <chi|sx|psi>, Im <chi|sy|psi>, Im <chi|sz|psi>)`.
pub fn imag_sandwich_vec(chi: &Ket2, psi: &Ket2) -> [f64; 3] {
    [
        imag_sandwich(chi, Axis::X, psi),
        imag_sandwich(chi, Axis::Y, psi),
        imag_sandwich(chi, Axis::Z, psi),
    ]
}
