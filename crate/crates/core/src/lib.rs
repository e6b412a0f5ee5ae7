//! Time-optimal global laser pulses for ensembles of Rydberg-blockaded
//! two-level systems.
//!
//! The blockade reduces an N-atom drive to independent two-level blocks with
//! `sqrt(k)`-enhanced couplings. For two blocks, the time-optimal laser
//! detuning moves like a zero-energy classical particle in a quartic
//! potential; synthesizing a pulse then amounts to integrating that motion
//! and tuning a handful of potential parameters until the terminal states
//! hit the target manifold. This crate implements that reduction end to end:
//!
//! - closed-form block propagators and a full two-atom blockade model to
//!   validate the reduction ([`propagate`], [`blockade`]);
//! - the quartic potential, its conserved-quantity parametrization, and the
//!   shooting integration of the detuning ([`potential`], [`shooting`]);
//! - costate-vector reconstruction and invariant verification ([`pmp`]);
//! - target manifolds, fidelities, and the outer parameter search
//!   ([`target`], [`optimize`]);
//! - a piecewise-constant gradient-ascent baseline for cross-validation
//!   ([`grape`]);
//! - constant-detuning (abnormal) pulse analysis ([`abnormal`]);
//! - record/config plumbing for the `pmp-pulse` CLI ([`record`], [`config`]).

pub mod abnormal;
pub mod bfgs;
pub mod blockade;
pub mod config;
pub mod error;
pub mod grape;
pub mod optimize;
pub mod pmp;
pub mod potential;
pub mod propagate;
pub mod pulse;
pub mod qm;
pub mod record;
pub mod shooting;
pub mod target;

pub use error::*;
pub use potential::{InvariantTriple, QuarticPotential};
pub use pulse::PhasePulse;
pub use qm::{Ket2, TlsIndex};
