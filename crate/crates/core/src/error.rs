//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PulseError {
    #[error("pulse step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("pulse must contain at least one step")]
    Empty,
    #[error("pulse contains a non-finite phase sample: {0}")]
    NonFinite(f64),
}

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("potential parameters out of range: {0}")]
    InvalidParameters(String),
    #[error("no branch with nonnegative squared radii exists for these coefficients")]
    NoRealSolution,
}

#[derive(Debug, Error)]
pub enum ShootingError {
    #[error("no zero crossing {wanted} found before t = {cap}")]
    NoCrossing { wanted: u32, cap: f64 },
    #[error("energy residual {residual:.3e} exceeds {tol:.1e}; the step is too large")]
    EnergyDrift { residual: f64, tol: f64 },
    #[error("classically forbidden start: V(0) = {0} must be negative")]
    ForbiddenStart(f64),
}

#[derive(Debug, Error)]
pub enum PmpError {
    #[error("invariants inconsistent with the curve: {0}")]
    InconsistentInvariants(String),
    #[error("initial costate vectors inconsistent with the control: {0}")]
    InconsistentInitialData(String),
    #[error("record lacks a field required for verification: {0}")]
    MissingData(&'static str),
}

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("best fidelity {best:.6} stayed below 0.99 after {starts} starts")]
    OptimizationFailed { best: f64, starts: usize },
    #[error(transparent)]
    Shooting(#[from] ShootingError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Error)]
pub enum GrapeError {
    #[error("fidelity stalled at {fidelity:.9} after {iters} iterations without reaching 0.999")]
    Stalled { fidelity: f64, iters: usize },
    #[error("pulse durations differ: {a} vs {b}")]
    DurationMismatch { a: f64, b: f64 },
}

#[derive(Debug, Error)]
pub enum BlockadeError {
    #[error("blockade strength must be nonnegative, got {0}")]
    NegativeInteraction(f64),
    #[error("reduction check requires B >= 10, got {0}")]
    WeakBlockade(f64),
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("record schema error: {0}")]
    Schema(String),
    #[error("unsupported record schema version {0}")]
    Version(u32),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("unsupported config schema version {0}")]
    Version(u32),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}
