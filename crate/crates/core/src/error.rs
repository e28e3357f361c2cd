//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("degenerate spectrum: entries {i} and {j} are {gap:.3e} apart (tolerance {tol:.3e})")]
    DegenerateSpectrum { i: usize, j: usize, gap: f64, tol: f64 },

    #[error("spectra have different lengths: {x_len} vs {y_len}")]
    LengthMismatch { x_len: usize, y_len: usize },

    #[error("kernel matrix is singular (pivot {pivot} is exactly zero); det E = 0 is outside the supported domain")]
    SingularKernel { pivot: usize },

    #[error("hook-Schur variables are degenerate: entries {i} and {j} are {gap:.3e} apart")]
    DegenerateVariables { i: usize, j: usize, gap: f64 },

    #[error("invalid hook degree: r = {r} must be at least n = {n}")]
    InvalidDegree { r: usize, n: usize },

    #[error("generating series diverges: |x| = {x_abs:.6e} must exceed max |x_k| = {max_var:.6e}")]
    DivergentSeries { x_abs: f64, max_var: f64 },

    #[error("evaluation point within {dist:.3e} of a spectral pole (tolerance {tol:.3e})")]
    PoleProximity { dist: f64, tol: f64 },

    #[error("index ({i}, {j}) out of range for dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("correlator sum rule violated: {which} {index} sums to 1{delta:+.3e} (tolerance {tol:.1e}, condition estimate {cond:.3e})")]
    StochasticityViolation { which: &'static str, index: usize, delta: f64, tol: f64, cond: f64 },

    #[error("dimension {n} too large for the {oracle} oracle (limit {limit})")]
    DimensionTooLarge { n: usize, limit: usize, oracle: &'static str },

    #[error("Monte Carlo running variance became non-finite after {samples} samples")]
    VarianceOverflow { samples: usize },

    #[error("Monte Carlo weight mean {mean_abs:.3e} is within two standard errors ({std_error:.3e}) of zero")]
    DegenerateDenominator { mean_abs: f64, std_error: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}
