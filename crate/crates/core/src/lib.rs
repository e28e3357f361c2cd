//! Exact correlation functions of unitary matrices under the Itzykson-Zuber
//! weight `e^{tr(X U† Y U)}`.
//!
//! The library evaluates, for two diagonal complex matrices `X` and `Y`:
//!
//! * the Harish-Chandra-Itzykson-Zuber integral `I(X,Y) = det E / (Δ(X)Δ(Y))`
//!   with `E_ij = e^{x_i y_j}` ([`hciz`]),
//! * the two-point resolvent correlator
//!   `W(x,y) = ⟨tr((x−X)⁻¹ U (y−Y)⁻¹ U†)⟩` as a single determinant
//!   ([`resolvent`]),
//! * every entry `⟨|U_ij|²⟩` extracted from `W` by double residues
//!   ([`correlators`]),
//!
//! and cross-checks them against independent brute-force and Monte Carlo
//! oracles ([`oracles`], [`verify`]).
//!
//! Everything is complex-valued; real spectra are the special case with zero
//! imaginary parts. Determinant-grade arithmetic runs in double-double
//! precision where conditioning demands it ([`clinalg::dd`]).

pub mod clinalg;
pub mod correlators;
pub mod error;
pub mod exec;
pub mod hciz;
pub mod oracles;
pub mod resolvent;
pub mod schur;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use spectra::{ProblemPair, Spectrum};
