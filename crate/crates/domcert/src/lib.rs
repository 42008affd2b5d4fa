//! Path-complete p-dominance certificates for constrained switching linear
//! systems.
//!
//! A switching system is a finite family of mode matrices together with a
//! constraint automaton restricting the admissible mode sequences. The crate
//! decides p-dominance of such systems by assembling the transition-indexed
//! Stein-type matrix inequalities, selecting admissible dominance rates from
//! automaton-cycle spectra, solving the resulting feasibility problem with an
//! ellipsoid method, and validating the resulting cone certificates. A
//! simulation module verifies the low-dimensional dominated-splitting
//! behavior empirically.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `domcert` binary for the command-line front end.

pub mod automata;
pub mod certificate;
pub mod cli;
pub mod cones;
pub mod error;
pub mod feasibility;
pub mod linalg;
pub mod rates;
pub mod simulate;
pub mod system;

pub use error::{Error, Result};
