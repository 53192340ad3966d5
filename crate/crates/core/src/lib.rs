//! Two resonator modes coupled through a driven three-level artificial atom.
//!
//! The crate provides the full Lindblad model on a truncated Fock space, an
//! adiabatically eliminated moment model for the two fields, a two-mode
//! entanglement witness, Fokker–Planck phase-diffusion coefficients and
//! weak-probe transmission spectroscopy.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod correlation;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod output;
pub mod phase;
pub mod reduced;
pub mod spectroscopy;

pub use error::{Error, Result};
