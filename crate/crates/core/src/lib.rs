//! Shortcut-to-adiabaticity pulse design and simulation for Kerr-cat qubits.
//!
//! The crate is organised bottom-up:
//!
//! * [`fockspace`]: truncated Fock-space operators, cat basis, Kerr spectrum.
//! * [`pulsecraft`]: invariant-based control schedules and their calibration.
//! * [`dynamics`]: two-level and full Fock-space Schrödinger propagation.
//! * [`robustness`]: systematic-error sensitivity and error-rate sweeps.
//! * [`openquantum`]: Lindblad dynamics with photon loss and dephasing.
//! * [`cli`]: configuration, figure presets and CSV output for the binary.
//!
//! All energies are in units of the Kerr strength K and times in units of 1/K.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod cli;
pub mod dynamics;
mod error;
pub mod fockspace;
pub mod integrate;
pub mod interp;
pub mod openquantum;
pub mod output;
pub mod pulsecraft;
mod quad;
pub mod robustness;
pub mod sweep;

pub use error::{Error, Result};
pub use fockspace::C64;
