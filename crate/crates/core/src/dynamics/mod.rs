//! Schrödinger propagation of designed schedules.
//!
//! Two models are provided: the effective two-level Hamiltonian on the cat
//! subspace, and the full truncated Fock-space Hamiltonian driven by the
//! calibrated physical controls. Invariant diagnostics check that a schedule
//! really is a shortcut for the Lewis–Riesenfeld invariant it was built from.

mod effective;
mod full;
mod invariant;
mod trajectory;

pub use effective::{effective_hamiltonian, propagate_effective};
pub use full::{full_hamiltonian_at, propagate_full, propagate_full_with, FullModel};
pub(crate) use full::warn_if_outside_regime;
pub use invariant::{invariant_eigenstates, invariant_matrix, invariant_residual, invariant_residual_at};
pub use trajectory::{populations, Diagnostics, Populations, TimeGrid, Trajectory, TrajectoryStates, TRAJECTORY_HEADER};
pub(crate) use trajectory::density_populations;
pub use trajectory::{DEFAULT_OUTPUT_POINTS, DEFAULT_TOLERANCE};
