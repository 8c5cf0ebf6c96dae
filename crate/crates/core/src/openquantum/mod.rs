//! Open-system propagation under photon loss and dephasing.
//!
//! The full model integrates the master equation on the truncated Fock space
//! with the same banded Hamiltonian used for closed runs. The effective model
//! uses the loss and dephasing channels projected onto the cat qubit, which is
//! cheap enough for dense sweeps but hides leakage out of the subspace.

mod decoherence;
mod density;
mod lindblad;

pub use decoherence::decoherence_sweep;

pub use density::{DensityMatrix, NoiseParams};
pub use lindblad::{
    effective_jump_operators, effective_lindblad_propagate, lindblad_propagate, lindblad_propagate_with, renormalized_populations, ChannelMode,
    LindbladOptions,
};
