//! Truncated Fock-space states and channels for a few modes tensored with qubits.

mod joint;
mod ops;
mod space;

pub use joint::{JointState, Subsystem, SubsystemKind};
pub(crate) use joint::Branch;
pub use ops::{beam_splitter, conditional_phase, loss_channel, moments, partial_trace};
pub use space::{
    coherent_state, factorial_moment_tail, fock_state, parity_probabilities, poisson_tail, thermal_state, FockSpace,
    ModeState,
};
