//! Pauli-string algebra and the noisy-agent success model for the Pauli task.
//!
//! [`algebra`] multiplies strings exactly by sitewise rules plus a phase
//! register kept as an exponent of `i`. [`chain`] models an agent that gets each
//! letter wrong with probability `p_sigma` and each phase update wrong with
//! probability `p_phi`, and gives both the closed-form and the simulated
//! sequence success rate.

pub mod algebra;
pub mod chain;

pub use algebra::{matrix_oracle, mul_single, mul_strings, DenseMatrix, Pauli, PauliString, Phase};
pub use chain::{
    pauli_agent_simulate, pauli_sar_theory, phase_chain_simulate, phase_chain_success, Mat4,
    PauliNoiseParams, PhaseChain,
};
