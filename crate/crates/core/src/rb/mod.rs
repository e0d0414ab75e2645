//! Clifford synthesis and simulated randomized benchmarking.

pub mod clifford;
pub mod fit;
pub mod sim;

pub use clifford::{build_clifford_group, clifford1, clifford2, CliffordClass, DecompositionSummary, Gate, Op};
pub use fit::{clifford_fidelity, fit_rb, gate_fidelity, interleaved_fidelity, ExpFit, Weights};
pub use sim::{cz_leakage_irb_spec, simulate_irb, simulate_rb, Channel, GateNoise, InterleavedGate, IrbResult, RbResult, RbSpec};
