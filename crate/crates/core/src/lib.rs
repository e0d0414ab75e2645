//! Simulation of fluxonium-transmon-fluxonium circuits.
//!
//! The crate covers single-mode quantization ([`qubit`]), the coupled three-mode
//! spectrum ([`composite`]), static ZZ analysis ([`zz`]), capacitance-network coupling
//! design ([`capnet`]), microwave-activated CZ dynamics and calibration ([`pulse`]),
//! analytic error budgets ([`budget`]) and simulated randomized benchmarking ([`rb`]).
//! Energies and frequencies are in GHz, times in ns, capacitances in fF and fluxes in
//! units of the flux quantum unless a name says otherwise.

pub mod budget;
pub mod capnet;
pub mod cli;
pub mod composite;
pub mod config;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod output;
pub mod pulse;
pub mod qubit;
pub mod rb;
pub mod zz;

pub use composite::{DeviceSpec, Label, LabeledSpectrum};
pub use error::{Error, Result};
