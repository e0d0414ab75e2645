//! Microwave-activated CZ dynamics: envelopes, phase-locked dual drives, lab-frame
//! propagation in the dressed basis, chevrons and the calibration loop.

pub mod calibrate;
pub mod envelope;
pub mod system;

pub use calibrate::{
    calibrate_cz, chevron_scan, interference_setting, nearest_unwanted, phase_setting, CZCalibration, CalibrationOptions,
    CalibrationRound, Chevron, InterferenceSetting, PhaseMode, Preparation,
};
pub use envelope::{DriveLinePair, EnvelopeKind, PulseEnvelope, IQ_POINTS};
pub use system::{
    conditional_phase, leakage, return_deficit, Columns, DrivenSystem, EvolveOptions, Propagator,
    DEFAULT_SAMPLES_PER_PERIOD, STEP_TOLERANCE,
};
