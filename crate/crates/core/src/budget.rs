//! Closed-form gate-error estimates and the Kraus average-fidelity they derive from.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Gate width used for the frequency-tolerance figures when none is given (ns).
pub const DEFAULT_TOLERANCE_GATE_NS: f64 = 50.0;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Average state fidelity of a channel against an ideal unitary on the subspace
/// selected by `projector`: `[Tr sum M^dag M + sum |Tr M|^2] / (n (n + 1))` with
/// `M_k = P U0^dag G_k P` and `n = Tr P`.
pub fn kraus_average_fidelity(kraus: &[CMat], ideal: &CMat, projector: &CMat) -> Result<f64> {
    let d = ideal.nrows();
    let mut completeness = CMat::zeros(d, d);
    for g in kraus {
        completeness += g.adjoint() * g;
    }
    let defect = (completeness - CMat::identity(d, d)).norm();
    if defect > 1e-10 {
        return Err(Error::NotTracePreserving(defect));
    }
    let n = projector.trace().re;
    let (mut a, mut b) = (0.0, 0.0);
    for g in kraus {
        let m = projector * ideal.adjoint() * g * projector;
        a += (m.adjoint() * &m).trace().re;
        b += m.trace().norm_sqr();
    }
    Ok((a + b) / (n * (n + 1.0)))
}

pub fn projector(dim: usize, kept: &[usize]) -> CMat {
    let mut p = CMat::zeros(dim, dim);
    for &k in kept {
        p[(k, k)] = c(1.0);
    }
    p
}

/// Relaxation between |11> and a non-computational state |alpha> at equal rates,
/// on the basis (00, 01, 10, 11, alpha). `x = t_g / T1_alpha`.
pub fn leakage_kraus(x: f64) -> [CMat; 4] {
    let h = 0.5f64.sqrt();
    let e = (-x / 2.0).exp();
    let s = (1.0 - (-x).exp()).sqrt();
    let diag = |v: [f64; 5]| CMat::from_diagonal(&nalgebra::DVector::from_iterator(5, v.iter().map(|x| c(x * h))));
    let mut g1 = CMat::zeros(5, 5);
    g1[(3, 4)] = c(s * h);
    let mut g3 = CMat::zeros(5, 5);
    g3[(4, 3)] = c(s * h);
    [diag([1.0, 1.0, 1.0, 1.0, e]), g1, diag([1.0, 1.0, 1.0, e, 1.0]), g3]
}

/// Single-qubit depolarizing channel `rho -> p rho + (1 - p) I / 2` as Kraus operators.
pub fn depolarizing_kraus(p: f64) -> [CMat; 4] {
    let q = (1.0 - p) / 4.0;
    let i = Complex64::i();
    let k0 = CMat::identity(2, 2) * c((1.0 - 3.0 * q).sqrt());
    let sq = c(q.sqrt());
    let x = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]) * sq;
    let y = CMat::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]) * sq;
    let z = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]) * sq;
    [k0, x, y, z]
}

/// Kraus evaluation of the leakage-relaxation model (identity as the ideal gate).
pub fn leakage_fidelity_kraus(x: f64) -> f64 {
    let p = projector(5, &[0, 1, 2, 3]);
    kraus_average_fidelity(&leakage_kraus(x), &CMat::identity(5, 5), &p).expect("leakage kraus set is complete")
}

/// Unitary CZ with its |11> phase off by `dphi`.
pub fn phase_error_fidelity_kraus(dphi: f64) -> f64 {
    let cz = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(1.0), c(1.0), c(-1.0)]));
    let mut u = cz.clone();
    u[(3, 3)] *= Complex64::from_polar(1.0, dphi);
    kraus_average_fidelity(&[u], &cz, &CMat::identity(4, 4)).expect("unitary is complete")
}

/// |11> <-> |alpha> rotation by `2 pi + dtheta` against the ideal CZ (+) 1.
pub fn amplitude_error_fidelity_kraus(dtheta: f64) -> f64 {
    let th = 2.0 * PI + dtheta;
    let mut u = CMat::identity(5, 5);
    u[(3, 3)] = c((th / 2.0).cos());
    u[(4, 4)] = c((th / 2.0).cos());
    u[(3, 4)] = Complex64::new(0.0, -(th / 2.0).sin());
    u[(4, 3)] = Complex64::new(0.0, -(th / 2.0).sin());
    let mut ideal = CMat::identity(5, 5);
    ideal[(3, 3)] = c(-1.0);
    kraus_average_fidelity(&[u], &ideal, &projector(5, &[0, 1, 2, 3])).expect("unitary is complete")
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fidelity {
    pub fidelity: f64,
    /// Set when the small-parameter assumption behind the closed form is violated.
    pub regime_warning: bool,
}

/// `1 - t_g / (8 T1_alpha)`.
pub fn leakage_relaxation_fidelity(t_g_ns: f64, t1_alpha_us: f64) -> Fidelity {
    let x = t_g_ns / (t1_alpha_us * 1e3);
    Fidelity { fidelity: (1.0 - x / 8.0).clamp(0.0, 1.0), regime_warning: x > 0.1 }
}

/// `(7 + 3 cos dphi) / 10`.
pub fn phase_error_fidelity(dphi: f64) -> f64 {
    (7.0 + 3.0 * dphi.cos()) / 10.0
}

pub fn phase_error_fidelity_small(dphi: f64) -> f64 {
    1.0 - 0.15 * dphi * dphi
}

/// Largest phase error (rad) compatible with fidelity `f`.
pub fn phase_tolerance(f: f64) -> f64 {
    ((10.0 * f - 7.0) / 3.0).clamp(-1.0, 1.0).acos()
}

/// Detuning tolerance (MHz) for fidelity `f` at gate width `t_g_ns`, from `dphi = pi delta t_g`.
pub fn frequency_tolerance(f: f64, t_g_ns: f64) -> f64 {
    phase_tolerance(f) / (PI * t_g_ns) * 1e3
}

/// `(6 - 3 c + c^2) / 10` with `c = cos((2 pi + dtheta) / 2)`.
pub fn amplitude_error_fidelity(dtheta: f64) -> f64 {
    let cc = (PI + dtheta / 2.0).cos();
    (6.0 - 3.0 * cc + cc * cc) / 10.0
}

pub fn amplitude_error_fidelity_small(dtheta: f64) -> f64 {
    1.0 - dtheta * dtheta / 16.0
}

/// Largest rotation-angle error (rad) compatible with fidelity `f`.
pub fn amplitude_tolerance(f: f64) -> f64 {
    // c^2 - 3c + 6 - 10 f = 0, root near c = -1
    let disc = (40.0 * f - 15.0).max(0.0);
    let cc = ((3.0 - disc.sqrt()) / 2.0).clamp(-1.0, 1.0);
    2.0 * (-cc).acos()
}

/// Drive-voltage tolerance for a pulse whose full 2 pi rotation takes `full_scale` volts.
pub fn voltage_tolerance(f: f64, full_scale: f64) -> f64 {
    amplitude_tolerance(f) / (2.0 * PI) * full_scale
}

/// Markovian coherence limit for one or two qubits.
pub fn coherence_limit(t_g_ns: f64, t1_us: f64, t_phi_us: f64, n_qubits: u32) -> Result<f64> {
    let rate = 1.0 / (t1_us * 1e3) + 1.0 / (t_phi_us * 1e3);
    let pref = match n_qubits {
        1 => 1.0 / 3.0,
        2 => 4.0 / 5.0,
        _ => return Err(Error::invalid("n_qubits", "must be 1 or 2")),
    };
    Ok((1.0 - pref * t_g_ns * rate).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBudgetInput {
    pub t_g_ns: f64,
    pub t1_alpha_us: f64,
    pub t1_us: f64,
    pub t_phi_us: f64,
    pub dphi: f64,
    pub dtheta: f64,
    pub n: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBudget {
    pub leakage_relaxation: f64,
    pub phase: f64,
    pub amplitude: f64,
    pub coherence: f64,
    /// Sum of the individual infidelities.
    pub total_error: f64,
    pub regime_warning: bool,
}

pub fn error_budget(input: &ErrorBudgetInput) -> Result<ErrorBudget> {
    for (k, v) in [
        ("t_g_ns", input.t_g_ns),
        ("t1_alpha_us", input.t1_alpha_us),
        ("t1_us", input.t1_us),
        ("t_phi_us", input.t_phi_us),
    ] {
        if !(v > 0.0) {
            return Err(Error::invalid(k, "must be > 0"));
        }
    }
    let n_qubits = match input.n {
        2 => 1,
        4 => 2,
        _ => return Err(Error::invalid("n", "subspace dimension must be 2 or 4")),
    };
    let leak = leakage_relaxation_fidelity(input.t_g_ns, input.t1_alpha_us);
    let phase = phase_error_fidelity(input.dphi);
    let amp = amplitude_error_fidelity(input.dtheta);
    let coh = coherence_limit(input.t_g_ns, input.t1_us, input.t_phi_us, n_qubits)?;
    Ok(ErrorBudget {
        leakage_relaxation: leak.fidelity,
        phase,
        amplitude: amp,
        coherence: coh,
        total_error: (1.0 - leak.fidelity) + (1.0 - phase) + (1.0 - amp) + (1.0 - coh),
        regime_warning: leak.regime_warning,
    })
}
