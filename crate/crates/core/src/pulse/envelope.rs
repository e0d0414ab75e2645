use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of control points of the interpolated-IQ envelope.
pub const IQ_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    /// `(1 - cos(2 pi t / T)) / 2`
    Cosine,
    /// Cosine in-phase part with quadrature `beta * (T / pi) dI/dt`.
    Drag { beta: f64 },
    /// Natural cubic splines through evenly spaced (I, Q) points, first at t = 0 and last at t = T.
    InterpolatedIq { i: [f64; IQ_POINTS], q: [f64; IQ_POINTS] },
    /// Constant in-phase drive over the whole width.
    Square,
}

/// Pulse shape with its peak drive strength (GHz, coefficient of the charge operator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    pub kind: EnvelopeKind,
    pub width: f64,
    pub amplitude: f64,
}

impl PulseEnvelope {
    pub fn cosine(width: f64, amplitude: f64) -> Self {
        PulseEnvelope { kind: EnvelopeKind::Cosine, width, amplitude }
    }

    pub fn drag(width: f64, amplitude: f64, beta: f64) -> Self {
        PulseEnvelope { kind: EnvelopeKind::Drag { beta }, width, amplitude }
    }

    pub fn square(width: f64, amplitude: f64) -> Self {
        PulseEnvelope { kind: EnvelopeKind::Square, width, amplitude }
    }

    pub fn interpolated(width: f64, amplitude: f64, i: [f64; IQ_POINTS], q: [f64; IQ_POINTS]) -> Self {
        PulseEnvelope { kind: EnvelopeKind::InterpolatedIq { i, q }, width, amplitude }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        PulseEnvelope { amplitude, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid("envelope.width", "must be > 0"));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("envelope.amplitude", "must be finite"));
        }
        Ok(())
    }

    /// Dimensionless (I, Q) at time `t` (ns); zero outside `[0, width]`.
    pub fn iq(&self, t: f64) -> (f64, f64) {
        let w = self.width;
        if !(0.0..=w).contains(&t) {
            return (0.0, 0.0);
        }
        match &self.kind {
            EnvelopeKind::Cosine => (0.5 * (1.0 - (TAU * t / w).cos()), 0.0),
            EnvelopeKind::Drag { beta } => (0.5 * (1.0 - (TAU * t / w).cos()), beta * (TAU * t / w).sin()),
            EnvelopeKind::Square => (1.0, 0.0),
            EnvelopeKind::InterpolatedIq { i, q } => (spline(i, t / w), spline(q, t / w)),
        }
    }

    /// Time integral of the in-phase part divided by the width.
    pub fn mean_in_phase(&self) -> f64 {
        match &self.kind {
            EnvelopeKind::Cosine | EnvelopeKind::Drag { .. } => 0.5,
            EnvelopeKind::Square => 1.0,
            EnvelopeKind::InterpolatedIq { .. } => {
                let n = 2000;
                (0..n).map(|k| self.iq((k as f64 + 0.5) * self.width / n as f64).0).sum::<f64>() / n as f64
            }
        }
    }
}

/// Natural cubic spline through `y` at `x = k / (n - 1)`, evaluated at `s` in [0, 1].
fn spline(y: &[f64; IQ_POINTS], s: f64) -> f64 {
    let n = IQ_POINTS;
    let h = 1.0 / (n - 1) as f64;
    // second derivatives, zero at both ends; Thomas algorithm on the interior
    let mut m = [0.0; IQ_POINTS];
    let mut c = [0.0; IQ_POINTS];
    let mut d = [0.0; IQ_POINTS];
    for k in 1..n - 1 {
        let rhs = 6.0 * (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h);
        let denom = 4.0 - if k > 1 { c[k - 1] } else { 0.0 };
        c[k] = 1.0 / denom;
        d[k] = (rhs - if k > 1 { d[k - 1] } else { 0.0 }) / denom;
    }
    for k in (1..n - 1).rev() {
        m[k] = d[k] - c[k] * m[k + 1];
    }
    let k = ((s / h).floor() as usize).min(n - 2);
    let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
    let (u, v) = (b - s, s - a);
    m[k] * u.powi(3) / (6.0 * h)
        + m[k + 1] * v.powi(3) / (6.0 * h)
        + (y[k] / h - m[k] * h / 6.0) * u
        + (y[k + 1] / h - m[k + 1] * h / 6.0) * v
}

/// Two phase-locked charge-line drives sharing one carrier.
///
/// Line `i` carries `w_i f(t) cos(2 pi f t + phi_i)`, where `f(t)` is the envelope.
/// The path-length phase of line 2 relative to line 1 is `dispersion_slope * frequency`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveLinePair {
    /// Relative line amplitudes (the envelope sets the absolute scale).
    pub weights: [f64; 2],
    pub phases: [f64; 2],
    /// Carrier frequency (GHz).
    pub frequency: f64,
    /// rad / GHz
    pub dispersion_slope: f64,
}

impl DriveLinePair {
    pub fn equal(frequency: f64) -> Self {
        DriveLinePair { weights: [1.0, 1.0], phases: [0.0, 0.0], frequency, dispersion_slope: 0.0 }
    }

    pub fn single(line: usize, frequency: f64) -> Self {
        let mut w = [0.0, 0.0];
        w[line] = 1.0;
        DriveLinePair { weights: w, phases: [0.0, 0.0], frequency, dispersion_slope: 0.0 }
    }

    pub fn with_frequency(&self, frequency: f64) -> Self {
        DriveLinePair { frequency, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("drives.weights", "line amplitudes must be >= 0"));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid("drives.frequency", "must be > 0"));
        }
        Ok(())
    }

    /// Carrier phases at the device, path-length phase included.
    pub fn effective_phases(&self) -> [f64; 2] {
        [self.phases[0], self.phases[1] + self.dispersion_slope * self.frequency]
    }

    pub fn relative_phase(&self) -> f64 {
        let p = self.effective_phases();
        p[1] - p[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_vanishes_at_edges() {
        let e = PulseEnvelope::drag(85.0, 0.1, 0.3);
        for t in [0.0, 85.0] {
            let (i, q) = e.iq(t);
            assert!(i.abs() < 1e-15 && q.abs() < 1e-12);
        }
        assert!((e.iq(42.5).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spline_hits_control_points() {
        let i = [0.0, 0.3, 0.9, 1.0, 0.4, 0.0];
        let q = [0.0, -0.2, 0.1, 0.2, -0.1, 0.0];
        let e = PulseEnvelope::interpolated(50.0, 1.0, i, q);
        for k in 0..IQ_POINTS {
            let (a, b) = e.iq(50.0 * k as f64 / 5.0);
            assert!((a - i[k]).abs() < 1e-12 && (b - q[k]).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn spline_reproduces_linear() {
        let y = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        for s in [0.05, 0.33, 0.71, 0.99] {
            assert!((spline(&y, s) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_weight_rejected() {
        let mut d = DriveLinePair::equal(4.5);
        d.weights[1] = -0.1;
        assert!(d.validate().is_err());
    }
}
