use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::envelope::{DriveLinePair, PulseEnvelope};
use super::system::{
    conditional_phase, full_cycle_amplitude, leakage, return_deficit, step_count, Columns, DrivenSystem, EvolveOptions,
    DEFAULT_SAMPLES_PER_PERIOD,
};
use crate::budget::{kraus_average_fidelity, projector};
use crate::composite::{Label, COMPUTATIONAL};
use crate::error::{Error, Result};
use crate::linalg::{wrap_angle, CMat};
use crate::optim::{brent_min, regula_falsi};

/// Smallest allowed gap between the gate transition and any other driven transition (GHz).
pub const MIN_TRANSITION_GAP: f64 = 0.010;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseMode {
    /// Equal line amplitudes, zero carrier phases.
    Equal,
    /// Line phases chosen so both drive terms add on the gate transition.
    Constructive,
}

#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    pub width: f64,
    pub alternations: usize,
    /// Half width of the frequency window around the static resonance (GHz).
    pub frequency_window: f64,
    pub samples_per_period: f64,
    pub phase_mode: PhaseMode,
    pub coarse_points: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            width: 85.0,
            alternations: 3,
            frequency_window: 0.030,
            samples_per_period: DEFAULT_SAMPLES_PER_PERIOD,
            phase_mode: PhaseMode::Equal,
            coarse_points: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationRound {
    pub amplitude: f64,
    pub frequency: f64,
    pub return_deficit: f64,
    pub conditional_phase: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CZCalibration {
    pub from: Label,
    pub to: Label,
    pub width: f64,
    /// Static transition frequency (GHz).
    pub bare_frequency: f64,
    pub frequency: f64,
    /// Peak envelope drive strength (GHz).
    pub amplitude: f64,
    pub relative_phase: f64,
    /// Frame corrections for fluxonium 1 and fluxonium 2 (rad).
    pub virtual_z: [f64; 2],
    /// Mean population leaving the computational block.
    pub leakage: f64,
    pub return_deficit: f64,
    /// Mean population found in each non-computational tracked state.
    pub leakage_by_state: Vec<(Label, f64)>,
    pub conditional_phase: f64,
    pub conditional_phase_error: f64,
    /// Average gate fidelity of the frame-corrected propagator against CZ.
    pub coherent_fidelity: f64,
    /// Populations returned by two consecutive pulses, in (00, 10, 01, 11) order.
    pub cz_squared_populations: [f64; 4],
    pub cz_squared_phase: f64,
    pub unitarity_defect: f64,
    pub step_change: f64,
    pub steps: usize,
    /// Propagations of the computational block spent in the search.
    pub evaluations: usize,
    pub rounds: Vec<CalibrationRound>,
}

/// Nearest other transition out of the computational states with a non-negligible
/// drive element, as (gap to the target in GHz, from, to).
pub fn nearest_unwanted(sys: &DrivenSystem, drives: &DriveLinePair, from: Label, to: Label) -> Result<(f64, Label, Label)> {
    let (i, f) = (sys.index(from)?, sys.index(to)?);
    let f0 = sys.energies[f] - sys.energies[i];
    let target = sys.drive_element(drives, f, i).norm();
    let mut best = (f64::INFINITY, from, to);
    for s in sys.computational()? {
        for t in 0..sys.dim() {
            if (s, t) == (i, f) || sys.energies[t] <= sys.energies[s] {
                continue;
            }
            if sys.drive_element(drives, t, s).norm() < 1e-3 * target {
                continue;
            }
            let gap = (sys.energies[t] - sys.energies[s] - f0).abs();
            if gap < best.0 {
                best = (gap, sys.state_labels[s], sys.state_labels[t]);
            }
        }
    }
    Ok(best)
}

/// Drive phases for `mode` on the transition `i -> f`.
pub fn phase_setting(sys: &DrivenSystem, mode: PhaseMode, frequency: f64, i: usize, f: usize) -> DriveLinePair {
    let mut d = DriveLinePair::equal(frequency);
    if mode == PhaseMode::Constructive {
        let (m1, m2) = (sys.charge_element(0, f, i), sys.charge_element(1, f, i));
        d.phases[1] = m2.arg() - m1.arg();
    }
    d
}

struct Evaluator<'a> {
    sys: &'a DrivenSystem,
    drives: DriveLinePair,
    envelope: PulseEnvelope,
    opts: EvolveOptions,
    comp: [usize; 4],
    calls: AtomicUsize,
}

impl Evaluator<'_> {
    fn block(&self, amplitude: f64, frequency: f64) -> Result<CMat> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let p = self.sys.evolve(&self.drives.with_frequency(frequency), &self.envelope.with_amplitude(amplitude), &self.opts)?;
        p.block(&self.comp, &self.comp)
    }
}

/// Alternating amplitude / frequency calibration of a full-cycle CZ on `from -> to`.
pub fn calibrate_cz(sys: &DrivenSystem, from: Label, to: Label, opts: &CalibrationOptions) -> Result<CZCalibration> {
    let (i, f) = (sys.index(from)?, sys.index(to)?);
    if opts.coarse_points < 3 {
        return Err(Error::invalid("coarse_points", "need at least 3"));
    }
    if opts.alternations == 0 {
        return Err(Error::invalid("alternations", "need at least 1"));
    }
    if !COMPUTATIONAL.contains(&from) {
        return Err(Error::invalid("transition", format!("{from} is not a computational state")));
    }
    let f0 = sys.energies[f] - sys.energies[i];
    if f0 <= 0.0 {
        return Err(Error::invalid("transition", format!("{from} -> {to} is not an upward transition")));
    }
    let drives = phase_setting(sys, opts.phase_mode, f0, i, f);
    let (gap, a, b) = nearest_unwanted(sys, &drives, from, to)?;
    if gap < MIN_TRANSITION_GAP {
        return Err(Error::invalid(
            "transition",
            format!("{from} -> {to} lies {:.1} MHz from {a} -> {b}", gap * 1e3),
        ));
    }
    let m = sys.drive_element(&drives, f, i).norm();
    let envelope = PulseEnvelope::cosine(opts.width, 0.0);
    let a_est = full_cycle_amplitude(opts.width, envelope.mean_in_phase(), m);
    let ev = Evaluator {
        sys,
        drives: drives.clone(),
        envelope,
        opts: EvolveOptions { samples_per_period: opts.samples_per_period, check_step: false, columns: Columns::Computational },
        comp: sys.computational()?,
        calls: AtomicUsize::new(0),
    };

    let mut amp = a_est;
    let mut freq = f0;
    let mut rounds = Vec::new();
    for round in 0..opts.alternations {
        amp = tune_amplitude(&ev, amp, freq, round, opts.coarse_points)?;
        freq = tune_frequency(&ev, amp, freq, f0, opts.frequency_window, round)?;
        let u = ev.block(amp, freq)?;
        rounds.push(CalibrationRound {
            amplitude: amp,
            frequency: freq,
            return_deficit: return_deficit(&u),
            conditional_phase: conditional_phase(&u)?,
        });
    }
    let mut cal = finish(sys, &drives.with_frequency(freq), amp, from, to, f0, opts, rounds)?;
    cal.evaluations = ev.calls.load(Ordering::Relaxed);
    Ok(cal)
}

fn tune_amplitude(ev: &Evaluator, start: f64, freq: f64, round: usize, coarse: usize) -> Result<f64> {
    let objective = |a: f64| ev.block(a, freq).map(|u| return_deficit(&u));
    let (lo, hi) = if round == 0 {
        let grid: Vec<f64> = (0..coarse).map(|k| start * (0.5 + k as f64 / (coarse - 1) as f64)).collect();
        let vals = grid.par_iter().map(|&a| objective(a)).collect::<Result<Vec<f64>>>()?;
        let k = (0..coarse).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        (grid[k.saturating_sub(1)], grid[(k + 1).min(coarse - 1)])
    } else {
        (start * 0.98, start * 1.02)
    };
    let (a, _) = brent_min(objective, lo, hi, 1e-4, 100)?;
    Ok(a)
}

/// Frequency where the conditional phase crosses pi, nearest to `start`.
fn tune_frequency(ev: &Evaluator, amp: f64, start: f64, f0: f64, window: f64, round: usize) -> Result<f64> {
    let mut seen = (f64::INFINITY, f64::NEG_INFINITY);
    let phase = |f: f64| -> Result<f64> { conditional_phase(&ev.block(amp, f)?) };
    let g = |p: f64| wrap_angle(p - PI);
    let (lo_lim, hi_lim) = (f0 - window, f0 + window);
    let mut step = if round == 0 { 0.002 } else { 0.0005 };
    let p0 = phase(start)?;
    let note = |p: f64, seen: &mut (f64, f64)| {
        seen.0 = seen.0.min(p.rem_euclid(2.0 * PI));
        seen.1 = seen.1.max(p.rem_euclid(2.0 * PI));
    };
    note(p0, &mut seen);
    let (mut left, mut right) = ((start, g(p0)), (start, g(p0)));
    let bracket = loop {
        let mut found = None;
        let (a, b) = ((left.0 - step).max(lo_lim), (right.0 + step).min(hi_lim));
        for (x, side) in [(a, 0), (b, 1)] {
            if (side == 0 && x >= left.0) || (side == 1 && x <= right.0) {
                continue;
            }
            let p = phase(x)?;
            note(p, &mut seen);
            let gx = g(p);
            let inner = if side == 0 { left } else { right };
            if gx.signum() != inner.1.signum() && gx.abs() + inner.1.abs() < PI {
                found = Some(if side == 0 { ((x, gx), inner) } else { (inner, (x, gx)) });
                break;
            }
            if side == 0 {
                left = (x, gx);
            } else {
                right = (x, gx);
            }
        }
        if found.is_some() {
            break found;
        }
        if left.0 <= lo_lim && right.0 >= hi_lim {
            break None;
        }
        step *= 2.0;
    };
    let Some((a, b)) = bracket else {
        return Err(Error::NoPiPoint { min: seen.0, max: seen.1 });
    };
    let (x, _) = regula_falsi(|f| Ok(g(phase(f)?)), a, b, 1e-9, 1e-5)?;
    Ok(x)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    sys: &DrivenSystem,
    drives: &DriveLinePair,
    amp: f64,
    from: Label,
    to: Label,
    f0: f64,
    opts: &CalibrationOptions,
    rounds: Vec<CalibrationRound>,
) -> Result<CZCalibration> {
    let envelope = PulseEnvelope::cosine(opts.width, amp);
    let comp = sys.computational()?;
    let full = sys.evolve(
        drives,
        &envelope,
        &EvolveOptions { samples_per_period: opts.samples_per_period, check_step: false, columns: Columns::All },
    )?;
    let checked = sys.evolve(
        drives,
        &envelope,
        &EvolveOptions { samples_per_period: opts.samples_per_period, check_step: true, columns: Columns::Computational },
    )?;
    let u = full.u.clone();
    let n = sys.dim();
    let unitarity_defect = (u.adjoint() * &u - CMat::identity(n, n)).norm();
    let u4 = full.block(&comp, &comp)?;
    let phi = conditional_phase(&u4)?;
    let a00 = u4[(0, 0)].arg();
    let virtual_z = [-(u4[(1, 1)].arg() - a00), -(u4[(2, 2)].arg() - a00)];

    // frame correction on the computational states (global phase removed)
    let mut z = CMat::identity(n, n);
    let zc = [0.0, virtual_z[0], virtual_z[1], virtual_z[0] + virtual_z[1]];
    for (k, &c) in comp.iter().enumerate() {
        z[(c, c)] = Complex64::from_polar(1.0, zc[k] - a00);
    }
    let corrected = &z * &u;
    let mut ideal = CMat::identity(n, n);
    ideal[(comp[3], comp[3])] = Complex64::new(-1.0, 0.0);
    let p = projector(n, &comp);
    let coherent_fidelity = kraus_average_fidelity(&[corrected.clone()], &ideal, &p)?;

    let twice = &corrected * &corrected;
    let t4 = CMat::from_fn(4, 4, |r, c| twice[(comp[r], comp[c])]);
    let cz_squared_populations = [0, 1, 2, 3].map(|k| t4[(k, k)].norm_sqr());
    let cz_squared_phase = conditional_phase(&t4)?;

    let mut leakage_by_state = Vec::new();
    for (l, &idx) in &sys.labels {
        if comp.contains(&idx) {
            continue;
        }
        let pop = comp.iter().map(|&c| u[(idx, c)].norm_sqr()).sum::<f64>() / 4.0;
        leakage_by_state.push((*l, pop));
    }
    Ok(CZCalibration {
        from,
        to,
        width: opts.width,
        bare_frequency: f0,
        frequency: drives.frequency,
        amplitude: amp,
        relative_phase: drives.relative_phase(),
        virtual_z,
        leakage: leakage(&u4),
        return_deficit: return_deficit(&u4),
        leakage_by_state,
        conditional_phase: phi,
        conditional_phase_error: wrap_angle(phi - PI),
        coherent_fidelity,
        cz_squared_populations,
        cz_squared_phase,
        unitarity_defect,
        step_change: checked.step_change.unwrap_or(f64::NAN),
        steps: full.steps,
        evaluations: 0,
        rounds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InterferenceSetting {
    /// phi_2 - phi_1 to program at the source (rad, wrapped).
    pub relative_phase: f64,
    /// A_2 / A_1
    pub amplitude_ratio: f64,
    pub element_1: [f64; 2],
    pub element_2: [f64; 2],
}

/// Line settings that cancel the drive on `from -> to` for a carrier at `frequency`:
/// `A2/A1 = |<f|n1|i>| / |<f|n2|i>|` and `phi2 - phi1 = pi + arg(m2) - arg(m1) - slope * frequency`
/// (which is `pi - k (x2 - x1)` when the two elements share a phase).
pub fn interference_setting(
    sys: &DrivenSystem,
    from: Label,
    to: Label,
    dispersion_slope: f64,
    frequency: f64,
) -> Result<InterferenceSetting> {
    let (i, f) = (sys.index(from)?, sys.index(to)?);
    let (m1, m2) = (sys.charge_element(0, f, i), sys.charge_element(1, f, i));
    let scale = m1.norm().max(m2.norm());
    if m2.norm() <= 1e-12 * scale.max(1e-300) || scale == 0.0 {
        return Err(Error::Singular(format!("<{to}|n2|{from}> vanishes")));
    }
    Ok(InterferenceSetting {
        relative_phase: wrap_angle(PI + m2.arg() - m1.arg() - dispersion_slope * frequency),
        amplitude_ratio: m1.norm() / m2.norm(),
        element_1: [m1.re, m1.im],
        element_2: [m2.re, m2.im],
    })
}

impl InterferenceSetting {
    pub fn drives(&self, frequency: f64, dispersion_slope: f64) -> DriveLinePair {
        DriveLinePair { weights: [1.0, self.amplitude_ratio], phases: [0.0, self.relative_phase], frequency, dispersion_slope }
    }
}

#[derive(Debug, Clone)]
pub struct Preparation {
    /// (state, weight) pairs of an incoherent initial mixture.
    pub states: Vec<(Label, f64)>,
}

impl Preparation {
    pub fn pure(l: Label) -> Self {
        Preparation { states: vec![(l, 1.0)] }
    }

    /// `(1 - eps)` in `main`, `eps` in `stray`.
    pub fn mixed(main: Label, stray: Label, eps: f64) -> Self {
        Preparation { states: vec![(main, 1.0 - eps), (stray, eps)] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Chevron {
    pub frequencies: Vec<f64>,
    /// Durations actually simulated (multiples of the time step), ns.
    pub durations: Vec<f64>,
    /// `p_leave[f][t]`: probability of having left the prepared state.
    pub p_leave: Vec<Vec<f64>>,
}

/// Square-pulse population map over carrier frequency and duration.
pub fn chevron_scan(
    sys: &DrivenSystem,
    drives: &DriveLinePair,
    amplitude: f64,
    frequencies: &[f64],
    durations: &[f64],
    prep: &Preparation,
    samples_per_period: f64,
) -> Result<Chevron> {
    if frequencies.is_empty() || durations.is_empty() {
        return Err(Error::invalid("chevron", "empty frequency or duration grid"));
    }
    if durations.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("durations", "must be >= 0"));
    }
    let total = prep.states.iter().map(|s| s.1).sum::<f64>();
    if prep.states.iter().any(|s| s.1 < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("preparation", "weights must be >= 0 and sum to 1"));
    }
    let fmax = frequencies.iter().cloned().fold(0.0, f64::max);
    let tmax = durations.iter().cloned().fold(0.0, f64::max);
    let steps = step_count(tmax.max(1e-9), fmax, samples_per_period);
    let dt = tmax.max(1e-9) / steps as f64;
    let at: Vec<usize> = durations.iter().map(|&t| (t / dt).round() as usize).collect();
    let cols = prep.states.iter().map(|(l, _)| sys.index(*l)).collect::<Result<Vec<_>>>()?;
    let envelope = PulseEnvelope::square(dt * steps as f64, amplitude);
    let p_leave = frequencies
        .par_iter()
        .map(|&fr| {
            let snaps = sys.snapshots(&drives.with_frequency(fr), &envelope, dt, &cols, &at)?;
            Ok(snaps
                .iter()
                .map(|u| {
                    prep.states
                        .iter()
                        .enumerate()
                        .map(|(j, (_, w))| w * (1.0 - u[(cols[j], j)].norm_sqr()))
                        .sum()
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(Chevron { frequencies: frequencies.to_vec(), durations: at.iter().map(|&s| s as f64 * dt).collect(), p_leave })
}
