//! Driven dressed subspace and its fourth-order Magnus propagator.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::envelope::{DriveLinePair, PulseEnvelope};
use crate::composite::{
    label_of_index, product_index, track_labels, DeviceSpec, Eigensystem, Label, LabeledSpectrum, COMPUTATIONAL, TRACKED,
};
use crate::error::{Error, Result};
use crate::linalg::{wrap_angle, CMat, RMat};

/// Samples per carrier period used unless overridden.
pub const DEFAULT_SAMPLES_PER_PERIOD: f64 = 64.0;
/// Largest element change allowed when the time step is halved.
pub const STEP_TOLERANCE: f64 = 1e-6;

/// Lowest dressed eigenstates of the coupled circuit with both charge drives.
///
/// Charge operators are stored as the real antisymmetric `b_i` with `n_i = i b_i`.
#[derive(Debug, Clone)]
pub struct DrivenSystem {
    /// GHz, relative to the ground state.
    pub energies: Vec<f64>,
    pub b: [RMat; 2],
    /// Position of each tracked label in the subspace.
    pub labels: BTreeMap<Label, usize>,
    /// Dominant product label of every subspace state.
    pub state_labels: Vec<Label>,
}

impl DrivenSystem {
    pub fn from_parts(energies: Vec<f64>, b1: RMat, b2: RMat, labels: BTreeMap<Label, usize>) -> Result<Self> {
        let n = energies.len();
        for (k, b) in [&b1, &b2].into_iter().enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::invalid(format!("drive operator {}", k + 1), "dimension differs from energies"));
            }
            if (b + b.transpose()).amax() > 1e-10 * b.amax().max(1.0) {
                return Err(Error::invalid(format!("drive operator {}", k + 1), "charge operator must be i times antisymmetric"));
            }
        }
        if labels.values().any(|&i| i >= n) {
            return Err(Error::invalid("labels", "index outside the subspace"));
        }
        let mut state_labels = vec![Label(0, 0, 0); n];
        for (l, &i) in &labels {
            state_labels[i] = *l;
        }
        Ok(DrivenSystem { energies, b: [b1, b2], labels, state_labels })
    }

    /// Dressed states with energy below `cutoff` (GHz above the ground state).
    pub fn from_eigensystem(spec: &LabeledSpectrum, sys: &Eigensystem, cutoff: f64) -> Result<Self> {
        let e0 = sys.energies[0];
        let keep: Vec<usize> = (0..sys.energies.len()).filter(|&j| sys.energies[j] - e0 < cutoff).collect();
        let mut labels = BTreeMap::new();
        for (l, &j) in &spec.labels {
            let pos = keep
                .iter()
                .position(|&k| k == j)
                .ok_or_else(|| Error::invalid("cutoff", format!("tracked state {l} lies above {cutoff} GHz")))?;
            labels.insert(*l, pos);
        }
        let n = keep.len();
        let w = RMat::from_fn(sys.vectors.nrows(), n, |r, c| sys.vectors[(r, keep[c])]);
        let a = &sys.assembled;
        let b1 = w.transpose() * &a.a1 * &w;
        let b2 = w.transpose() * &a.a2 * &w;
        // exact antisymmetry
        let b1 = (&b1 - b1.transpose()) * 0.5;
        let b2 = (&b2 - b2.transpose()) * 0.5;
        let dims = a.dims;
        let state_labels = (0..n)
            .map(|c| {
                let col = w.column(c);
                let i = col.iamax();
                label_of_index(dims, i)
            })
            .collect();
        let energies = keep.iter().map(|&j| sys.energies[j] - e0).collect();
        let mut out = DrivenSystem { energies, b: [b1, b2], labels, state_labels };
        for (l, &i) in &out.labels {
            out.state_labels[i] = *l;
        }
        debug_assert!(COMPUTATIONAL.iter().all(|l| product_index(dims, *l).is_some()));
        Ok(out)
    }

    /// Track labels from zero coupler flux to the device's own and keep every state
    /// within `photons` drive quanta (at `drive_ghz`) of the computational band.
    pub fn from_device(device: &DeviceSpec, drive_ghz: f64, photons: f64) -> Result<Self> {
        let (spec, sys) = Self::tracked(device)?;
        Self::around_band(&spec, &sys, drive_ghz, photons)
    }

    /// As [`DrivenSystem::from_device`], with the drive frequency taken from the
    /// static `from -> to` transition, which is returned alongside.
    pub fn for_transition(device: &DeviceSpec, from: Label, to: Label, photons: f64) -> Result<(Self, f64)> {
        let (spec, sys) = Self::tracked(device)?;
        let f0 = spec.energy(to)? - spec.energy(from)?;
        if f0 <= 0.0 {
            return Err(Error::invalid("transition", format!("{from} -> {to} is not an upward transition")));
        }
        Ok((Self::around_band(&spec, &sys, f0, photons)?, f0))
    }

    fn tracked(device: &DeviceSpec) -> Result<(LabeledSpectrum, Eigensystem)> {
        Ok(track_labels(device, &[device.coupler_flux()], &TRACKED)?.pop().expect("one flux point"))
    }

    fn around_band(spec: &LabeledSpectrum, sys: &Eigensystem, drive_ghz: f64, photons: f64) -> Result<Self> {
        let top = COMPUTATIONAL.iter().map(|l| spec.energy(*l)).collect::<Result<Vec<_>>>()?;
        let band = top.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sys.energies[0];
        Self::from_eigensystem(spec, sys, band + photons * drive_ghz + 1e-9)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn index(&self, l: Label) -> Result<usize> {
        self.labels.get(&l).copied().ok_or_else(|| Error::UntrackedLabel(l.to_string()))
    }

    pub fn computational(&self) -> Result<[usize; 4]> {
        Ok([
            self.index(COMPUTATIONAL[0])?,
            self.index(COMPUTATIONAL[1])?,
            self.index(COMPUTATIONAL[2])?,
            self.index(COMPUTATIONAL[3])?,
        ])
    }

    pub fn frequency(&self, from: Label, to: Label) -> Result<f64> {
        Ok(self.energies[self.index(to)?] - self.energies[self.index(from)?])
    }

    /// `<f| n_line |i>`
    pub fn charge_element(&self, line: usize, f: usize, i: usize) -> Complex64 {
        Complex64::new(0.0, self.b[line][(f, i)])
    }

    /// Co-rotating drive element `sum_k w_k <f|n_k|i> exp(-i phi_k)` (per unit envelope).
    pub fn drive_element(&self, drives: &DriveLinePair, f: usize, i: usize) -> Complex64 {
        let p = drives.effective_phases();
        (0..2)
            .map(|k| drives.weights[k] * self.charge_element(k, f, i) * Complex64::from_polar(1.0, -p[k]))
            .sum()
    }

    /// Propagator for the given drive, in the interaction frame of the static Hamiltonian.
    pub fn evolve(&self, drives: &DriveLinePair, envelope: &PulseEnvelope, opts: &EvolveOptions) -> Result<Propagator> {
        drives.validate()?;
        envelope.validate()?;
        let columns = match &opts.columns {
            Columns::Computational => self.computational()?.to_vec(),
            Columns::All => (0..self.dim()).collect(),
            Columns::States(v) => v.clone(),
        };
        if columns.iter().any(|&c| c >= self.dim()) {
            return Err(Error::invalid("columns", format!("initial state outside {} states", self.dim())));
        }
        let steps = step_count(envelope.width, drives.frequency, opts.samples_per_period);
        let engine = Engine::new(self, drives);
        let u = engine.run(envelope, drives.frequency, envelope.width, steps, &columns, &[steps])?.pop().unwrap();
        let mut step_change = None;
        if opts.check_step {
            let fine = engine.run(envelope, drives.frequency, envelope.width, 2 * steps, &columns, &[2 * steps])?.pop().unwrap();
            let diff = (&fine - &u).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if diff > STEP_TOLERANCE {
                return Err(Error::StepNotConverged(diff));
            }
            step_change = Some(diff);
        }
        Ok(Propagator { columns, u, steps, dt: envelope.width / steps as f64, step_change })
    }

    /// States (as subspace columns) at each requested time for a square drive.
    pub(crate) fn snapshots(
        &self,
        drives: &DriveLinePair,
        envelope: &PulseEnvelope,
        dt: f64,
        columns: &[usize],
        at_steps: &[usize],
    ) -> Result<Vec<CMat>> {
        let steps = *at_steps.iter().max().unwrap_or(&0);
        Engine::new(self, drives).run(envelope, drives.frequency, dt * steps as f64, steps, columns, at_steps)
    }
}

pub(crate) fn step_count(width: f64, frequency: f64, samples_per_period: f64) -> usize {
    ((width * frequency * samples_per_period).ceil() as usize).max(1)
}

#[derive(Debug, Clone)]
pub enum Columns {
    Computational,
    All,
    States(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub samples_per_period: f64,
    /// Repeat at half the step and fail if any element moves by more than `STEP_TOLERANCE`.
    pub check_step: bool,
    pub columns: Columns,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { samples_per_period: DEFAULT_SAMPLES_PER_PERIOD, check_step: true, columns: Columns::Computational }
    }
}

/// Columns of the interaction-frame propagator for the chosen initial states.
#[derive(Debug, Clone, Serialize)]
pub struct Propagator {
    pub columns: Vec<usize>,
    #[serde(skip)]
    pub u: CMat,
    pub steps: usize,
    pub dt: f64,
    pub step_change: Option<f64>,
}

impl Propagator {
    pub fn element(&self, row: usize, initial: usize) -> Result<Complex64> {
        let c = self
            .columns
            .iter()
            .position(|&c| c == initial)
            .ok_or_else(|| Error::invalid("initial", format!("state {initial} was not propagated")))?;
        Ok(self.u[(row, c)])
    }

    /// `<rows| U |cols>` for states that were propagated.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Result<CMat> {
        let mut m = CMat::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for (i, &r) in rows.iter().enumerate() {
                m[(i, j)] = self.element(r, c)?;
            }
        }
        Ok(m)
    }

    /// Probability of leaving `subspace` from each of its states.
    pub fn leakage_per_state(&self, subspace: &[usize]) -> Result<Vec<f64>> {
        let b = self.block(subspace, subspace)?;
        Ok((0..subspace.len()).map(|j| 1.0 - b.column(j).norm_squared()).collect())
    }
}

/// Average population leaving the computational block.
pub fn leakage(u4: &CMat) -> f64 {
    1.0 - u4.norm_squared() / u4.ncols() as f64
}

/// Average population not returned to the initial computational state.
pub fn return_deficit(u4: &CMat) -> f64 {
    1.0 - (0..u4.ncols()).map(|i| u4[(i, i)].norm_sqr()).sum::<f64>() / u4.ncols() as f64
}

/// `arg U11 - arg U10 - arg U01 + arg U00` for a block in (00, 10, 01, 11) order.
pub fn conditional_phase(u4: &CMat) -> Result<f64> {
    if u4.nrows() != 4 || u4.ncols() != 4 {
        return Err(Error::invalid("propagator", "conditional phase needs a 4x4 block"));
    }
    for (k, l) in COMPUTATIONAL.iter().enumerate() {
        let m = u4[(k, k)].norm();
        if m < 0.5 {
            return Err(Error::NotDispersive { label: l.to_string(), magnitude: m });
        }
    }
    let a = |k: usize| u4[(k, k)].arg();
    Ok(wrap_angle(a(3) - a(1) - a(2) + a(0)))
}

/// Per-step generator pieces, flattened column-major.
struct Engine {
    n: usize,
    d: Vec<f64>,
    mean_d: f64,
    bx: Vec<f64>,
    by: Vec<f64>,
    dbx: Vec<f64>,
    dby: Vec<f64>,
    bxy: Vec<f64>,
}

impl Engine {
    fn new(sys: &DrivenSystem, drives: &DriveLinePair) -> Self {
        let n = sys.dim();
        let p = drives.effective_phases();
        let w = drives.weights;
        let bx = &sys.b[0] * (w[0] * p[0].cos()) + &sys.b[1] * (w[1] * p[1].cos());
        let by = &sys.b[0] * (w[0] * p[0].sin()) + &sys.b[1] * (w[1] * p[1].sin());
        let d = sys.energies.clone();
        let comm_d = |b: &RMat| RMat::from_fn(n, n, |r, c| (d[r] - d[c]) * b[(r, c)]);
        let flat = |m: &RMat| m.as_slice().to_vec();
        let bxy = &bx * &by - &by * &bx;
        Engine {
            n,
            // centre of the spectrum keeps the step generator small
            mean_d: 0.5 * (d.iter().cloned().fold(f64::INFINITY, f64::min) + d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
            dbx: flat(&comm_d(&bx)),
            dby: flat(&comm_d(&by)),
            bxy: flat(&bxy),
            bx: flat(&bx),
            by: flat(&by),
            d,
        }
    }

    /// Magnus-4 with two Gauss-Legendre nodes per step; `H = D + a(t) X + b(t) Y` with
    /// `X = i Bx`, `Y = i By`. Returns the interaction-frame columns at each listed step.
    fn run(
        &self,
        env: &PulseEnvelope,
        freq: f64,
        total: f64,
        steps: usize,
        columns: &[usize],
        at_steps: &[usize],
    ) -> Result<Vec<CMat>> {
        let n = self.n;
        let nc = columns.len();
        let dt = total / steps as f64;
        let c = 3f64.sqrt() / 6.0;
        let kappa = TAU * 3f64.sqrt() * dt * dt / 12.0;
        let coeff = |t: f64| {
            let (i, q) = env.iq(t);
            let (s, co) = (TAU * freq * t).sin_cos();
            (env.amplitude * (i * co + q * s), env.amplitude * (q * co - i * s))
        };
        // column-major state block, real and imaginary parts apart
        let mut re = vec![0.0; n * nc];
        let mut im = vec![0.0; n * nc];
        for (j, &col) in columns.iter().enumerate() {
            re[j * n + col] = 1.0;
        }
        let mut work = Taylor::new(n, nc);
        let mut wanted: Vec<usize> = at_steps.to_vec();
        wanted.sort_unstable();
        let record = |step: usize, re: &[f64], im: &[f64], out: &mut Vec<(usize, CMat)>| {
            let t = step as f64 * dt;
            let frame: Vec<Complex64> =
                self.d.iter().map(|&e| Complex64::from_polar(1.0, TAU * (e - self.mean_d) * t)).collect();
            let mat = CMat::from_fn(n, nc, |r, j| frame[r] * Complex64::new(re[j * n + r], im[j * n + r]));
            out.push((step, mat));
        };
        let mut recorded = Vec::new();
        for &s in wanted.iter().filter(|&&s| s == 0) {
            record(s, &re, &im, &mut recorded);
        }
        for step in 0..steps {
            let t0 = step as f64 * dt;
            let (aa, ba) = coeff(t0 + (0.5 - c) * dt);
            let (ab, bb) = coeff(t0 + (0.5 + c) * dt);
            let sx = 0.5 * dt * (aa + ab);
            let sy = 0.5 * dt * (ba + bb);
            let k1 = kappa * (aa - ab);
            let k2 = kappa * (ba - bb);
            let k3 = kappa * (ab * ba - bb * aa);
            // M = -i 2pi (S - mu) + 2pi K, with S = D dt + k1 [D,Bx] + k2 [D,By],
            // K = sx Bx + sy By + k3 [Bx,By]
            for k in 0..n * n {
                work.m_re[k] = TAU * (sx * self.bx[k] + sy * self.by[k] + k3 * self.bxy[k]);
                work.m_im[k] = -TAU * (k1 * self.dbx[k] + k2 * self.dby[k]);
            }
            for r in 0..n {
                work.m_im[r * n + r] -= TAU * (self.d[r] - self.mean_d) * dt;
            }
            work.apply(&mut re, &mut im)?;
            let done = step + 1;
            if wanted.binary_search(&done).is_ok() {
                record(done, &re, &im, &mut recorded);
            }
        }
        // return in the caller's order
        Ok(at_steps
            .iter()
            .map(|s| recorded.iter().find(|(k, _)| k == s).expect("recorded step").1.clone())
            .collect())
    }
}

/// `psi <- exp(M) psi` by Taylor series on the columns, with `M` and `psi` split into
/// real and imaginary parts so the column updates vectorize.
struct Taylor {
    n: usize,
    nc: usize,
    m_re: Vec<f64>,
    m_im: Vec<f64>,
    t_re: Vec<f64>,
    t_im: Vec<f64>,
    n_re: Vec<f64>,
    n_im: Vec<f64>,
}

impl Taylor {
    fn new(n: usize, nc: usize) -> Self {
        let z = |k: usize| vec![0.0; k];
        Taylor { n, nc, m_re: z(n * n), m_im: z(n * n), t_re: z(n * nc), t_im: z(n * nc), n_re: z(n * nc), n_im: z(n * nc) }
    }

    fn apply(&mut self, re: &mut [f64], im: &mut [f64]) -> Result<()> {
        let n = self.n;
        self.t_re.copy_from_slice(re);
        self.t_im.copy_from_slice(im);
        for k in 1..60 {
            let inv = 1.0 / k as f64;
            self.n_re.fill(0.0);
            self.n_im.fill(0.0);
            for j in 0..self.nc {
                let out_re = &mut self.n_re[j * n..(j + 1) * n];
                let out_im = &mut self.n_im[j * n..(j + 1) * n];
                for q in 0..n {
                    let xr = self.t_re[j * n + q] * inv;
                    let xi = self.t_im[j * n + q] * inv;
                    let a = &self.m_re[q * n..(q + 1) * n];
                    let b = &self.m_im[q * n..(q + 1) * n];
                    for r in 0..n {
                        out_re[r] += a[r] * xr - b[r] * xi;
                        out_im[r] += a[r] * xi + b[r] * xr;
                    }
                }
            }
            let mut largest: f64 = 0.0;
            for i in 0..n * self.nc {
                re[i] += self.n_re[i];
                im[i] += self.n_im[i];
                largest = largest.max(self.n_re[i] * self.n_re[i] + self.n_im[i] * self.n_im[i]);
            }
            std::mem::swap(&mut self.t_re, &mut self.n_re);
            std::mem::swap(&mut self.t_im, &mut self.n_im);
            if largest < 1e-34 {
                return Ok(());
            }
        }
        Err(Error::StepNotConverged(f64::NAN))
    }
}

/// Rabi rate (GHz) a cosine-class envelope of width `t` needs for one full cycle.
pub fn full_cycle_amplitude(width: f64, mean_in_phase: f64, element: f64) -> f64 {
    1.0 / (width * mean_in_phase * element)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(f: f64) -> DrivenSystem {
        let mut b = RMat::zeros(2, 2);
        b[(1, 0)] = 1.0;
        b[(0, 1)] = -1.0;
        let labels = BTreeMap::from([(Label(0, 0, 0), 0), (Label(1, 0, 0), 1)]);
        DrivenSystem::from_parts(vec![0.0, f], b, RMat::zeros(2, 2), labels).unwrap()
    }

    fn opts() -> EvolveOptions {
        EvolveOptions { columns: Columns::States(vec![0, 1]), ..Default::default() }
    }

    fn excited(sys: &DrivenSystem, f: f64, amp: f64) -> f64 {
        let env = PulseEnvelope::cosine(50.0, amp);
        let p = sys.evolve(&DriveLinePair::single(0, f), &env, &opts()).unwrap();
        p.element(1, 0).unwrap().norm_sqr()
    }

    #[test]
    fn zero_drive_is_identity_in_frame() {
        let s = qubit(5.0);
        let p = s.evolve(&DriveLinePair::single(0, 5.0), &PulseEnvelope::cosine(50.0, 0.0), &opts()).unwrap();
        assert!((&p.u - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn cosine_pulse_areas() {
        let s = qubit(5.0);
        let full = full_cycle_amplitude(50.0, 0.5, 1.0);
        // counter-rotating terms shift the result by about (amp / f)^2
        assert!(excited(&s, 5.0, 0.5 * full) > 1.0 - 1e-3);
        assert!(excited(&s, 5.0, full) < 1e-3);
    }

    #[test]
    fn detuning_symmetric() {
        let s = qubit(5.0);
        let a = full_cycle_amplitude(50.0, 0.5, 1.0) * 0.5;
        for d in [0.005, 0.02] {
            let (lo, hi) = (excited(&s, 5.0 - d, a), excited(&s, 5.0 + d, a));
            assert!((lo - hi).abs() < 2e-3, "{d}: {lo} {hi}");
            assert!(lo < excited(&s, 5.0, a));
        }
    }

    #[test]
    fn propagator_unitary_and_step_converged() {
        let s = qubit(5.0);
        let mut o = opts();
        o.check_step = true;
        let env = PulseEnvelope::drag(30.0, 0.05, 0.2);
        let p = s.evolve(&DriveLinePair::single(0, 4.97), &env, &o).unwrap();
        assert!((p.u.adjoint() * &p.u - CMat::identity(2, 2)).norm() < 1e-10);
        assert!(p.step_change.unwrap() < STEP_TOLERANCE);
    }

    #[test]
    fn conditional_phase_of_cz() {
        let mut u = CMat::identity(4, 4);
        u[(3, 3)] = Complex64::new(-1.0, 0.0);
        assert!((conditional_phase(&u).unwrap().abs() - std::f64::consts::PI).abs() < 1e-12);
        u[(1, 1)] = Complex64::new(0.1, 0.0);
        assert!(conditional_phase(&u).is_err());
    }
}
