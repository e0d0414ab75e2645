//! Coupled fluxonium-transmon-fluxonium Hamiltonian in the product basis of mode eigenstates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh_real, kron3, RMat};
use crate::qubit::{build_fluxonium_mode, build_transmon_mode, FluxoniumParams, ModeSpectrum, TransmonParams};

pub const MAX_DIM: usize = 2000;
/// Largest flux step (in units of Phi_0) used when carrying labels along a sweep.
pub const TRACK_STEP_PHI0: f64 = 0.005;
const TIE_TOL: f64 = 1e-6;

/// Product-state label |j k l> = (fluxonium 1, coupler, fluxonium 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub u8, pub u8, pub u8);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.0, self.1, self.2)
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let d: Vec<u8> = s
            .trim()
            .chars()
            .map(|c| c.to_digit(10).map(|x| x as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::invalid("label", format!("`{s}` is not three digits")))?;
        match d.as_slice() {
            [a, b, c] => Ok(Label(*a, *b, *c)),
            _ => Err(Error::invalid("label", format!("`{s}` is not three digits"))),
        }
    }
}

pub const COMPUTATIONAL: [Label; 4] = [Label(0, 0, 0), Label(1, 0, 0), Label(0, 0, 1), Label(1, 0, 1)];

pub const TRACKED: [Label; 11] = [
    Label(0, 0, 0),
    Label(1, 0, 0),
    Label(0, 0, 1),
    Label(1, 0, 1),
    Label(2, 0, 0),
    Label(0, 0, 2),
    Label(1, 1, 0),
    Label(0, 1, 1),
    Label(2, 0, 1),
    Label(1, 1, 1),
    Label(1, 0, 2),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub fluxonium1: FluxoniumParams,
    pub fluxonium2: FluxoniumParams,
    pub transmon: TransmonParams,
    pub j_1c: f64,
    pub j_2c: f64,
    pub j_12: f64,
    /// Kept levels per mode (fluxonium 1, coupler, fluxonium 2).
    pub levels: [usize; 3],
}

impl DeviceSpec {
    pub fn dim(&self) -> usize {
        self.levels.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        self.fluxonium1.validate().map_err(|e| prefix(e, "fluxonium1"))?;
        self.fluxonium2.validate().map_err(|e| prefix(e, "fluxonium2"))?;
        self.transmon.validate().map_err(|e| prefix(e, "transmon"))?;
        for (k, v) in [("j_1c", self.j_1c), ("j_2c", self.j_2c), ("j_12", self.j_12)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("couplings.{k}"), "must be finite"));
            }
        }
        if self.levels.iter().any(|&k| k == 0) {
            return Err(Error::invalid("truncation", "kept levels must be positive"));
        }
        if self.dim() > MAX_DIM {
            return Err(Error::DimensionBudget { dim: self.dim(), max: MAX_DIM });
        }
        Ok(())
    }

    /// Coupler external phase in units of Phi_0.
    pub fn coupler_flux(&self) -> f64 {
        self.transmon.phi_ext / std::f64::consts::TAU
    }

    pub fn with_coupler_flux(&self, phi0: f64) -> Self {
        let mut d = self.clone();
        d.transmon.phi_ext = phi0 * std::f64::consts::TAU;
        d
    }

    pub fn with_couplings(&self, j_1c: f64, j_2c: f64, j_12: f64) -> Self {
        DeviceSpec { j_1c, j_2c, j_12, ..self.clone() }
    }

    pub fn uncoupled(&self) -> Self {
        self.with_couplings(0.0, 0.0, 0.0)
    }

    /// Exchange the two fluxonia together with their couplings.
    pub fn mirrored(&self) -> Self {
        DeviceSpec {
            fluxonium1: self.fluxonium2,
            fluxonium2: self.fluxonium1,
            j_1c: self.j_2c,
            j_2c: self.j_1c,
            levels: [self.levels[2], self.levels[1], self.levels[0]],
            ..self.clone()
        }
    }
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::InvalidParameter { key, reason } => Error::InvalidParameter { key: format!("{section}.{key}"), reason },
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct Modes {
    pub f1: ModeSpectrum,
    pub c: ModeSpectrum,
    pub f2: ModeSpectrum,
}

pub fn build_modes(device: &DeviceSpec) -> Result<Modes> {
    device.validate()?;
    Ok(Modes {
        f1: build_fluxonium_mode(&device.fluxonium1, device.levels[0])?,
        c: build_transmon_mode(&device.transmon, device.levels[1])?,
        f2: build_fluxonium_mode(&device.fluxonium2, device.levels[2])?,
    })
}

/// Coupled Hamiltonian and embedded charge operators. Each charge operator is
/// `n = i A` with the real antisymmetric `A` stored here.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub dims: [usize; 3],
    pub bare: Vec<f64>,
    pub h: RMat,
    pub a1: RMat,
    pub ac: RMat,
    pub a2: RMat,
}

impl Assembled {
    pub fn dim(&self) -> usize {
        self.bare.len()
    }

    pub fn index(&self, l: Label) -> Option<usize> {
        product_index(self.dims, l)
    }

    /// Coupling matrices per unit coupling: (n1 nc, n2 nc, n1 n2).
    pub fn unit_couplings(&self) -> [RMat; 3] {
        let [k1, kc, k2] = self.dims;
        let id = RMat::identity;
        [
            -kron3(&self.a1_mode(), &self.ac_mode(), &id(k2, k2)),
            -kron3(&id(k1, k1), &self.ac_mode(), &self.a2_mode()),
            -kron3(&self.a1_mode(), &id(kc, kc), &self.a2_mode()),
        ]
    }

    fn a1_mode(&self) -> RMat {
        let [k1, kc, k2] = self.dims;
        RMat::from_fn(k1, k1, |r, c| self.a1[(r * kc * k2, c * kc * k2)])
    }

    fn ac_mode(&self) -> RMat {
        let [_, kc, k2] = self.dims;
        RMat::from_fn(kc, kc, |r, c| self.ac[(r * k2, c * k2)])
    }

    fn a2_mode(&self) -> RMat {
        let k2 = self.dims[2];
        RMat::from_fn(k2, k2, |r, c| self.a2[(r, c)])
    }
}

pub fn product_index(dims: [usize; 3], l: Label) -> Option<usize> {
    let (j, k, m) = (l.0 as usize, l.1 as usize, l.2 as usize);
    if j < dims[0] && k < dims[1] && m < dims[2] {
        Some((j * dims[1] + k) * dims[2] + m)
    } else {
        None
    }
}

pub fn label_of_index(dims: [usize; 3], i: usize) -> Label {
    let m = i % dims[2];
    let k = (i / dims[2]) % dims[1];
    let j = i / (dims[1] * dims[2]);
    Label(j as u8, k as u8, m as u8)
}

pub fn assemble_from_modes(modes: &Modes, j_1c: f64, j_2c: f64, j_12: f64) -> Result<Assembled> {
    let dims = [modes.f1.levels_kept, modes.c.levels_kept, modes.f2.levels_kept];
    let dim: usize = dims.iter().product();
    if dim > MAX_DIM {
        return Err(Error::DimensionBudget { dim, max: MAX_DIM });
    }
    let a1 = modes.f1.charge_imag()?;
    let ac = modes.c.charge_imag()?;
    let a2 = modes.f2.charge_imag()?;
    let id = RMat::identity;
    let (i1, ic, i2) = (id(dims[0], dims[0]), id(dims[1], dims[1]), id(dims[2], dims[2]));

    let mut bare = vec![0.0; dim];
    for (i, b) in bare.iter_mut().enumerate() {
        let l = label_of_index(dims, i);
        *b = modes.f1.energies[l.0 as usize] + modes.c.energies[l.1 as usize] + modes.f2.energies[l.2 as usize];
    }
    // n_i n_j = (i A_i)(i A_j) = -A_i A_j
    let mut h = RMat::from_diagonal(&DVector::from_vec(bare.clone()));
    if j_1c != 0.0 {
        h -= kron3(&a1, &ac, &i2) * j_1c;
    }
    if j_2c != 0.0 {
        h -= kron3(&i1, &ac, &a2) * j_2c;
    }
    if j_12 != 0.0 {
        h -= kron3(&a1, &ic, &a2) * j_12;
    }
    Ok(Assembled {
        dims,
        bare,
        h,
        a1: kron3(&a1, &ic, &i2),
        ac: kron3(&i1, &ac, &i2),
        a2: kron3(&i1, &ic, &a2),
    })
}

pub fn assemble_ftf(device: &DeviceSpec) -> Result<Assembled> {
    let modes = build_modes(device)?;
    assemble_from_modes(&modes, device.j_1c, device.j_2c, device.j_12)
}

/// Full eigen-decomposition with the assembled operators kept alongside.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub assembled: Assembled,
    pub energies: Vec<f64>,
    pub vectors: RMat,
}

pub fn diagonalize(device: &DeviceSpec) -> Result<Eigensystem> {
    let assembled = assemble_ftf(device)?;
    let (energies, vectors) = eigh_real(assembled.h.clone());
    Ok(Eigensystem { assembled, energies, vectors })
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledSpectrum {
    pub energies: Vec<f64>,
    pub labels: BTreeMap<Label, usize>,
    /// |<product|eigen>|^2 for each label.
    pub overlaps: BTreeMap<Label, f64>,
    /// Smallest step-to-step eigenvector overlap seen while tracking (1 when labeled directly).
    pub continuity: BTreeMap<Label, f64>,
    /// Labels whose assignment hit a tie within 1e-6 or a collision.
    pub ambiguous: Vec<Label>,
    pub coupler_flux: f64,
}

impl LabeledSpectrum {
    pub fn energy(&self, l: Label) -> Result<f64> {
        self.labels
            .get(&l)
            .map(|&i| self.energies[i])
            .ok_or_else(|| Error::UntrackedLabel(l.to_string()))
    }
}

pub fn transition_frequency(spec: &LabeledSpectrum, from: Label, to: Label) -> Result<f64> {
    Ok(spec.energy(to)? - spec.energy(from)?)
}

/// Max-overlap assignment of product labels to eigenvectors. Labels are served in
/// order of decreasing best overlap so that a collision falls on the weaker claim.
pub fn label_by_overlap(sys: &Eigensystem, labels: &[Label]) -> Result<LabeledSpectrum> {
    let dims = sys.assembled.dims;
    let n = sys.energies.len();
    let mut rows = Vec::with_capacity(labels.len());
    for &l in labels {
        let p = product_index(dims, l).ok_or_else(|| Error::Labeling(format!("label {l} outside truncation")))?;
        let ov: Vec<f64> = (0..n).map(|j| sys.vectors[(p, j)].powi(2)).collect();
        rows.push((l, ov));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let best = |ov: &Vec<f64>| ov.iter().cloned().fold(0.0, f64::max);
    order.sort_by(|&a, &b| best(&rows[b].1).total_cmp(&best(&rows[a].1)));

    let mut taken = vec![false; n];
    let mut out = LabeledSpectrum {
        energies: sys.energies.clone(),
        labels: BTreeMap::new(),
        overlaps: BTreeMap::new(),
        continuity: BTreeMap::new(),
        ambiguous: Vec::new(),
        coupler_flux: 0.0,
    };
    for &r in &order {
        let (l, ov) = &rows[r];
        let top = best(ov);
        let (j, tie) = pick(ov, &taken, |_| 0.0);
        if tie || ov[j] < top {
            out.ambiguous.push(*l);
        }
        taken[j] = true;
        out.labels.insert(*l, j);
        out.overlaps.insert(*l, ov[j]);
        out.continuity.insert(*l, 1.0);
    }
    Ok(out)
}

/// Index of the largest unclaimed score; ties within `TIE_TOL` go to the smallest `dist`.
fn pick(score: &[f64], taken: &[bool], dist: impl Fn(usize) -> f64) -> (usize, bool) {
    let mut best: Option<usize> = None;
    for j in 0..score.len() {
        if taken[j] {
            continue;
        }
        best = match best {
            None => Some(j),
            Some(b) if score[j] > score[b] + TIE_TOL => Some(j),
            Some(b) if (score[j] - score[b]).abs() <= TIE_TOL && dist(j) < dist(b) => Some(j),
            other => other,
        };
    }
    let b = best.expect("more labels than eigenvectors");
    let tie = (0..score.len()).any(|j| j != b && !taken[j] && (score[j] - score[b]).abs() <= TIE_TOL);
    (b, tie)
}

/// Label at the reference coupler flux (zero), then carry the labels to each requested
/// coupler flux (units of Phi_0, visited in the given order) by eigenvector continuity.
/// Returns the labeled spectrum and eigenvectors at every requested point.
pub fn track_labels(
    device: &DeviceSpec,
    fluxes: &[f64],
    labels: &[Label],
) -> Result<Vec<(LabeledSpectrum, Eigensystem)>> {
    // only the coupler depends on its flux; the fluxonium modes are built once
    let mut modes = build_modes(&device.with_coupler_flux(0.0))?;
    let mut at_flux = |f: f64| -> Result<Eigensystem> {
        modes.c = build_transmon_mode(&device.with_coupler_flux(f).transmon, device.levels[1])?;
        let assembled = assemble_from_modes(&modes, device.j_1c, device.j_2c, device.j_12)?;
        let (energies, vectors) = eigh_real(assembled.h.clone());
        Ok(Eigensystem { assembled, energies, vectors })
    };
    let reference = at_flux(0.0)?;
    let mut current = label_by_overlap(&reference, labels)?;
    let mut vecs: BTreeMap<Label, DVector<f64>> = current
        .labels
        .iter()
        .map(|(l, &j)| (*l, reference.vectors.column(j).into_owned()))
        .collect();
    let mut here = 0.0;
    let mut out = Vec::with_capacity(fluxes.len());
    let mut last_sys = reference;
    for &target in fluxes {
        let steps = ((target - here).abs() / TRACK_STEP_PHI0 - 1e-9).ceil().max(0.0) as usize;
        for s in 1..=steps {
            let f = here + (target - here) * s as f64 / steps as f64;
            let sys = at_flux(f)?;
            current = follow(&sys, &current, &mut vecs)?;
            current.coupler_flux = f;
            last_sys = sys;
        }
        here = target;
        current.coupler_flux = target;
        out.push((current.clone(), last_sys.clone()));
    }
    Ok(out)
}

fn follow(
    sys: &Eigensystem,
    prev: &LabeledSpectrum,
    vecs: &mut BTreeMap<Label, DVector<f64>>,
) -> Result<LabeledSpectrum> {
    let n = sys.energies.len();
    let dims = sys.assembled.dims;
    let mut taken = vec![false; n];
    let mut next = LabeledSpectrum {
        energies: sys.energies.clone(),
        labels: BTreeMap::new(),
        overlaps: BTreeMap::new(),
        continuity: prev.continuity.clone(),
        ambiguous: prev.ambiguous.clone(),
        coupler_flux: prev.coupler_flux,
    };
    // Strongest continuity claims first.
    let mut claims: Vec<(Label, Vec<f64>)> = vecs
        .iter()
        .map(|(l, v)| (*l, (0..n).map(|j| sys.vectors.column(j).dot(v).powi(2)).collect()))
        .collect();
    claims.sort_by(|a, b| {
        let ba = a.1.iter().cloned().fold(0.0, f64::max);
        let bb = b.1.iter().cloned().fold(0.0, f64::max);
        bb.total_cmp(&ba)
    });
    for (l, score) in claims {
        let e_prev = prev.energy(l)?;
        let (j, tie) = pick(&score, &taken, |j| (sys.energies[j] - e_prev).abs());
        if tie && !next.ambiguous.contains(&l) {
            next.ambiguous.push(l);
        }
        taken[j] = true;
        let c = next.continuity.entry(l).or_insert(1.0);
        *c = c.min(score[j]);
        let p = product_index(dims, l).expect("label inside truncation");
        next.labels.insert(l, j);
        next.overlaps.insert(l, sys.vectors[(p, j)].powi(2));
        let mut v = sys.vectors.column(j).into_owned();
        // keep a consistent sign so later dot products stay comparable
        if v.dot(&vecs[&l]) < 0.0 {
            v = -v;
        }
        vecs.insert(l, v);
    }
    Ok(next)
}

/// Labeled spectrum at the device's own coupler flux.
pub fn diagonalize_and_label(device: &DeviceSpec) -> Result<LabeledSpectrum> {
    let mut v = track_labels(device, &[device.coupler_flux()], &TRACKED)?;
    Ok(v.pop().expect("one point requested").0)
}
