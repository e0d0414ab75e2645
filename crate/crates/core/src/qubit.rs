//! Single-mode quantization of the fluxonium qubits and the tunable transmon coupler.
//!
//! Both builders return eigenstates in a time-reversal-real phase convention: the
//! wavefunctions are real in the phase representation, which makes every charge
//! matrix `i` times a real antisymmetric matrix. The composite Hamiltonian built
//! from these modes is then real symmetric.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh_complex, eigh_real, CMat, RMat};

/// Largest upward shift tolerated in a kept level when the basis is enlarged.
pub const CONVERGENCE_TOL_GHZ: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxoniumParams {
    pub e_c: f64,
    pub e_l: f64,
    pub e_j: f64,
    /// External phase 2*pi*Phi_ext/Phi_0 in radians.
    pub phi_ext: f64,
    pub basis_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub e_c: f64,
    pub e_j1: f64,
    pub e_j2: f64,
    pub phi_ext: f64,
    /// Charge basis spans -N..=N.
    pub charge_cutoff: usize,
}

/// Eigenenergies (ground pinned to zero) and operator matrices in the mode eigenbasis.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub energies: Vec<f64>,
    pub n_matrix: CMat,
    /// Phase operator; `None` for the transmon, whose phase is compact.
    pub phi_matrix: Option<CMat>,
    pub levels_kept: usize,
}

impl FluxoniumParams {
    pub fn new(e_c: f64, e_l: f64, e_j: f64, phi_ext: f64) -> Self {
        FluxoniumParams { e_c, e_l, e_j, phi_ext, basis_size: 120 }
    }

    pub fn validate(&self) -> Result<()> {
        positive("e_c", self.e_c)?;
        positive("e_l", self.e_l)?;
        if !(self.e_j >= 0.0) || !self.e_j.is_finite() {
            return Err(Error::invalid("e_j", "must be >= 0"));
        }
        if !self.phi_ext.is_finite() {
            return Err(Error::invalid("phi_ext", "must be finite"));
        }
        if self.basis_size < 20 {
            return Err(Error::invalid("basis_size", "must be >= 20"));
        }
        Ok(())
    }

    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }

    fn phi_osc(&self) -> f64 {
        (8.0 * self.e_c / self.e_l).powf(0.25)
    }
}

impl TransmonParams {
    pub fn new(e_c: f64, e_j1: f64, e_j2: f64, phi_ext: f64) -> Self {
        TransmonParams { e_c, e_j1, e_j2, phi_ext, charge_cutoff: 30 }
    }

    pub fn validate(&self) -> Result<()> {
        positive("e_c", self.e_c)?;
        for (k, v) in [("e_j1", self.e_j1), ("e_j2", self.e_j2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(k, "must be >= 0"));
            }
        }
        if !self.phi_ext.is_finite() {
            return Err(Error::invalid("phi_ext", "must be finite"));
        }
        if self.charge_cutoff < 15 {
            return Err(Error::invalid("charge_cutoff", "must be >= 15"));
        }
        Ok(())
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, "must be > 0"))
    }
}

impl ModeSpectrum {
    pub fn omega01(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    pub fn charge_element(&self, j: usize, k: usize) -> Result<Complex64> {
        charge_matrix_element(self, j, k)
    }

    /// The real antisymmetric `A` with `n = i A`.
    pub fn charge_imag(&self) -> Result<RMat> {
        let scale = self.n_matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let worst = self.n_matrix.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        if worst > 1e-9 * scale {
            return Err(Error::Labeling(format!(
                "charge matrix has a real part of {worst:.2e}; phase convention broken"
            )));
        }
        Ok(self.n_matrix.map(|z| z.im))
    }
}

/// `<m|D(alpha)|n>` for the displacement operator, by the standard two-term recurrence.
fn displacement(alpha: Complex64, dim: usize) -> CMat {
    let mut d = CMat::zeros(dim, dim);
    d[(0, 0)] = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for m in 0..dim - 1 {
        d[(m + 1, 0)] = alpha / ((m + 1) as f64).sqrt() * d[(m, 0)];
    }
    let ac = alpha.conj();
    for n in 0..dim - 1 {
        let s = ((n + 1) as f64).sqrt();
        for m in 0..dim {
            let up = if m > 0 { (m as f64).sqrt() * d[(m - 1, n)] } else { Complex64::new(0.0, 0.0) };
            d[(m, n + 1)] = (up - ac * d[(m, n)]) / s;
        }
    }
    d
}

/// Fluxonium Hamiltonian in the oscillator basis of its linear (E_C, E_L) part, with
/// the zero-point offset dropped. Real symmetric for every external phase.
pub fn fluxonium_hamiltonian(p: &FluxoniumParams) -> Result<RMat> {
    p.validate()?;
    let dim = p.basis_size;
    let w = p.plasma_frequency();
    let alpha = Complex64::new(0.0, p.phi_osc() / 2f64.sqrt());
    let d = displacement(alpha, dim);
    let ph = Complex64::from_polar(1.0, -p.phi_ext);
    let mut h = RMat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            // cos(phi - phi_ext) = (e^{-i phi_ext} D + e^{i phi_ext} D^dagger) / 2
            let cosv = (ph * d[(r, c)] + ph.conj() * d[(c, r)].conj()) * 0.5;
            h[(r, c)] = -p.e_j * cosv.re;
        }
        h[(r, r)] += w * r as f64;
    }
    Ok(h)
}

fn fluxonium_operators(p: &FluxoniumParams) -> (RMat, RMat) {
    // n = i R with R = (a^dagger - a) / (sqrt 2 phi_osc); phi = phi_osc (a + a^dagger) / sqrt 2
    let dim = p.basis_size;
    let po = p.phi_osc();
    let mut r = RMat::zeros(dim, dim);
    let mut phi = RMat::zeros(dim, dim);
    for m in 0..dim - 1 {
        let s = ((m + 1) as f64).sqrt();
        r[(m + 1, m)] = s / (2f64.sqrt() * po);
        r[(m, m + 1)] = -s / (2f64.sqrt() * po);
        phi[(m + 1, m)] = po * s / 2f64.sqrt();
        phi[(m, m + 1)] = po * s / 2f64.sqrt();
    }
    (r, phi)
}

fn fluxonium_raw(p: &FluxoniumParams, levels_kept: usize) -> Result<ModeSpectrum> {
    let h = fluxonium_hamiltonian(p)?;
    let (e, v) = eigh_real(h);
    let vk = v.columns(0, levels_kept).into_owned();
    let (r, phi) = fluxonium_operators(p);
    let a = vk.transpose() * r * &vk;
    let ph = vk.transpose() * phi * &vk;
    Ok(ModeSpectrum {
        energies: e[..levels_kept].iter().map(|x| x - e[0]).collect(),
        n_matrix: a.map(|x| Complex64::new(0.0, x)),
        phi_matrix: Some(ph.map(|x| Complex64::new(x, 0.0))),
        levels_kept,
    })
}

pub fn build_fluxonium_mode(params: &FluxoniumParams, levels_kept: usize) -> Result<ModeSpectrum> {
    params.validate()?;
    if levels_kept == 0 || levels_kept > params.basis_size / 3 {
        return Err(Error::invalid("levels_kept", "must be in 1..=basis_size/3"));
    }
    let mode = fluxonium_raw(params, levels_kept)?;
    let bigger = FluxoniumParams {
        basis_size: (params.basis_size * 5).div_ceil(4),
        ..*params
    };
    let check = fluxonium_raw(&bigger, levels_kept)?;
    converged(&mode.energies, &check.energies)?;
    Ok(mode)
}

fn converged(a: &[f64], b: &[f64]) -> Result<()> {
    for (level, (x, y)) in a.iter().zip(b).enumerate() {
        let shift = (x - y).abs();
        if shift > CONVERGENCE_TOL_GHZ {
            return Err(Error::NotConverged { level, shift });
        }
    }
    Ok(())
}

/// Two-junction transmon in the charge basis, with both cosine terms kept explicitly.
pub fn transmon_hamiltonian(p: &TransmonParams) -> Result<CMat> {
    p.validate()?;
    let n = p.charge_cutoff as i64;
    let dim = (2 * n + 1) as usize;
    let mut h = CMat::zeros(dim, dim);
    let hop = Complex64::new(-p.e_j1 / 2.0, 0.0) - Complex64::from_polar(p.e_j2 / 2.0, -p.phi_ext);
    for i in 0..dim {
        let q = i as i64 - n;
        h[(i, i)] = Complex64::new(4.0 * p.e_c * (q * q) as f64, 0.0);
        if i + 1 < dim {
            // e^{i phi}|q> = |q+1>
            h[(i + 1, i)] = hop;
            h[(i, i + 1)] = hop.conj();
        }
    }
    Ok(h)
}

fn transmon_raw(p: &TransmonParams, levels_kept: usize) -> Result<ModeSpectrum> {
    let h = transmon_hamiltonian(p)?;
    let dim = h.nrows();
    let (e, mut v) = eigh_complex(h);
    // Fix each eigenvector's phase so that conj(v[-q]) = v[q], i.e. a real wavefunction.
    for c in 0..levels_kept {
        let (imax, _) = (0..dim)
            .map(|i| (i, v[(i, c)].norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let t = v[(dim - 1 - imax, c)].conj() / v[(imax, c)];
        let half = Complex64::from_polar(1.0, t.arg() / 2.0);
        for i in 0..dim {
            v[(i, c)] *= half;
        }
    }
    let vk = v.columns(0, levels_kept).into_owned();
    let q = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex64::new(r as f64 - p.charge_cutoff as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let nm = vk.adjoint() * q * &vk;
    Ok(ModeSpectrum {
        energies: e[..levels_kept].iter().map(|x| x - e[0]).collect(),
        n_matrix: nm,
        phi_matrix: None,
        levels_kept,
    })
}

pub fn build_transmon_mode(params: &TransmonParams, levels_kept: usize) -> Result<ModeSpectrum> {
    params.validate()?;
    if levels_kept == 0 || levels_kept > params.charge_cutoff {
        return Err(Error::invalid("levels_kept", "must be in 1..=charge_cutoff"));
    }
    let mode = transmon_raw(params, levels_kept)?;
    let bigger = TransmonParams {
        charge_cutoff: (params.charge_cutoff * 5).div_ceil(4),
        ..*params
    };
    let check = transmon_raw(&bigger, levels_kept)?;
    converged(&mode.energies, &check.energies)?;
    Ok(mode)
}

/// `<j|n|k>` in the mode eigenbasis.
pub fn charge_matrix_element(mode: &ModeSpectrum, j: usize, k: usize) -> Result<Complex64> {
    let len = mode.levels_kept;
    for index in [j, k] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    Ok(mode.n_matrix[(j, k)])
}
