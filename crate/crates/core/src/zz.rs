//! Static ZZ rate: exact diagonalization and Rayleigh-Schroedinger perturbation theory.
//!
//! Rates are returned in kHz; expansion coefficients in GHz^-1, GHz^-2, GHz^-3 so that
//! `zeta ~ J12^2 z2 + J12 Jc^2 z3 + Jc^4 z4` with couplings in GHz.

use rayon::prelude::*;
use serde::Serialize;

use crate::composite::{
    assemble_ftf, build_modes, diagonalize, label_by_overlap, label_of_index, Assembled, DeviceSpec, Label,
    LabeledSpectrum, COMPUTATIONAL,
};
use crate::error::{Error, Result};
use crate::linalg::RMat;
use nalgebra::DVector;

pub const GHZ_TO_KHZ: f64 = 1e6;
/// Intermediate states closer than this (GHz) are excluded from the sums and reported.
pub const DEGENERACY_GUARD: f64 = 1e-3;

pub fn zeta_from_energies(e000: f64, e100: f64, e001: f64, e101: f64) -> f64 {
    (e101 - e100 - e001 + e000) * GHZ_TO_KHZ
}

pub fn zeta_from_spectrum(spec: &LabeledSpectrum) -> Result<f64> {
    let e = |l| spec.energy(l);
    Ok(zeta_from_energies(
        e(Label(0, 0, 0))?,
        e(Label(1, 0, 0))?,
        e(Label(0, 0, 1))?,
        e(Label(1, 0, 1))?,
    ))
}

/// Exact ZZ rate in kHz. The computational states stay nearly unhybridized, so their
/// max-overlap labels are unique (overlap > 1/2) and agree with continuity tracking.
pub fn zz_exact(device: &DeviceSpec) -> Result<f64> {
    device.validate()?;
    if device.j_1c == 0.0 && device.j_2c == 0.0 && device.j_12 == 0.0 {
        // product states are exact eigenstates; skip the rounding of the energy sum
        return Ok(0.0);
    }
    let sys = diagonalize(device)?;
    let spec = label_by_overlap(&sys, &COMPUTATIONAL)?;
    for (l, &o) in &spec.overlaps {
        if o <= 0.5 {
            return Err(Error::Labeling(format!("computational state {l} has overlap {o:.3}")));
        }
    }
    zeta_from_spectrum(&spec)
}

/// Exact ZZ over a list of coupler fluxes (units of Phi_0), evaluated in parallel.
pub fn zz_flux_sweep(device: &DeviceSpec, fluxes: &[f64]) -> Result<Vec<f64>> {
    fluxes.par_iter().map(|&f| zz_exact(&device.with_coupler_flux(f))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerateTerm {
    pub state: Label,
    pub intermediate: Label,
    pub detuning_ghz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZetaExpansion {
    pub zeta_exact_khz: f64,
    /// Contributions at orders 2, 3, 4 (kHz); zero above the requested order.
    pub per_order_khz: [f64; 3],
    /// z2 (GHz^-1), z3 (GHz^-2), z4 (GHz^-3).
    pub coefficients: [f64; 3],
    pub degenerate: Vec<DegenerateTerm>,
}

impl ZetaExpansion {
    pub fn perturbative_total_khz(&self) -> f64 {
        self.per_order_khz.iter().sum()
    }

    /// Value of zeta/Jc^4 at the optimal ratio: z4 - z3^2 / (4 z2).
    pub fn zeta_min_coefficient(&self) -> f64 {
        zeta_min_coefficient(self.coefficients)
    }

    /// Optimal Jc^2 / J12 = -2 z2 / z3 (GHz).
    pub fn optimal_ratio(&self) -> f64 {
        -2.0 * self.coefficients[0] / self.coefficients[1]
    }
}

pub fn zeta_min_coefficient(c: [f64; 3]) -> f64 {
    c[2] - c[1] * c[1] / (4.0 * c[0])
}

/// Unperturbed problem: product energies and the coupling matrix.
pub struct Unperturbed<'a> {
    pub bare: &'a [f64],
    pub v: &'a RMat,
    pub dims: [usize; 3],
}

fn inverse_detunings(bare: &[f64], n: usize, deg: &mut Vec<(usize, f64)>) -> Vec<f64> {
    bare.iter()
        .enumerate()
        .map(|(k, &ek)| {
            let d = bare[n] - ek;
            if k == n {
                0.0
            } else if d.abs() < DEGENERACY_GUARD {
                deg.push((k, d));
                0.0
            } else {
                1.0 / d
            }
        })
        .collect()
}

/// Second-, third- and fourth-order shifts of state `n`, accumulated through the
/// first- and second-order wavefunction corrections. Assumes `V_nn = 0`.
pub fn rs_shifts(p: &Unperturbed, n: usize) -> ([f64; 3], Vec<(usize, f64)>) {
    let mut deg = Vec::new();
    let inv = DVector::from_vec(inverse_detunings(p.bare, n, &mut deg));
    let a = p.v.column(n).component_mul(&inv);
    let e2 = p.v.column(n).dot(&a);
    let va = p.v * &a;
    let e3 = a.dot(&va);
    let b = va.component_mul(&inv);
    let e4 = a.dot(&(p.v * &b)) - e2 * a.norm_squared();
    ([e2, e3, e4], deg)
}

/// Same sums as `rs_shifts`, written as explicit nested loops over intermediate states.
pub fn rs_shifts_loops(p: &Unperturbed, n: usize) -> [f64; 3] {
    let mut deg = Vec::new();
    let inv = inverse_detunings(p.bare, n, &mut deg);
    let v = p.v;
    let dim = p.bare.len();
    let (mut e2, mut e3, mut e4a, mut norm) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..dim {
        let vnk = v[(n, k)];
        if vnk == 0.0 || inv[k] == 0.0 {
            continue;
        }
        e2 += vnk * vnk * inv[k];
        norm += vnk * vnk * inv[k] * inv[k];
        for l in 0..dim {
            let vkl = v[(k, l)];
            if vkl == 0.0 || inv[l] == 0.0 {
                continue;
            }
            e3 += vnk * vkl * v[(l, n)] * inv[k] * inv[l];
            for m in 0..dim {
                let vlm = v[(l, m)];
                if vlm == 0.0 || inv[m] == 0.0 {
                    continue;
                }
                e4a += vnk * vkl * vlm * v[(m, n)] * inv[k] * inv[l] * inv[m];
            }
        }
    }
    [e2, e3, e4a - e2 * norm]
}

/// Per-order ZZ (GHz) for a coupling matrix, plus near-degenerate terms.
pub fn zeta_orders(p: &Unperturbed) -> ([f64; 3], Vec<DegenerateTerm>) {
    let signs = [1.0, -1.0, -1.0, 1.0];
    let mut total = [0.0; 3];
    let mut degenerate = Vec::new();
    for (l, s) in COMPUTATIONAL.iter().zip(signs) {
        let n = crate::composite::product_index(p.dims, *l).expect("computational state in truncation");
        let (sh, deg) = rs_shifts(p, n);
        for o in 0..3 {
            total[o] += s * sh[o];
        }
        degenerate.extend(deg.into_iter().map(|(k, d)| DegenerateTerm {
            state: *l,
            intermediate: label_of_index(p.dims, k),
            detuning_ghz: d,
        }));
    }
    (total, degenerate)
}

fn coefficients_from(asm: &Assembled) -> [f64; 3] {
    let [v1c, v2c, v12] = asm.unit_couplings();
    let order = |v: &RMat, o: usize| {
        let p = Unperturbed { bare: &asm.bare, v, dims: asm.dims };
        zeta_orders(&p).0[o]
    };
    [order(&v12, 0), order(&(&v1c + &v2c + &v12), 1), order(&(v1c + v2c), 2)]
}

/// Coefficients (z2, z3, z4), each an exact monomial coefficient in the couplings:
/// z2 from order 2 at (J1c, J2c, J12) = (0, 0, 1), z3 from order 3 at (1, 1, 1),
/// z4 from order 4 at (1, 1, 0).
pub fn fit_zeta_coefficients(device: &DeviceSpec) -> Result<[f64; 3]> {
    let asm = assemble_ftf(&device.uncoupled())?;
    Ok(coefficients_from(&asm))
}

pub fn zz_perturbative(device: &DeviceSpec, max_order: usize) -> Result<ZetaExpansion> {
    if !(2..=4).contains(&max_order) {
        return Err(Error::invalid("max_order", "must be 2, 3 or 4"));
    }
    let asm = assemble_ftf(device)?;
    let [v1c, v2c, v12] = asm.unit_couplings();
    let v = v1c * device.j_1c + v2c * device.j_2c + v12 * device.j_12;
    let p = Unperturbed { bare: &asm.bare, v: &v, dims: asm.dims };
    let (orders, degenerate) = zeta_orders(&p);
    let mut per_order_khz = [0.0; 3];
    for o in 0..=(max_order - 2) {
        per_order_khz[o] = orders[o] * GHZ_TO_KHZ;
    }
    Ok(ZetaExpansion {
        zeta_exact_khz: zz_exact(device)?,
        per_order_khz,
        coefficients: coefficients_from(&asm),
        degenerate,
    })
}

/// Perturbative ZZ (kHz) through 4th order only, without the exact diagonalization.
pub fn zz_fourth_order(device: &DeviceSpec) -> Result<f64> {
    let asm = assemble_ftf(device)?;
    let [v1c, v2c, v12] = asm.unit_couplings();
    let v = v1c * device.j_1c + v2c * device.j_2c + v12 * device.j_12;
    let p = Unperturbed { bare: &asm.bare, v: &v, dims: asm.dims };
    Ok(zeta_orders(&p).0.iter().sum::<f64>() * GHZ_TO_KHZ)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZzLandscape {
    pub j_c: Vec<f64>,
    pub j_12: Vec<f64>,
    /// zeta[i][j] at (j_c[i], j_12[j]) in kHz.
    pub zeta_khz: Vec<Vec<f64>>,
    /// Grid argmin of |zeta| per j_c column.
    pub min_j12: Vec<f64>,
    pub min_zeta_khz: Vec<f64>,
    /// J12 on the perturbative optimum parabola -Jc^2 z3 / (2 z2).
    pub parabola_j12: Vec<f64>,
}

/// Exact ZZ over a (Jc, J12) grid with J1c = J2c = Jc.
pub fn zz_landscape(device: &DeviceSpec, j_c: &[f64], j_12: &[f64]) -> Result<ZzLandscape> {
    let modes = build_modes(device)?;
    let cells: Vec<(usize, usize)> = (0..j_c.len()).flat_map(|i| (0..j_12.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let asm = crate::composite::assemble_from_modes(&modes, j_c[i], j_c[i], j_12[j])?;
            zeta_of_assembled(asm)
        })
        .collect::<Result<_>>()?;
    let mut zeta = vec![vec![0.0; j_12.len()]; j_c.len()];
    for (&(i, j), z) in cells.iter().zip(values) {
        zeta[i][j] = z;
    }
    let coeffs = coefficients_from(&crate::composite::assemble_from_modes(&modes, 0.0, 0.0, 0.0)?);
    let (mut min_j12, mut min_zeta) = (Vec::new(), Vec::new());
    for row in &zeta {
        let (j, z) = row
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(j, z)| (j, *z))
            .unwrap_or((0, f64::NAN));
        min_j12.push(j_12.get(j).copied().unwrap_or(f64::NAN));
        min_zeta.push(z);
    }
    Ok(ZzLandscape {
        j_c: j_c.to_vec(),
        j_12: j_12.to_vec(),
        zeta_khz: zeta,
        min_j12,
        min_zeta_khz: min_zeta,
        parabola_j12: j_c.iter().map(|jc| -jc * jc * coeffs[1] / (2.0 * coeffs[0])).collect(),
    })
}

fn zeta_of_assembled(asm: Assembled) -> Result<f64> {
    let (energies, vectors) = crate::linalg::eigh_real(asm.h.clone());
    let sys = crate::composite::Eigensystem { assembled: asm, energies, vectors };
    let spec = label_by_overlap(&sys, &COMPUTATIONAL)?;
    zeta_from_spectrum(&spec)
}

/// |zeta| minimized over J12 at fixed Jc by golden-section search on [lo, hi].
pub fn minimize_over_j12(device: &DeviceSpec, j_c: f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let modes = build_modes(device)?;
    let f = |j12: f64| -> Result<f64> {
        let asm = crate::composite::assemble_from_modes(&modes, j_c, j_c, j12)?;
        zeta_of_assembled(asm)
    };
    let (x, _) = crate::optim::golden_min(|x| f(x).map(f64::abs), lo, hi, tol)?;
    Ok((x, f(x)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptotePoint {
    pub scale: f64,
    pub coupler_ghz: f64,
    pub zeta_hz: f64,
}

/// ZZ as the coupler frequency is raised by scaling both junction energies by `k`.
/// The charge cutoff is widened by `k^(1/4)` to keep the coupler converged.
pub fn coupler_asymptote(device: &DeviceSpec, scales: &[f64]) -> Result<Vec<AsymptotePoint>> {
    scales
        .par_iter()
        .map(|&k| {
            let mut d = device.clone();
            d.transmon.e_j1 *= k;
            d.transmon.e_j2 *= k;
            // the charge-basis width grows as (E_J / E_C)^(1/4)
            let widen = k.max(1.0).powf(0.25);
            d.transmon.charge_cutoff = (d.transmon.charge_cutoff as f64 * widen).ceil() as usize;
            let modes = build_modes(&d)?;
            Ok(AsymptotePoint {
                scale: k,
                coupler_ghz: modes.c.omega01(),
                zeta_hz: zz_exact(&d)? * 1e3,
            })
        })
        .collect()
}
