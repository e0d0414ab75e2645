//! Lumped capacitance networks and the coupling strengths they imply.
//!
//! Capacitances are in fF and couplings in GHz. Differential qubits are reduced to
//! their difference coordinate through the sum/difference transform.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::RMat;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;

/// 4 e^2 / h for a capacitance of 1 fF, in GHz.
pub fn four_e2_over_h_ghz_ff() -> f64 {
    4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / PLANCK / 1e-15 / 1e9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Topology {
    Grounded { c_t: f64 },
    Differential { c_t1: f64, c_t2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacitanceNetwork {
    pub topology: Topology,
    pub c_f1: f64,
    pub c_f2: f64,
    pub c_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Couplings {
    pub j_1c: f64,
    pub j_2c: f64,
    pub j_12: f64,
    /// Jc^2 / J12 from the exact inverse (GHz).
    pub ratio: f64,
    /// Largest |C~^-1| entry between a sum coordinate and a retained node, relative to
    /// the largest retained diagonal entry.
    pub sum_mode_coupling: f64,
}

impl CapacitanceNetwork {
    pub fn grounded(c_t: f64, c_f1: f64, c_f2: f64, c_c: f64) -> Self {
        CapacitanceNetwork { topology: Topology::Grounded { c_t }, c_f1, c_f2, c_c }
    }

    pub fn differential(c_t1: f64, c_t2: f64, c_f1: f64, c_f2: f64, c_c: f64) -> Self {
        CapacitanceNetwork { topology: Topology::Differential { c_t1, c_t2 }, c_f1, c_f2, c_c }
    }

    pub fn validate(&self) -> Result<()> {
        let mut vals = vec![("c_f1", self.c_f1), ("c_f2", self.c_f2), ("c_c", self.c_c)];
        match self.topology {
            Topology::Grounded { c_t } => vals.push(("c_t", c_t)),
            Topology::Differential { c_t1, c_t2 } => {
                vals.push(("c_t1", c_t1));
                vals.push(("c_t2", c_t2));
            }
        }
        for (k, v) in vals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(k, "capacitance must be > 0"));
            }
        }
        Ok(())
    }

    /// Node capacitance matrix (fF).
    pub fn matrix(&self) -> RMat {
        let (cf, f2, cc) = (self.c_f1 + self.c_f2, self.c_f2, self.c_c);
        match self.topology {
            Topology::Grounded { c_t } => RMat::from_row_slice(
                5,
                5,
                &[
                    cf, -f2, 0.0, 0.0, 0.0, //
                    -f2, cf + cc, -cc, 0.0, 0.0, //
                    0.0, -cc, c_t + 2.0 * cc, 0.0, -cc, //
                    0.0, 0.0, 0.0, cf, -f2, //
                    0.0, 0.0, -cc, -f2, cf + cc,
                ],
            ),
            Topology::Differential { c_t1, c_t2 } => {
                let ct = c_t1 + c_t2;
                RMat::from_row_slice(
                    6,
                    6,
                    &[
                        cf, -f2, 0.0, 0.0, 0.0, 0.0, //
                        -f2, cf + cc, -cc, 0.0, 0.0, 0.0, //
                        0.0, -cc, ct + cc, -c_t2, 0.0, 0.0, //
                        0.0, 0.0, -c_t2, ct + cc, 0.0, -cc, //
                        0.0, 0.0, 0.0, 0.0, cf, -f2, //
                        0.0, 0.0, 0.0, -cc, -f2, cf + cc,
                    ],
                )
            }
        }
    }

    /// Sum/difference transform: each differential element maps (a, b) to (a + b, a - b).
    pub fn transform(&self) -> RMat {
        let pairs: &[usize] = match self.topology {
            Topology::Grounded { .. } => &[0, 3],
            Topology::Differential { .. } => &[0, 2, 4],
        };
        let n = self.matrix().nrows();
        let mut m = RMat::identity(n, n);
        for &p in pairs {
            m[(p, p)] = 1.0;
            m[(p, p + 1)] = 1.0;
            m[(p + 1, p)] = 1.0;
            m[(p + 1, p + 1)] = -1.0;
        }
        m
    }

    /// Retained qubit nodes (fluxonium 1, coupler, fluxonium 2) after the transform.
    pub fn qubit_nodes(&self) -> [usize; 3] {
        match self.topology {
            Topology::Grounded { .. } => [1, 2, 4],
            Topology::Differential { .. } => [1, 3, 5],
        }
    }

    fn sum_nodes(&self) -> &'static [usize] {
        match self.topology {
            Topology::Grounded { .. } => &[0, 3],
            Topology::Differential { .. } => &[0, 2, 4],
        }
    }

    /// C~ = (M^T)^-1 C M^-1.
    pub fn transformed(&self) -> Result<RMat> {
        self.validate()?;
        let mi = self
            .transform()
            .try_inverse()
            .ok_or_else(|| Error::Singular("transform matrix".into()))?;
        Ok(mi.transpose() * self.matrix() * mi)
    }

    pub fn couplings(&self) -> Result<Couplings> {
        let ct = self.transformed()?;
        let inv = ct
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("transformed capacitance matrix is not positive definite".into()))?
            .inverse();
        let k = four_e2_over_h_ghz_ff();
        let [a, c, b] = self.qubit_nodes();
        let scale = [a, c, b].iter().map(|&i| inv[(i, i)].abs()).fold(0.0, f64::max);
        let mut leak: f64 = 0.0;
        for &s in self.sum_nodes() {
            for q in [a, c, b] {
                leak = leak.max(inv[(s, q)].abs() / scale);
            }
        }
        Ok(Couplings {
            j_1c: k * inv[(a, c)],
            j_2c: k * inv[(c, b)],
            j_12: k * inv[(a, b)],
            ratio: k * inv[(a, c)].powi(2) / inv[(a, b)],
            sum_mode_coupling: leak,
        })
    }

    pub fn exact_ratio(&self) -> Result<f64> {
        Ok(self.couplings()?.ratio)
    }
}

/// 4e^2/(h C_t) for a grounded coupler, 4e^2/(h C_t2) for a differential one (GHz).
pub fn ratio_leading_order(net: &CapacitanceNetwork) -> f64 {
    let c = match net.topology {
        Topology::Grounded { c_t } => c_t,
        Topology::Differential { c_t2, .. } => c_t2,
    };
    four_e2_over_h_ghz_ff() / c
}

#[derive(Debug, Clone, Serialize)]
pub struct CcScan {
    pub c_c: Vec<f64>,
    pub ratio: Vec<f64>,
    pub j_c: Vec<f64>,
    /// (max - min) / mean over the grid.
    pub ratio_variation: f64,
    pub j_c_variation: f64,
}

/// Exact ratio across a grid of coupling capacitances. `j_c` is the mean of |J1c| and |J2c|.
pub fn cc_insensitivity_scan(net: &CapacitanceNetwork, c_c: &[f64]) -> Result<CcScan> {
    let mut ratio = Vec::with_capacity(c_c.len());
    let mut j_c = Vec::with_capacity(c_c.len());
    for &c in c_c {
        let k = CapacitanceNetwork { c_c: c, ..*net }.couplings()?;
        ratio.push(k.ratio);
        j_c.push(0.5 * (k.j_1c.abs() + k.j_2c.abs()));
    }
    Ok(CcScan {
        c_c: c_c.to_vec(),
        ratio_variation: spread(&ratio),
        j_c_variation: spread(&j_c),
        ratio,
        j_c,
    })
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}
