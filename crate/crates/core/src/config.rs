//! Device configuration files (TOML) and the bundled device descriptions.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composite::DeviceSpec;
use crate::error::{Error, Result};
use crate::qubit::{FluxoniumParams, TransmonParams};

const DEVICE_A: &str = include_str!("../configs/device_a.toml");
const DEVICE_B: &str = include_str!("../configs/device_b.toml");

pub const BUNDLED: [&str; 2] = ["device_a", "device_b"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxoniumSection {
    pub e_c: f64,
    pub e_l: f64,
    pub e_j: f64,
    /// Phi_ext / Phi_0.
    pub flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonSection {
    pub e_c: f64,
    pub e_j1: f64,
    pub e_j2: f64,
    pub flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub j_1c: f64,
    pub j_2c: f64,
    pub j_12: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub levels: [usize; 3],
    #[serde(default = "default_basis")]
    pub fluxonium_basis: usize,
    #[serde(default = "default_cutoff")]
    pub charge_cutoff: usize,
}

fn default_basis() -> usize {
    120
}
fn default_cutoff() -> usize {
    30
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { levels: [8, 6, 8], fluxonium_basis: 120, charge_cutoff: 30 }
    }
}

/// Descriptive values that do not enter the Hamiltonian.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub n_jj: Option<Vec<u32>>,
    pub omega01_ghz: Option<Vec<f64>>,
    pub readout_ghz: Option<Vec<f64>>,
    pub t1_us: Option<Vec<f64>>,
    pub t2r_us: Option<Vec<f64>>,
    pub t2e_us: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfigFile {
    #[serde(default)]
    pub name: Option<String>,
    pub fluxonium1: FluxoniumSection,
    pub fluxonium2: FluxoniumSection,
    pub transmon: TransmonSection,
    pub couplings: CouplingSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub metadata: Option<Metadata>,
}

impl DeviceConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_device(&self) -> Result<DeviceSpec> {
        let t = &self.truncation;
        let flux = |s: &FluxoniumSection| FluxoniumParams {
            e_c: s.e_c,
            e_l: s.e_l,
            e_j: s.e_j,
            phi_ext: s.flux * TAU,
            basis_size: t.fluxonium_basis,
        };
        let d = DeviceSpec {
            fluxonium1: flux(&self.fluxonium1),
            fluxonium2: flux(&self.fluxonium2),
            transmon: TransmonParams {
                e_c: self.transmon.e_c,
                e_j1: self.transmon.e_j1,
                e_j2: self.transmon.e_j2,
                phi_ext: self.transmon.flux * TAU,
                charge_cutoff: t.charge_cutoff,
            },
            j_1c: self.couplings.j_1c,
            j_2c: self.couplings.j_2c,
            j_12: self.couplings.j_12,
            levels: t.levels,
        };
        d.validate()?;
        Ok(d)
    }

    /// Config describing `d`. Fails when the two fluxonia use different basis sizes,
    /// which the file format cannot express.
    pub fn from_device(d: &DeviceSpec) -> Result<Self> {
        if d.fluxonium1.basis_size != d.fluxonium2.basis_size {
            return Err(Error::Config("fluxonium basis sizes differ".into()));
        }
        let flux = |p: &FluxoniumParams| FluxoniumSection { e_c: p.e_c, e_l: p.e_l, e_j: p.e_j, flux: p.phi_ext / TAU };
        Ok(DeviceConfigFile {
            name: None,
            fluxonium1: flux(&d.fluxonium1),
            fluxonium2: flux(&d.fluxonium2),
            transmon: TransmonSection {
                e_c: d.transmon.e_c,
                e_j1: d.transmon.e_j1,
                e_j2: d.transmon.e_j2,
                flux: d.transmon.phi_ext / TAU,
            },
            couplings: CouplingSection { j_1c: d.j_1c, j_2c: d.j_2c, j_12: d.j_12 },
            truncation: TruncationSection {
                levels: d.levels,
                fluxonium_basis: d.fluxonium1.basis_size,
                charge_cutoff: d.transmon.charge_cutoff,
            },
            metadata: None,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn parse_device_config(path: &Path) -> Result<DeviceSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    DeviceConfigFile::parse(&text)?.to_device()
}

pub fn bundled_text(name: &str) -> Option<&'static str> {
    match name {
        "device_a" => Some(DEVICE_A),
        "device_b" => Some(DEVICE_B),
        _ => None,
    }
}

pub fn bundled(name: &str) -> Result<DeviceSpec> {
    let text = bundled_text(name).ok_or_else(|| Error::Config(format!("no bundled config `{name}`")))?;
    DeviceConfigFile::parse(text)?.to_device()
}

/// A bundled name or a path to a TOML file.
pub fn load_device(name_or_path: &str) -> Result<(DeviceSpec, String)> {
    let d = match bundled_text(name_or_path) {
        Some(_) => bundled(name_or_path)?,
        None => parse_device_config(Path::new(name_or_path))?,
    };
    let h = config_hash(&d)?;
    Ok((d, h))
}

/// SHA-256 of the canonical serialization of the device, hex encoded.
pub fn config_hash(d: &DeviceSpec) -> Result<String> {
    let text = DeviceConfigFile::from_device(d)?.to_toml()?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
