//! Static ZZ on Device A: flux sweep, perturbative orders, and the high-frequency coupler limit.

use ftf::config::bundled;
use ftf::zz::{coupler_asymptote, zz_flux_sweep, zz_perturbative};

fn main() -> ftf::Result<()> {
    let d = bundled("device_a")?;

    let fluxes: Vec<f64> = (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect();
    for (f, z) in fluxes.iter().zip(zz_flux_sweep(&d, &fluxes)?) {
        println!("Phi_c = {f:.2}  zeta = {z:8.4} kHz");
    }

    let pt = zz_perturbative(&d, 4)?;
    println!("exact {:.4} kHz, orders {:?} kHz", pt.zeta_exact_khz, pt.per_order_khz);
    println!("z2 {:.3e}  z3 {:.3e}  z4 {:.3e}", pt.coefficients[0], pt.coefficients[1], pt.coefficients[2]);
    println!("optimal Jc^2/J12 = {:.3} GHz", pt.optimal_ratio());

    for p in coupler_asymptote(&d, &[1.0, 4.0, 16.0, 64.0])? {
        println!("coupler {:6.1} GHz  |zeta| {:9.2} Hz", p.coupler_ghz, p.zeta_hz.abs());
    }
    Ok(())
}
