//! Calibrate the 101 -> 102 CZ on Device A at a coupler flux of 0.575.

use std::time::Instant;

use ftf::config::bundled;
use ftf::pulse::{calibrate_cz, CalibrationOptions, DrivenSystem};
use ftf::Label;

fn main() -> ftf::Result<()> {
    let device = bundled("device_a")?.with_coupler_flux(0.575);
    let t0 = Instant::now();
    let sys = DrivenSystem::for_transition(&device, Label(1, 0, 1), Label(1, 0, 2), 3.0)?.0;
    let from = Label(1, 0, 1);
    let to = Label(1, 0, 2);
    println!("{} dressed states, f({from} -> {to}) = {:.5} GHz", sys.dim(), sys.frequency(from, to)?);
    let cal = calibrate_cz(&sys, from, to, &CalibrationOptions::default())?;
    for r in &cal.rounds {
        println!(
            "  amp {:.6} GHz  f {:.6} GHz  deficit {:.2e}  phi {:.5}",
            r.amplitude, r.frequency, r.return_deficit, r.conditional_phase
        );
    }
    println!("leakage {:.2e}, phi - pi = {:.2e} rad", cal.leakage, cal.conditional_phase_error);
    println!("coherent fidelity {:.6}, CZ^2 phase {:.2e}", cal.coherent_fidelity, cal.cz_squared_phase);
    println!("virtual Z {:?}, step change {:.1e}", cal.virtual_z, cal.step_change);
    println!("{} search propagations", cal.evaluations);
    println!("elapsed {:.1} s", t0.elapsed().as_secs_f64());
    Ok(())
}
