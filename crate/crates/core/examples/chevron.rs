//! Square-pulse chevron around the 101 -> 102 transition.

use ftf::config::bundled;
use ftf::pulse::{chevron_scan, phase_setting, DrivenSystem, PhaseMode, Preparation};
use ftf::Label;

fn main() -> ftf::Result<()> {
    let (from, to) = (Label(1, 0, 1), Label(1, 0, 2));
    let device = bundled("device_a")?.with_coupler_flux(0.575);
    let (sys, f0) = DrivenSystem::for_transition(&device, from, to, 2.0)?;
    let (i, f) = (sys.index(from)?, sys.index(to)?);
    let drives = phase_setting(&sys, PhaseMode::Constructive, f0, i, f);
    // 10 MHz Rabi rate on resonance
    let amp = 0.010 / sys.drive_element(&drives, f, i).norm();
    let freqs: Vec<f64> = (-4..=4).map(|k| f0 + 0.005 * k as f64).collect();
    let times: Vec<f64> = (0..=8).map(|k| 12.5 * k as f64).collect();
    let c = chevron_scan(&sys, &drives, amp, &freqs, &times, &Preparation::pure(from), 64.0)?;
    print!("{:>9}", "MHz \\ ns");
    for t in &c.durations {
        print!("{t:7.1}");
    }
    println!();
    for (fr, row) in c.frequencies.iter().zip(&c.p_leave) {
        print!("{:9.1}", (fr - f0) * 1e3);
        for p in row {
            print!("{p:7.3}");
        }
        println!();
    }
    Ok(())
}
