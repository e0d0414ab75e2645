//! CZ error budget and the control tolerances for two fidelity targets.

use ftf::budget::{amplitude_tolerance, error_budget, frequency_tolerance, phase_tolerance, ErrorBudgetInput};

fn main() -> ftf::Result<()> {
    for f in [0.999, 0.9999] {
        println!(
            "F = {f}: phase {:.3} deg, amplitude {:.3} deg, frequency {:.1} kHz at 50 ns",
            phase_tolerance(f).to_degrees(),
            amplitude_tolerance(f).to_degrees(),
            frequency_tolerance(f, 50.0) * 1e3
        );
    }
    let b = error_budget(&ErrorBudgetInput {
        t_g_ns: 85.0,
        t1_alpha_us: 10.0,
        t1_us: 100.0,
        t_phi_us: 50.0,
        dphi: 0.01,
        dtheta: 0.01,
        n: 2,
    })?;
    println!("{b:#?}");
    Ok(())
}
