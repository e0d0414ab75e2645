//! Two-qubit RB with depolarizing gates, then interleaved RB of a leaky CZ.

use ftf::rb::{cz_leakage_irb_spec, simulate_irb, simulate_rb, GateNoise, RbSpec};

fn main() -> ftf::Result<()> {
    let spec = RbSpec {
        gate_noise: Some(GateNoise { single: 0.999, cz: 0.99 }),
        ..RbSpec::new(2, vec![1, 2, 4, 8, 12, 16], 10, 1)
    };
    let r = simulate_rb(&spec)?;
    for (m, s) in r.lengths.iter().zip(&r.survival) {
        println!("m = {m:3}  survival {s:.4}");
    }
    println!("p = {:.5}, F_clifford = {:.5}, {:.3} gates per Clifford", r.fit.p, r.f_clifford, r.gates_per_clifford);

    let irb = simulate_irb(&cz_leakage_irb_spec(0.0085, 0.99, 20, 7))?;
    println!("leakage-aware F_CZ = {:.5} +- {:.1e}", irb.f_gate, irb.f_gate_err);
    println!("plain interleaved  = {:.5}", irb.f_gate_plain);
    Ok(())
}
