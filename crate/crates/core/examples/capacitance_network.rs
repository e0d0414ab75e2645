//! Couplings from a capacitance network, and how little the ratio moves with C_c.

use ftf::capnet::{cc_insensitivity_scan, ratio_leading_order, CapacitanceNetwork};

fn main() -> ftf::Result<()> {
    let net = CapacitanceNetwork::grounded(45.0, 11.0, 2.8, 8.49);
    let k = net.couplings()?;
    println!("J1c {:.4}  J2c {:.4}  J12 {:.5} GHz", k.j_1c, k.j_2c, k.j_12);
    println!("Jc^2/J12 exact {:.4}, leading order {:.4} GHz", k.ratio, ratio_leading_order(&net));

    let diff = CapacitanceNetwork::differential(45.0, 10.0, 11.0, 2.8, 8.49);
    let grid: Vec<f64> = (0..=8).map(|k| 4.0 + k as f64).collect();
    let scan = cc_insensitivity_scan(&diff, &grid)?;
    for (c, r) in scan.c_c.iter().zip(&scan.ratio) {
        println!("C_c {c:4.1} fF  ratio {r:.4} GHz");
    }
    println!("ratio variation {:.2}%, Jc variation {:.1}%", 100.0 * scan.ratio_variation, 100.0 * scan.j_c_variation);
    Ok(())
}
