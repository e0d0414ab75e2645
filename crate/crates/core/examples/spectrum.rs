//! Lowest dressed levels of both bundled devices, with product-state labels.

use ftf::composite::diagonalize_and_label;
use ftf::config::{bundled, BUNDLED};
use ftf::qubit::build_fluxonium_mode;

fn main() -> ftf::Result<()> {
    for name in BUNDLED {
        let d = bundled(name)?;
        let f1 = build_fluxonium_mode(&d.fluxonium1, 2)?.omega01();
        let f2 = build_fluxonium_mode(&d.fluxonium2, 2)?.omega01();
        println!("{name}: omega01 = {f1:.4}, {f2:.4} GHz, {} product states", d.dim());
        let spec = diagonalize_and_label(&d)?;
        let mut levels: Vec<_> = spec.labels.iter().map(|(l, &i)| (spec.energies[i], *l)).collect();
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (e, l) in levels.iter().take(10) {
            println!("  {l}  {:9.5} GHz  overlap {:.4}", e - levels[0].0, spec.overlaps[l]);
        }
    }
    Ok(())
}
