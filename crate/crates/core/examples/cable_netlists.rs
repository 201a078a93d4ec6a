//! Build the three cable netlists (lumped, ladder, ladder with the capacitor
//! killer) for a 1000 m RG58 line and print their key numbers.

use kljn_sim::cable::{self, CableModel, CableSpec, TapEnd};

fn main() -> kljn_sim::Result<()> {
    let spec = CableSpec::rg58(1000.0);
    println!("Z0 = {:.1} ohm, C = {:.0} nF", spec.characteristic_impedance(), spec.total_capacitance() * 1e9);
    println!(
        "corner frequency with 1k/9k: {:.0} Hz",
        cable::cutoff_frequency(1e3, 9e3, spec.total_capacitance())?
    );
    for b in [250.0, 25e3, 250e3] {
        println!("gamma at {b:>8} Hz: {}", cable::wavelength_ratio(&spec, b)?);
    }

    let lumped = cable::build(CableModel::Lumped, 1e3, 9e3, &spec)?;
    println!("\n* lumped model\n{}", lumped.to_text());

    let ladder = cable::build(CableModel::Distributed, 1e3, 9e3, &spec)?;
    println!(
        "ladder: {} nodes, {} R, {} L, {} C, total C = {:.1} nF",
        ladder.node_count(),
        ladder.count('R'),
        ladder.count('L'),
        ladder.count('C'),
        ladder.total('C') * 1e9
    );

    let killed = cable::apply_capacitor_killer(&lumped, TapEnd::Alice)?;
    println!("\n* lumped model with the shield driven from Alice's end\n{}", killed.to_text());
    Ok(())
}
