//! Same noise, same cable, with and without the capacitor killer.

use kljn_sim::cable::TapEnd;
use kljn_sim::harness::{run_scenario, Defense, ScenarioConfig};

fn main() -> kljn_sim::Result<()> {
    let base = ScenarioConfig { n_bits: 300, ..ScenarioConfig::campaign_cell(100, 1000.0, 5) };
    let killed = ScenarioConfig { defense: Defense::CapacitorKiller { tap: TapEnd::Alice }, ..base.clone() };
    for (name, c) in [("grounded shield", &base), ("capacitor killer", &killed)] {
        let r = run_scenario(c)?;
        println!("{name:<17} p_E = {:.1}% +- {:.1}", 100.0 * r.p_e, 100.0 * r.binomial_std);
    }
    Ok(())
}
