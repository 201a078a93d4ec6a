//! XOR privacy amplification of a leaky key: measured agreement per round
//! next to the independent-bit prediction p^2 + (1 - p)^2.

use kljn_sim::harness::{run_scenario, Defense, ScenarioConfig};
use kljn_sim::privacy::predicted_leak_after_xor;

fn main() -> kljn_sim::Result<()> {
    let config = ScenarioConfig {
        n_bits: 400,
        defense: Defense::XorRounds { rounds: 2 },
        ..ScenarioConfig::campaign_cell(100, 1000.0, 11)
    };
    let r = run_scenario(&config)?;
    println!("round  bits  p_E (%)  predicted (%)");
    for a in &r.amplification {
        let pred = a.predicted.map_or("-".into(), |p| format!("{:.1}", 100.0 * p));
        println!("{:>5} {:>5} {:>8.1} {:>14}", a.round, a.n_bits, 100.0 * a.p_e, pred);
    }

    let mut p = r.p_e;
    print!("\nprediction chain from {:.1}%:", 100.0 * p);
    for _ in 0..4 {
        p = predicted_leak_after_xor(p)?;
        print!(" {:.1}%", 100.0 * p);
    }
    println!();
    Ok(())
}
