//! Eve's cross-correlation attack on 200 bits over 1000 m with 100-unit
//! periods, printing the first few per-bit statistics.

use kljn_sim::attack::run_attack;
use kljn_sim::harness::{run_scenario_detailed, ScenarioConfig};

fn main() -> kljn_sim::Result<()> {
    let config = ScenarioConfig { n_bits: 200, ..ScenarioConfig::campaign_cell(100, 1000.0, 3) };
    let run = run_scenario_detailed(&config)?;

    // The attack is a pure function of the recorded probes.
    let outcome = run_attack(&run.measurements, config.master_seed)?;
    assert_eq!(outcome, run.outcome);

    let mut csv = Vec::new();
    outcome.write_csv(&mut csv)?;
    for line in String::from_utf8_lossy(&csv).lines().take(11) {
        println!("{line}");
    }
    println!("...\n{}", outcome.summary_json());
    Ok(())
}
