//! Run a scenario described by a JSON file.
//!
//! cargo run --release --example run_config -- crates/core/examples/configs/short_random.json

use kljn_sim::harness::{run_scenario, ScenarioConfig};

fn main() -> kljn_sim::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/short_random.json").into());
    let config = ScenarioConfig::from_file(path.as_ref())?;
    let r = run_scenario(&config)?;
    println!("{}", r.to_json());
    Ok(())
}
