//! The strongest attack scenario with the capacitor killer and with one and
//! two XOR rounds.

use kljn_sim::harness::{reproduce_defenses, CampaignOptions};

fn main() -> kljn_sim::Result<()> {
    env_logger::init();
    let report = reproduce_defenses(&CampaignOptions::default())?;
    print!("{}", report.format_report());
    Ok(())
}
