//! Run the six-scenario attack campaign and print the success-rate table.
//!
//! cargo run --release --example table1 -- [master_seed] [n_bits]

use kljn_sim::harness::{reproduce_table1, CampaignOptions};

fn main() -> kljn_sim::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let master_seed = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let n_bits = args.next().map_or(1000, |s| s.parse().expect("n_bits must be an integer"));

    let started = std::time::Instant::now();
    let table = reproduce_table1(&CampaignOptions { master_seed, n_bits, ..CampaignOptions::default() })?;
    print!("{}", table.format_table());
    for c in &table.cells {
        println!(
            "  {:>3} units, {:>6} m: legit error {:.3}%, {:.1} s, {} steps",
            c.bep_units,
            c.length_m,
            100.0 * c.result.legit_error_rate,
            c.result.wall_clock_s,
            c.result.diagnostics.steps
        );
    }
    println!("total {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}
