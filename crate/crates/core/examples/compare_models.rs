//! Lumped versus 100-section ladder model of a 1000 m cable at three noise
//! bandwidths, plus a ladder refinement check at the widest one.
//!
//! cargo run --release --example compare_models [out_dir]

use std::fs::File;
use std::path::PathBuf;

use kljn_sim::cable::CableSpec;
use kljn_sim::compare::{compare_sweep, refinement_nrmsd, COMPARISON_BANDWIDTHS_HZ};

fn main() -> kljn_sim::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let cable = CableSpec::rg58(1000.0);
    for r in compare_sweep(&cable, 1e3, 9e3, &COMPARISON_BANDWIDTHS_HZ, 100.0, 1)? {
        println!("gamma {:>6.1}: nrmsd {:.2e} -> {:?}", r.gamma, r.nrmsd, r.verdict);
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            r.write_csv(File::create(dir.join(format!("gamma_{}.csv", r.gamma)))?)?;
        }
    }
    let b = COMPARISON_BANDWIDTHS_HZ[1];
    println!(
        "ladder 100 vs 200 sections at {b} Hz: nrmsd {:.2e}",
        refinement_nrmsd(&cable, 1e3, 9e3, b, 100.0 / b, 1)?
    );
    Ok(())
}
