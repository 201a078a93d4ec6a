use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use super::ScenarioRun;
use crate::error::Result;
use crate::protocol::write_jsonl;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest<'a> {
    generator: &'a str,
    version: &'a str,
    label: &'a str,
    master_seed: u64,
    files: Vec<String>,
}

/// Write `summary.json`, `bits.csv`, `bep.jsonl`, optional dumps and a
/// manifest listing them into `dir`.
pub fn write_scenario(dir: &Path, run: &ScenarioRun) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    fs::write(dir.join("summary.json"), run.result.to_json())?;
    files.push("summary.json".to_string());

    run.outcome.write_csv(BufWriter::new(File::create(dir.join("bits.csv"))?))?;
    files.push("bits.csv".to_string());

    write_jsonl(BufWriter::new(File::create(dir.join("bep.jsonl"))?), &run.measurements)?;
    files.push("bep.jsonl".to_string());

    let dump = run.result.config.dump;
    if dump.netlist {
        fs::write(dir.join("netlist.cir"), run.netlist.to_text())?;
        files.push("netlist.cir".to_string());
    }
    if dump.waveforms {
        write_waveforms(&dir.join("waveforms.csv"), run)?;
        files.push("waveforms.csv".to_string());
    }

    let manifest = Manifest {
        generator: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        label: &run.result.config.label,
        master_seed: run.result.config.master_seed,
        files: files.clone(),
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    files.push(MANIFEST_FILE.to_string());
    Ok(files)
}

/// `bit,t,u_cha,i_cha,u_chb,i_chb`
fn write_waveforms(path: &Path, run: &ScenarioRun) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["bit", "t", "u_cha", "i_cha", "u_chb", "i_chb"])?;
    for m in &run.measurements {
        let p = &m.probes;
        for k in 0..p.u_cha.len() {
            w.write_record([
                m.bit_index.to_string(),
                format!("{:e}", p.u_cha.time_at(k)),
                format!("{:e}", p.u_cha.samples()[k]),
                format!("{:e}", p.i_cha.samples()[k]),
                format!("{:e}", p.u_chb.samples()[k]),
                format!("{:e}", p.i_chb.samples()[k]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
