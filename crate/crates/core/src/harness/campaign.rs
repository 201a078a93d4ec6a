//! The six-scenario attack campaign and the defense runs.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_scenario, Defense, DumpOptions, ScenarioConfig, ScenarioResult};
use crate::cable::{CableModel, TapEnd};
use crate::error::Result;
use crate::privacy::AmplificationRound;
use crate::seeds::{self, Domain};

pub const TABLE1_BEP_UNITS: [usize; 3] = [20, 50, 100];
pub const TABLE1_LENGTHS_M: [f64; 2] = [100.0, 1000.0];
/// Index of the (100 units, 1000 m) cell in [`table1_configs`] order.
pub const STRONGEST_CELL: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignOptions {
    pub master_seed: u64,
    pub n_bits: u64,
    /// Control run: remove the cable capacitance everywhere.
    pub zero_capacitance: bool,
    pub cable_model: CableModel,
    /// Per-scenario output directories are created below this one.
    pub output_dir: Option<PathBuf>,
    pub dump: DumpOptions,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            master_seed: 1,
            n_bits: 1000,
            zero_capacitance: false,
            cable_model: CableModel::Distributed,
            output_dir: None,
            dump: DumpOptions::default(),
        }
    }
}

/// Six configurations, bep-major: (20, 100 m), (20, 1000 m), (50, 100 m), ...
/// Cell `i` gets its own seed derived from the campaign master seed.
pub fn table1_configs(opts: &CampaignOptions) -> Vec<ScenarioConfig> {
    let mut out = Vec::new();
    for &bep in &TABLE1_BEP_UNITS {
        for &len in &TABLE1_LENGTHS_M {
            let index = out.len() as u64;
            let mut c = ScenarioConfig::campaign_cell(bep, len, seeds::derive(opts.master_seed, Domain::Scenario, index, 0));
            c.n_bits = opts.n_bits;
            c.cable_model = opts.cable_model;
            c.dump = opts.dump;
            if opts.zero_capacitance {
                c.cable = c.cable.without_capacitance();
                c.label.push_str("_c0");
            }
            c.output_dir = opts.output_dir.as_ref().map(|d| d.join(&c.label));
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub bep_units: usize,
    pub bits_per_second: f64,
    pub length_m: f64,
    pub result: ScenarioResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub cells: Vec<Table1Cell>,
}

impl Table1 {
    pub fn cell(&self, bep_units: usize, length_m: f64) -> Option<&Table1Cell> {
        self.cells.iter().find(|c| c.bep_units == bep_units && c.length_m == length_m)
    }

    /// `p_E` in percent.
    pub fn p_e_percent(&self, bep_units: usize, length_m: f64) -> Option<f64> {
        self.cell(bep_units, length_m).map(|c| 100.0 * c.result.p_e)
    }

    pub fn format_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Bit exchange duration | Bits per second | p_E 100 m (%) | p_E 1000 m (%) | std 100 m | std 1000 m"
        );
        for &bep in &TABLE1_BEP_UNITS {
            let get = |len| self.cell(bep, len);
            let (Some(a), Some(b)) = (get(100.0), get(1000.0)) else { continue };
            let _ = writeln!(
                s,
                "{:>21} | {:>15} | {:>13.1} | {:>14.1} | {:>9.1} | {:>10.1}",
                bep,
                a.bits_per_second,
                100.0 * a.result.p_e,
                100.0 * b.result.p_e,
                100.0 * a.result.binomial_std,
                100.0 * b.result.binomial_std,
            );
        }
        s
    }

    /// `bep_units,bits_per_second,length_m,p_e,epsilon,binomial_std,n_bits,legit_error_rate,seed`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "bep_units",
            "bits_per_second",
            "length_m",
            "p_e",
            "epsilon",
            "binomial_std",
            "n_bits",
            "legit_error_rate",
            "seed",
        ])?;
        for c in &self.cells {
            let r = &c.result;
            out.write_record([
                c.bep_units.to_string(),
                c.bits_per_second.to_string(),
                c.length_m.to_string(),
                r.p_e.to_string(),
                r.epsilon.to_string(),
                r.binomial_std.to_string(),
                r.n_attacked.to_string(),
                r.legit_error_rate.to_string(),
                r.config.master_seed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Run the six scenarios concurrently.
pub fn reproduce_table1(opts: &CampaignOptions) -> Result<Table1> {
    let configs = table1_configs(opts);
    let results = configs.par_iter().map(run_scenario).collect::<Result<Vec<_>>>()?;
    let cells = configs
        .iter()
        .zip(results)
        .map(|(c, result)| Table1Cell {
            bep_units: c.protocol.bep_units,
            bits_per_second: c.protocol.bits_per_second(),
            length_m: c.cable.length_m,
            result,
        })
        .collect();
    Ok(Table1 { cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseReport {
    /// Strongest scenario without the killer; carries the XOR rounds.
    pub baseline: ScenarioResult,
    pub killer: ScenarioResult,
}

impl DefenseReport {
    pub fn xor_rounds(&self) -> &[AmplificationRound] {
        &self.baseline.amplification
    }

    pub fn format_report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case                 | p_E (%) | std (%) | predicted (%) | bits");
        let row = |s: &mut String, name: &str, p: f64, sd: f64, pred: Option<f64>, n: usize| {
            let pred = pred.map_or("-".to_string(), |v| format!("{:.1}", 100.0 * v));
            let _ = writeln!(s, "{name:<20} | {:>7.1} | {:>7.1} | {pred:>13} | {n}", 100.0 * p, 100.0 * sd);
        };
        let b = &self.baseline;
        row(&mut s, "no defense", b.p_e, b.binomial_std, None, b.n_attacked);
        let k = &self.killer;
        row(&mut s, "capacitor killer", k.p_e, k.binomial_std, None, k.n_attacked);
        for r in self.xor_rounds().iter().skip(1) {
            row(&mut s, &format!("XOR x{}", r.round), r.p_e, r.binomial_std, r.predicted, r.n_bits);
        }
        s
    }
}

/// The strongest campaign cell with the capacitor killer, and with two XOR
/// rounds applied to the undefended key. Both runs use the cell's seed, so
/// they see the same noise.
pub fn reproduce_defenses(opts: &CampaignOptions) -> Result<DefenseReport> {
    let base = table1_configs(opts).swap_remove(STRONGEST_CELL);
    let with = |defense: Defense, suffix: &str| {
        let mut c = base.clone();
        c.defense = defense;
        c.label.push_str(suffix);
        c.output_dir = opts.output_dir.as_ref().map(|d| d.join(&c.label));
        c
    };
    let xor = with(Defense::XorRounds { rounds: 2 }, "_xor2");
    let killer = with(Defense::CapacitorKiller { tap: TapEnd::Alice }, "_killer");
    let (a, b) = rayon::join(|| run_scenario(&xor), || run_scenario(&killer));
    Ok(DefenseReport { baseline: a?, killer: b? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_cells_with_distinct_seeds() {
        let c = table1_configs(&CampaignOptions::default());
        assert_eq!(c.len(), 6);
        assert_eq!((c[STRONGEST_CELL].protocol.bep_units, c[STRONGEST_CELL].cable.length_m), (100, 1000.0));
        let mut seeds: Vec<_> = c.iter().map(|x| x.master_seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 6);
        assert_eq!(c[0].protocol.bits_per_second(), 50.0);
        assert_eq!(c[5].cable.n_segments, 100);
        let z = table1_configs(&CampaignOptions { zero_capacitance: true, ..CampaignOptions::default() });
        assert!(z.iter().all(|x| x.cable.c_per_m == 0.0));
    }

    #[test]
    fn small_campaign_formats() {
        let t = reproduce_table1(&CampaignOptions { n_bits: 4, ..CampaignOptions::default() }).unwrap();
        let text = t.format_table();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().trim_start().starts_with("20 |"));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }
}
