//! Scenario configuration and end-to-end runs.

mod campaign;
mod persist;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use campaign::{
    reproduce_defenses, reproduce_table1, table1_configs, CampaignOptions, DefenseReport, Table1, Table1Cell,
    STRONGEST_CELL, TABLE1_BEP_UNITS, TABLE1_LENGTHS_M,
};
pub use persist::{write_scenario, MANIFEST_FILE};

use crate::attack::{run_attack, AttackOutcome};
use crate::cable::{self, CableModel, CableSpec, TapEnd};
use crate::error::{Error, Result};
use crate::netlist::Netlist;
use crate::privacy::{empirical_amplification, AmplificationRound};
use crate::protocol::{run_session, BepMeasurement, Exchange, ProtocolConfig};
use crate::transient::{SolverConfig, SolverDiagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defense {
    #[default]
    None,
    CapacitorKiller {
        #[serde(default)]
        tap: TapEnd,
    },
    XorRounds {
        rounds: u32,
    },
    Both {
        #[serde(default)]
        tap: TapEnd,
        rounds: u32,
    },
}

impl Defense {
    pub fn killer(self) -> Option<TapEnd> {
        match self {
            Defense::CapacitorKiller { tap } | Defense::Both { tap, .. } => Some(tap),
            _ => None,
        }
    }

    pub fn xor_rounds(self) -> u32 {
        match self {
            Defense::XorRounds { rounds } | Defense::Both { rounds, .. } => rounds,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DumpOptions {
    #[serde(default)]
    pub waveforms: bool,
    #[serde(default)]
    pub netlist: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub label: String,
    pub protocol: ProtocolConfig,
    pub cable: CableSpec,
    #[serde(default)]
    pub cable_model: CableModel,
    pub solver: SolverConfig,
    pub n_bits: u64,
    #[serde(default)]
    pub defense: Defense,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub dump: DumpOptions,
}

impl ScenarioConfig {
    /// Defaults of the six-scenario campaign: 1 kΩ / 9 kΩ, 250 Hz, t_s = 1 ms,
    /// 1000 bits, RG58 ladder, fixed `LH` arrangement.
    pub fn campaign_cell(bep_units: usize, length_m: f64, master_seed: u64) -> Self {
        let protocol = ProtocolConfig { bep_units, ..ProtocolConfig::default() };
        Self {
            label: format!("bep{bep_units}_{length_m}m"),
            solver: SolverConfig::for_measurement(protocol.t_s),
            protocol,
            cable: CableSpec::rg58(length_m),
            cable_model: CableModel::Distributed,
            n_bits: 1000,
            defense: Defense::None,
            master_seed,
            output_dir: None,
            dump: DumpOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bits == 0 {
            return Err(Error::Config("n_bits must be >= 1".into()));
        }
        self.protocol.validate()?;
        self.cable.validate()?;
        self.solver.decimation(self.protocol.t_s)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Netlist with the defense's killer applied, if any.
    pub fn netlist(&self) -> Result<Netlist> {
        let net = cable::build(self.cable_model, self.protocol.r_low, self.protocol.r_high, &self.cable)?;
        match self.defense.killer() {
            Some(tap) => cable::apply_capacitor_killer(&net, tap),
            None => Ok(net),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub p_e: f64,
    pub epsilon: f64,
    pub binomial_std: f64,
    /// Secure periods Eve attacked.
    pub n_attacked: usize,
    /// Fraction of secure periods where a legitimate party misread the other's resistor.
    pub legit_error_rate: f64,
    pub amplification: Vec<AmplificationRound>,
    pub wall_clock_s: f64,
    pub diagnostics: SolverDiagnostics,
}

impl ScenarioResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Everything produced by one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub result: ScenarioResult,
    pub netlist: Netlist,
    pub measurements: Vec<BepMeasurement>,
    pub outcome: AttackOutcome,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    run_scenario_detailed(config).map(|r| r.result)
}

/// Build, exchange `n_bits` periods, attack, amplify and (with an
/// `output_dir`) persist.
pub fn run_scenario_detailed(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let started = Instant::now();
    let netlist = config.netlist()?;
    let (measurements, diagnostics) =
        run_session(&netlist, &config.protocol, &config.solver, config.n_bits, config.master_seed)?;
    let outcome = run_attack(&measurements, config.master_seed)?;
    let amplification = empirical_amplification(&outcome, config.defense.xor_rounds())?;
    let secure: Vec<_> = measurements.iter().filter(|m| m.exchange == Exchange::Secure).collect();
    let misread = secure.iter().filter(|m| !m.inference_correct()).count();
    let result = ScenarioResult {
        config: config.clone(),
        p_e: outcome.summary.p_e,
        epsilon: outcome.summary.epsilon,
        binomial_std: outcome.summary.binomial_std,
        n_attacked: outcome.summary.n_bits,
        legit_error_rate: misread as f64 / secure.len().max(1) as f64,
        amplification,
        wall_clock_s: started.elapsed().as_secs_f64(),
        diagnostics,
    };
    log::info!(
        "{}: p_E = {:.1}% over {} bits in {:.1} s",
        config.label,
        100.0 * result.p_e,
        result.n_attacked,
        result.wall_clock_s
    );
    let run = ScenarioRun { result, netlist, measurements, outcome };
    if let Some(dir) = &config.output_dir {
        write_scenario(dir, &run)?;
    }
    Ok(run)
}
