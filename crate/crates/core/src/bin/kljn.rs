use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kljn_sim::cable::{CableModel, CableSpec};
use kljn_sim::compare::{compare_sweep, COMPARISON_BANDWIDTHS_HZ};
use kljn_sim::harness::{
    reproduce_defenses, reproduce_table1, run_scenario, CampaignOptions, DumpOptions, ScenarioConfig,
};
use kljn_sim::noise::{self, NoiseSpec};
use kljn_sim::protocol::default_t_eff;
use kljn_sim::{Error, Result};

#[derive(Parser)]
#[command(name = "kljn", version, about = "KLJN key exchange over a capacitive cable: attack and defenses")]
struct Cli {
    /// Master seed (overrides the config file in `run`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for JSON and CSV results.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write per-sample probe waveforms.
    #[arg(long, global = true)]
    dump_waveforms: bool,
    /// Also write the simulated netlist.
    #[arg(long, global = true)]
    dump_netlist: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Lumped,
    Distributed,
}

#[derive(Subcommand)]
enum Command {
    /// Eve's success rate for the six (duration, length) scenarios.
    Table1 {
        #[arg(long, default_value_t = 1000)]
        bits: u64,
        /// Control run with the cable capacitance removed.
        #[arg(long)]
        zero_capacitance: bool,
        #[arg(long, value_enum, default_value_t = Model::Distributed)]
        model: Model,
    },
    /// Strongest scenario with the capacitor killer and with XOR rounds.
    Defenses {
        #[arg(long, default_value_t = 1000)]
        bits: u64,
    },
    /// Lumped versus distributed cable at three noise bandwidths.
    CompareModels {
        #[arg(long, default_value_t = 1000.0)]
        length: f64,
        /// Simulated duration in units of 1/B.
        #[arg(long, default_value_t = 100.0)]
        periods: f64,
    },
    /// One scenario from a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Statistics of a long noise realization.
    NoiseCheck {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 250.0)]
        bandwidth: f64,
        #[arg(long, default_value_t = 1000.0)]
        resistance: f64,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}

fn dumps(cli: &Cli) -> DumpOptions {
    DumpOptions { waveforms: cli.dump_waveforms, netlist: cli.dump_netlist }
}

fn campaign(cli: &Cli, bits: u64) -> CampaignOptions {
    CampaignOptions {
        master_seed: cli.seed.unwrap_or(1),
        n_bits: bits,
        output_dir: cli.out.clone(),
        dump: dumps(cli),
        ..CampaignOptions::default()
    }
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Table1 { bits, zero_capacitance, model } => {
            let opts = CampaignOptions {
                zero_capacitance: *zero_capacitance,
                cable_model: match model {
                    Model::Lumped => CableModel::Lumped,
                    Model::Distributed => CableModel::Distributed,
                },
                ..campaign(cli, *bits)
            };
            let table = reproduce_table1(&opts)?;
            print!("{}", table.format_table());
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir)?;
                table.write_csv(BufWriter::new(File::create(dir.join("table1.csv"))?))?;
                fs::write(dir.join("table1.txt"), table.format_table())?;
            }
        }
        Command::Defenses { bits } => {
            let report = reproduce_defenses(&campaign(cli, *bits))?;
            print!("{}", report.format_report());
            if let Some(dir) = &cli.out {
                write_json(dir, "defenses.json", &report)?;
            }
        }
        Command::CompareModels { length, periods } => {
            let cable = CableSpec::rg58(*length);
            let seed = cli.seed.unwrap_or(1);
            let reports = compare_sweep(&cable, 1e3, 9e3, &COMPARISON_BANDWIDTHS_HZ, *periods, seed)?;
            println!("gamma     | bandwidth (Hz) | nrmsd     | verdict");
            for r in &reports {
                println!("{:>9.1} | {:>14} | {:>9.2e} | {:?}", r.gamma, r.bandwidth_hz, r.nrmsd, r.verdict);
            }
            if let Some(dir) = &cli.out {
                write_json(dir, "comparison.json", &reports)?;
                for r in &reports {
                    let name = format!("compare_gamma_{}.csv", r.gamma);
                    r.write_csv(BufWriter::new(File::create(dir.join(name))?))?;
                }
            }
        }
        Command::Run { config } => {
            let mut c = ScenarioConfig::from_file(config)?;
            if let Some(seed) = cli.seed {
                c.master_seed = seed;
            }
            if let Some(dir) = &cli.out {
                c.output_dir = Some(dir.clone());
            }
            c.dump.waveforms |= cli.dump_waveforms;
            c.dump.netlist |= cli.dump_netlist;
            let r = run_scenario(&c)?;
            println!("{}", r.to_json());
        }
        Command::NoiseCheck { samples, bandwidth, resistance, bins } => {
            if *samples == 0 {
                return Err(Error::Argument("--samples must be >= 1".into()));
            }
            let h = 1.0 / (4.0 * bandwidth);
            let spec = NoiseSpec {
                bandwidth_hz: *bandwidth,
                rms_volts: noise::rms_for_resistor(*resistance, default_t_eff(), *bandwidth),
                duration_s: *samples as f64 * h,
                sample_interval_s: h,
                seed: cli.seed.unwrap_or(1),
            };
            let (w, q) = noise::quality_check(&spec, *bins)?;
            println!("{}", serde_json::to_string_pretty(&q)?);
            if let Some(dir) = &cli.out {
                write_json(dir, "noise_check.json", &q)?;
                fs::write(dir.join("gaussianity.csv"), noise::gaussianity_report(&w, *bins)?.to_csv())?;
            }
        }
    }
    Ok(())
}
