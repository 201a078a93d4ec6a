//! Bit-exchange periods of the KLJN protocol.
//!
//! Each party connects `R_L` (bit 0) or `R_H` (bit 1) together with a Johnson
//! noise source of matching strength. From the mean-square channel voltage or
//! loop current and their own choice, each party infers the other's resistor.
//! `LL` and `HH` periods produce unique levels and are discarded.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cable::{self, RESISTOR_ALICE, RESISTOR_BOB, SOURCE_ALICE, SOURCE_BOB};
use crate::error::{Error, Result};
use crate::netlist::{Netlist, PROBE_I_ALICE, PROBE_I_BOB, PROBE_U_ALICE, PROBE_U_BOB};
use crate::noise::{self, NoiseSpec, BOLTZMANN};
use crate::seeds::{self, Domain, LANE_ALICE, LANE_BOB};
use crate::transient::{SolverConfig, SolverDiagnostics, TransientSolver};
use crate::waveform::Waveform;

/// Effective temperature at which a 1 kΩ resistor gives 1 V rms over 250 Hz.
pub fn default_t_eff() -> f64 {
    noise::t_eff_for_rms(1.0, 1e3, 250.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    L,
    H,
}

impl Choice {
    pub fn bit(self) -> u8 {
        match self {
            Choice::L => 0,
            Choice::H => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Choice::L
        } else {
            Choice::H
        }
    }

    pub fn other(self) -> Self {
        match self {
            Choice::L => Choice::H,
            Choice::H => Choice::L,
        }
    }
}

/// Alice's and Bob's resistor choices for one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrangement {
    pub alice: Choice,
    pub bob: Choice,
}

impl Arrangement {
    pub const LH: Self = Self { alice: Choice::L, bob: Choice::H };
    pub const HL: Self = Self { alice: Choice::H, bob: Choice::L };
    pub const LL: Self = Self { alice: Choice::L, bob: Choice::L };
    pub const HH: Self = Self { alice: Choice::H, bob: Choice::H };

    pub fn new(alice: Choice, bob: Choice) -> Self {
        Self { alice, bob }
    }

    /// The same period seen with the parties' roles exchanged.
    pub fn mirrored(self) -> Self {
        Self { alice: self.bob, bob: self.alice }
    }

    pub fn label(self) -> &'static str {
        match (self.alice, self.bob) {
            (Choice::L, Choice::L) => "LL",
            (Choice::L, Choice::H) => "LH",
            (Choice::H, Choice::L) => "HL",
            (Choice::H, Choice::H) => "HH",
        }
    }
}

impl std::fmt::Display for Arrangement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exchange {
    Secure,
    Discard,
}

pub fn classify_exchange(alice: Choice, bob: Choice) -> Exchange {
    if alice == bob {
        Exchange::Discard
    } else {
        Exchange::Secure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArrangementMode {
    /// Alice always `L`, Bob always `H`.
    #[default]
    FixedLh,
    /// Independent fair coin per party per period.
    Random,
}

/// Which measured quantity the legitimate parties use to infer the remote bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Voltage,
    Current,
    /// Current when holding `R_L`, voltage when holding `R_H`: the pair of
    /// candidate levels then differs by `R_H / R_L` instead of a smaller ratio.
    #[default]
    Best,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub r_low: f64,
    pub r_high: f64,
    /// Effective noise temperature (K).
    pub t_eff: f64,
    pub bandwidth_hz: f64,
    /// Measurement interval; one bit-exchange unit.
    pub t_s: f64,
    pub bep_units: usize,
    #[serde(default)]
    pub arrangement: ArrangementMode,
    #[serde(default)]
    pub inference: Quantity,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            r_low: 1e3,
            r_high: 9e3,
            t_eff: default_t_eff(),
            bandwidth_hz: 250.0,
            t_s: 1e-3,
            bep_units: 100,
            arrangement: ArrangementMode::FixedLh,
            inference: Quantity::Best,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_low > 0.0 && self.r_high > 0.0) || !self.r_low.is_finite() || !self.r_high.is_finite() {
            return Err(Error::Config(format!(
                "resistors must be positive, got R_L = {} and R_H = {}",
                self.r_low, self.r_high
            )));
        }
        if self.r_low == self.r_high {
            return Err(Error::Config("R_L and R_H must differ".into()));
        }
        if !(self.t_eff >= 0.0) || !self.t_eff.is_finite() {
            return Err(Error::Config(format!("T_eff must be >= 0, got {}", self.t_eff)));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.t_s > 0.0) {
            return Err(Error::Config("bandwidth and t_s must be > 0".into()));
        }
        if self.bandwidth_hz >= 0.5 / self.t_s {
            return Err(Error::Config(format!(
                "noise bandwidth {} Hz is not below the Nyquist frequency of t_s = {} s",
                self.bandwidth_hz, self.t_s
            )));
        }
        if self.bep_units == 0 {
            return Err(Error::Config("bep_units must be >= 1".into()));
        }
        Ok(())
    }

    /// `1 / (4 B)`.
    pub fn autocorrelation_time(&self) -> f64 {
        1.0 / (4.0 * self.bandwidth_hz)
    }

    pub fn bep_duration(&self) -> f64 {
        self.bep_units as f64 * self.t_s
    }

    pub fn bits_per_second(&self) -> f64 {
        1.0 / self.bep_duration()
    }

    pub fn resistance(&self, c: Choice) -> f64 {
        match c {
            Choice::L => self.r_low,
            Choice::H => self.r_high,
        }
    }

    pub fn noise_rms(&self, c: Choice) -> f64 {
        noise::rms_for_resistor(self.resistance(c), self.t_eff, self.bandwidth_hz)
    }
}

/// Mean-square channel voltage and loop current for each arrangement class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub uu_ll: f64,
    pub uu_lh: f64,
    pub uu_hh: f64,
    pub ii_ll: f64,
    pub ii_lh: f64,
    pub ii_hh: f64,
}

impl Levels {
    pub fn voltage(&self, a: Arrangement) -> f64 {
        match (a.alice, a.bob) {
            (Choice::L, Choice::L) => self.uu_ll,
            (Choice::H, Choice::H) => self.uu_hh,
            _ => self.uu_lh,
        }
    }

    pub fn current(&self, a: Arrangement) -> f64 {
        match (a.alice, a.bob) {
            (Choice::L, Choice::L) => self.ii_ll,
            (Choice::H, Choice::H) => self.ii_hh,
            _ => self.ii_lh,
        }
    }
}

pub fn expected_levels(config: &ProtocolConfig) -> Levels {
    let s = 4.0 * BOLTZMANN * config.t_eff * config.bandwidth_hz;
    let par = |a: f64, b: f64| a * b / (a + b);
    let (l, h) = (config.r_low, config.r_high);
    Levels {
        uu_ll: s * par(l, l),
        uu_lh: s * par(l, h),
        uu_hh: s * par(h, h),
        ii_ll: s / (l + l),
        ii_lh: s / (l + h),
        ii_hh: s / (h + h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measured {
    Voltage,
    Current,
}

/// Classify a mean-square reading to the nearer of the two levels possible
/// for `own`, splitting at their geometric mean. A reading exactly on the
/// threshold resolves to `H`.
pub fn infer_remote_bit(own: Choice, mean_sq: f64, measured: Measured, levels: &Levels) -> Choice {
    let level = |remote: Choice| {
        let a = Arrangement::new(own, remote);
        match measured {
            Measured::Voltage => levels.voltage(a),
            Measured::Current => levels.current(a),
        }
    };
    let (if_l, if_h) = (level(Choice::L), level(Choice::H));
    let threshold = (if_l * if_h).sqrt();
    if mean_sq == threshold {
        return Choice::H;
    }
    let above = mean_sq > threshold;
    if (if_h > if_l) == above {
        Choice::H
    } else {
        Choice::L
    }
}

/// Which quantity a party holding `own` reads under `q`.
pub fn measured_for(q: Quantity, own: Choice) -> Measured {
    match (q, own) {
        (Quantity::Voltage, _) => Measured::Voltage,
        (Quantity::Current, _) => Measured::Current,
        (Quantity::Best, Choice::L) => Measured::Current,
        (Quantity::Best, Choice::H) => Measured::Voltage,
    }
}

/// Four probe records of one period, sampled at `t_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProbes {
    pub u_cha: Waveform,
    pub i_cha: Waveform,
    pub u_chb: Waveform,
    pub i_chb: Waveform,
}

/// Per-period record. `mean_sq_u` and `mean_sq_i` are Alice-end readings;
/// Bob's local readings are kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BepMeasurement {
    pub bit_index: u64,
    pub alice_choice: Choice,
    pub bob_choice: Choice,
    pub exchange: Exchange,
    pub mean_sq_u: f64,
    pub mean_sq_i: f64,
    pub bob_mean_sq_u: f64,
    pub bob_mean_sq_i: f64,
    /// Bob's resistor as inferred by Alice.
    pub alice_inferred: Choice,
    /// Alice's resistor as inferred by Bob.
    pub bob_inferred: Choice,
    #[serde(skip)]
    pub probes: ChannelProbes,
}

impl BepMeasurement {
    pub fn arrangement(&self) -> Arrangement {
        Arrangement::new(self.alice_choice, self.bob_choice)
    }

    /// Both parties inferred the other's resistor correctly.
    pub fn inference_correct(&self) -> bool {
        self.alice_inferred == self.bob_choice && self.bob_inferred == self.alice_choice
    }
}

/// Noise seeds of the two parties for one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartySeeds {
    pub alice: u64,
    pub bob: u64,
}

impl PartySeeds {
    pub fn for_bit(master: u64, bit_index: u64) -> Self {
        Self {
            alice: seeds::derive(master, Domain::BitNoise, bit_index, LANE_ALICE),
            bob: seeds::derive(master, Domain::BitNoise, bit_index, LANE_BOB),
        }
    }

    pub fn swapped(self) -> Self {
        Self { alice: self.bob, bob: self.alice }
    }
}

/// A protocol run on one netlist. Solver state carries over from one period
/// to the next, as on a physical line.
#[derive(Debug, Clone)]
pub struct KljnSession {
    config: ProtocolConfig,
    levels: Levels,
    solver: TransientSolver,
    decimation: usize,
    probe_index: [usize; 4],
    source_index: [usize; 2],
    warm_up_units: usize,
}

impl KljnSession {
    /// The netlist must carry resistors `RA`/`RB`, sources `alice`/`bob` and
    /// the four channel probes.
    pub fn new(netlist: &Netlist, config: &ProtocolConfig, solver: &SolverConfig) -> Result<Self> {
        config.validate()?;
        netlist.validate_kljn()?;
        let decimation = solver.decimation(config.t_s)?;
        let mut s = TransientSolver::new(netlist, solver)?;
        let probe = |name: &str| {
            s.probe_names()
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| Error::Netlist(format!("missing probe `{name}`")))
        };
        let probe_index = [probe(PROBE_U_ALICE)?, probe(PROBE_I_ALICE)?, probe(PROBE_U_BOB)?, probe(PROBE_I_BOB)?];
        let source = |name: &str| {
            s.source_index(name)
                .ok_or_else(|| Error::Netlist(format!("missing waveform source `{name}`")))
        };
        let source_index = [source(SOURCE_ALICE)?, source(SOURCE_BOB)?];
        s.set_resistance(RESISTOR_ALICE, config.r_low)?;
        s.set_resistance(RESISTOR_BOB, config.r_high)?;

        // Five RC time constants of the cable capacitance, at least one unit.
        let c_total = netlist.total('C');
        let settle = if c_total > 0.0 {
            5.0 / (2.0 * std::f64::consts::PI * cable::cutoff_frequency(config.r_low, config.r_high, c_total)?)
        } else {
            0.0
        };
        let warm_up_units = ((settle / config.t_s).ceil() as usize).max(1);
        Ok(Self {
            config: config.clone(),
            levels: expected_levels(config),
            solver: s,
            decimation,
            probe_index,
            source_index,
            warm_up_units,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn diagnostics(&self) -> SolverDiagnostics {
        self.solver.diagnostics()
    }

    pub fn warm_up_units(&self) -> usize {
        self.warm_up_units
    }

    fn attach(&mut self, arrangement: Arrangement) -> Result<()> {
        self.solver.set_resistance(RESISTOR_ALICE, self.config.resistance(arrangement.alice))?;
        self.solver.set_resistance(RESISTOR_BOB, self.config.resistance(arrangement.bob))
    }

    fn drive(&mut self, arrangement: Arrangement, seeds: PartySeeds, units: usize) -> Result<[Vec<f64>; 4]> {
        self.attach(arrangement)?;
        let h = self.solver.config().internal_step_s;
        let n_steps = units * self.decimation;
        let make = |choice: Choice, seed: u64| {
            noise::generate(&NoiseSpec {
                bandwidth_hz: self.config.bandwidth_hz,
                rms_volts: self.config.noise_rms(choice),
                duration_s: n_steps as f64 * h,
                sample_interval_s: h,
                seed,
            })
        };
        let a = make(arrangement.alice, seeds.alice)?;
        let b = make(arrangement.bob, seeds.bob)?;
        let mut inputs: [&[f64]; 2] = [&[], &[]];
        inputs[self.source_index[0]] = a.samples();
        inputs[self.source_index[1]] = b.samples();
        let mut traces = self.solver.run(&inputs, n_steps, self.decimation)?;
        Ok(self.probe_index.map(|i| std::mem::take(&mut traces[i])))
    }

    /// Settle the line before the first measured period.
    pub fn warm_up(&mut self, arrangement: Arrangement, seeds: PartySeeds) -> Result<()> {
        self.drive(arrangement, seeds, self.warm_up_units).map(|_| ())
    }

    /// One bit-exchange period with fresh noise realizations.
    pub fn run_bep(&mut self, bit_index: u64, arrangement: Arrangement, seeds: PartySeeds) -> Result<BepMeasurement> {
        let t0 = self.solver.time_s() + self.config.t_s;
        let [u_a, i_a, u_b, i_b] = self.drive(arrangement, seeds, self.config.bep_units)?;
        let wave = |s: Vec<f64>| Waveform::new(s, self.config.t_s, t0);
        let probes = ChannelProbes { u_cha: wave(u_a)?, i_cha: wave(i_a)?, u_chb: wave(u_b)?, i_chb: wave(i_b)? };
        let (mean_sq_u, mean_sq_i) = (probes.u_cha.mean_square(), probes.i_cha.mean_square());
        let (bob_mean_sq_u, bob_mean_sq_i) = (probes.u_chb.mean_square(), probes.i_chb.mean_square());
        let infer = |own: Choice, u: f64, i: f64| {
            let m = measured_for(self.config.inference, own);
            let reading = if m == Measured::Voltage { u } else { i };
            infer_remote_bit(own, reading, m, &self.levels)
        };
        Ok(BepMeasurement {
            bit_index,
            alice_choice: arrangement.alice,
            bob_choice: arrangement.bob,
            exchange: classify_exchange(arrangement.alice, arrangement.bob),
            mean_sq_u,
            mean_sq_i,
            bob_mean_sq_u,
            bob_mean_sq_i,
            alice_inferred: infer(arrangement.alice, mean_sq_u, mean_sq_i),
            bob_inferred: infer(arrangement.bob, bob_mean_sq_u, bob_mean_sq_i),
            probes,
        })
    }
}

/// Arrangement of period `bit_index` under `mode`.
pub fn arrangement_for(mode: ArrangementMode, master: u64, bit_index: u64) -> Arrangement {
    match mode {
        ArrangementMode::FixedLh => Arrangement::LH,
        ArrangementMode::Random => {
            let coin = |lane| {
                let mut rng = seeds::rng_from(seeds::derive(master, Domain::Arrangement, bit_index, lane));
                if rng.random::<bool>() {
                    Choice::H
                } else {
                    Choice::L
                }
            };
            Arrangement::new(coin(LANE_ALICE), coin(LANE_BOB))
        }
    }
}

/// Warm up, then run `n_bits` consecutive periods. Every random stream is
/// derived from `master`.
pub fn run_session(
    netlist: &Netlist,
    config: &ProtocolConfig,
    solver: &SolverConfig,
    n_bits: u64,
    master: u64,
) -> Result<(Vec<BepMeasurement>, SolverDiagnostics)> {
    let mut session = KljnSession::new(netlist, config, solver)?;
    let first = arrangement_for(config.arrangement, master, 0);
    session.warm_up(
        first,
        PartySeeds {
            alice: seeds::derive(master, Domain::WarmUp, 0, LANE_ALICE),
            bob: seeds::derive(master, Domain::WarmUp, 0, LANE_BOB),
        },
    )?;
    let mut out = Vec::with_capacity(n_bits as usize);
    for bit in 0..n_bits {
        let arrangement = arrangement_for(config.arrangement, master, bit);
        out.push(session.run_bep(bit, arrangement, PartySeeds::for_bit(master, bit))?);
    }
    Ok((out, session.diagnostics()))
}

/// One JSON object per period.
pub fn write_jsonl<W: Write>(mut w: W, records: &[BepMeasurement]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
