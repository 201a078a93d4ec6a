//! Lumped versus distributed cable models at different noise bandwidths.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cable::{self, CableModel, CableSpec, SOURCE_ALICE, SOURCE_BOB};
use crate::error::{Error, Result};
use crate::netlist::{Netlist, PROBE_U_ALICE};
use crate::noise::{self, NoiseSpec};
use crate::protocol::default_t_eff;
use crate::seeds::{self, Domain, LANE_ALICE, LANE_BOB};
use crate::transient::{SolverConfig, TransientSolver};
use crate::waveform::{nrmsd, Waveform};

pub const INDISTINGUISHABLE_BELOW: f64 = 0.01;
pub const SIMILAR_BELOW: f64 = 0.1;

/// Internal steps per `1/B`.
pub const STEPS_PER_BANDWIDTH_PERIOD: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Waves,
    Similar,
    Indistinguishable,
}

impl Verdict {
    pub fn from_nrmsd(x: f64) -> Self {
        if x < INDISTINGUISHABLE_BELOW {
            Verdict::Indistinguishable
        } else if x < SIMILAR_BELOW {
            Verdict::Similar
        } else {
            Verdict::Waves
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub gamma: f64,
    pub bandwidth_hz: f64,
    pub length_m: f64,
    pub internal_step_s: f64,
    pub nrmsd: f64,
    pub verdict: Verdict,
    /// Alice-end voltage of each model, sampled at every internal step.
    #[serde(skip)]
    pub lumped: Waveform,
    #[serde(skip)]
    pub distributed: Waveform,
}

impl ComparisonReport {
    /// `t,u_lumped,u_distributed`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "u_lumped", "u_distributed"])?;
        for (k, (a, b)) in self.lumped.samples().iter().zip(self.distributed.samples()).enumerate() {
            out.write_record([format!("{:e}", self.lumped.time_at(k)), format!("{a:e}"), format!("{b:e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Internal step `1 / (32 B)`.
pub fn comparison_step(bandwidth_hz: f64) -> f64 {
    1.0 / (STEPS_PER_BANDWIDTH_PERIOD * bandwidth_hz)
}

/// Same pair of source realizations for any model at this bandwidth.
pub fn comparison_sources(r_a: f64, r_b: f64, bandwidth_hz: f64, duration_s: f64, seed: u64) -> Result<[Waveform; 2]> {
    let h = comparison_step(bandwidth_hz);
    let t_eff = default_t_eff();
    let make = |r: f64, lane: u8| {
        noise::generate(&NoiseSpec {
            bandwidth_hz,
            rms_volts: noise::rms_for_resistor(r, t_eff, bandwidth_hz),
            duration_s,
            sample_interval_s: h,
            seed: seeds::derive(seed, Domain::Comparison, 0, lane),
        })
    };
    Ok([make(r_a, LANE_ALICE)?, make(r_b, LANE_BOB)?])
}

/// Alice-end voltage of `netlist` driven by `sources`, one sample per step.
pub fn alice_voltage(netlist: &Netlist, sources: &[Waveform; 2]) -> Result<Waveform> {
    let h = sources[0].sample_interval_s();
    let mut s = TransientSolver::new(netlist, &SolverConfig::new(h))?;
    let probe = s
        .probe_names()
        .iter()
        .position(|p| p == PROBE_U_ALICE)
        .ok_or_else(|| Error::Netlist(format!("missing probe `{PROBE_U_ALICE}`")))?;
    let mut inputs: [&[f64]; 2] = [&[], &[]];
    let idx = |name| s.source_index(name).ok_or_else(|| Error::Netlist(format!("missing source `{name}`")));
    inputs[idx(SOURCE_ALICE)?] = sources[0].samples();
    inputs[idx(SOURCE_BOB)?] = sources[1].samples();
    let n = sources[0].len().min(sources[1].len());
    let mut traces = s.run(&inputs, n, 1)?;
    Waveform::new(std::mem::take(&mut traces[probe]), h, h)
}

pub fn compare_models(
    cable: &CableSpec,
    r_a: f64,
    r_b: f64,
    bandwidth_hz: f64,
    duration_s: f64,
    seed: u64,
) -> Result<ComparisonReport> {
    let sources = comparison_sources(r_a, r_b, bandwidth_hz, duration_s, seed)?;
    let lumped = alice_voltage(&cable::build(CableModel::Lumped, r_a, r_b, cable)?, &sources)?;
    let distributed = alice_voltage(&cable::build(CableModel::Distributed, r_a, r_b, cable)?, &sources)?;
    let d = nrmsd(lumped.samples(), distributed.samples());
    Ok(ComparisonReport {
        gamma: cable::wavelength_ratio(cable, bandwidth_hz)?,
        bandwidth_hz,
        length_m: cable.length_m,
        internal_step_s: comparison_step(bandwidth_hz),
        nrmsd: d,
        verdict: Verdict::from_nrmsd(d),
        lumped,
        distributed,
    })
}

/// nrmsd of the distributed model against the same ladder with twice the
/// segments; small values mean the ladder itself is converged.
pub fn refinement_nrmsd(cable: &CableSpec, r_a: f64, r_b: f64, bandwidth_hz: f64, duration_s: f64, seed: u64) -> Result<f64> {
    let sources = comparison_sources(r_a, r_b, bandwidth_hz, duration_s, seed)?;
    let coarse = alice_voltage(&cable::build_distributed(r_a, r_b, cable)?, &sources)?;
    let fine_spec = cable.with_segments(cable.n_segments * 2);
    let fine = alice_voltage(&cable::build_distributed(r_a, r_b, &fine_spec)?, &sources)?;
    Ok(nrmsd(coarse.samples(), fine.samples()))
}

/// The three bandwidths giving `γ = 0.8, 8, 800` on a 1000 m RG58 cable.
pub const COMPARISON_BANDWIDTHS_HZ: [f64; 3] = [250e3, 25e3, 250.0];

/// Run all bandwidths concurrently; `duration_periods` is in units of `1/B`.
pub fn compare_sweep(cable: &CableSpec, r_a: f64, r_b: f64, bandwidths: &[f64], duration_periods: f64, seed: u64) -> Result<Vec<ComparisonReport>> {
    use rayon::prelude::*;
    bandwidths
        .par_iter()
        .map(|&b| compare_models(cable, r_a, r_b, b, duration_periods / b, seed))
        .collect()
}
