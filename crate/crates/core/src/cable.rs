//! KLJN loop netlists with lumped or ladder cable models.
//!
//! Both builders produce the same outer skeleton:
//!
//! ```text
//!  @alice ─ VA ─ sa ─ RA ─ a ══ cable ══ b ─ RB ─ sb ─ VB ─ @bob
//!                                 │
//!                         shunt C to `shield` (VSHIELD = 0 V)
//! ```
//!
//! `I_cha` and `I_chb` are the currents through `RA` and `RB`, i.e. each
//! party's current flowing *into* the cable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{
    ElementKind, Netlist, NodeId, ProbeTarget, SourceValue, GROUND, PROBE_I_ALICE, PROBE_I_BOB,
    PROBE_U_ALICE, PROBE_U_BOB,
};

pub const SOURCE_ALICE: &str = "alice";
pub const SOURCE_BOB: &str = "bob";
pub const RESISTOR_ALICE: &str = "RA";
pub const RESISTOR_BOB: &str = "RB";
pub const SHIELD_NODE: &str = "shield";
pub const SHIELD_SOURCE: &str = "VSHIELD";
pub const FOLLOWER: &str = "EKILL";

/// Cable length covered by one ladder section in [`CableSpec::rg58`].
pub const DEFAULT_SECTION_LENGTH_M: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CableSpec {
    pub r_per_m: f64,
    pub l_per_m: f64,
    pub c_per_m: f64,
    pub length_m: f64,
    pub velocity_m_s: f64,
    pub n_segments: usize,
}

impl CableSpec {
    /// RG58 coaxial cable: 0.021 Ω/m, 250 nH/m, 100 pF/m, 2·10^8 m/s.
    pub fn rg58(length_m: f64) -> Self {
        Self {
            r_per_m: 0.021,
            l_per_m: 250e-9,
            c_per_m: 100e-12,
            length_m,
            velocity_m_s: 2e8,
            n_segments: ((length_m / DEFAULT_SECTION_LENGTH_M).round() as usize).max(1),
        }
    }

    /// Same cable with the shunt capacitance removed.
    pub fn without_capacitance(&self) -> Self {
        Self { c_per_m: 0.0, ..self.clone() }
    }

    pub fn with_segments(&self, n_segments: usize) -> Self {
        Self { n_segments, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let per_m = [self.r_per_m, self.l_per_m, self.c_per_m];
        if per_m.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("per-meter cable values must be >= 0: {per_m:?}")));
        }
        if !(self.length_m > 0.0) {
            return Err(Error::Config(format!("cable length must be > 0, got {}", self.length_m)));
        }
        if self.n_segments == 0 {
            return Err(Error::Config("cable needs at least one segment".into()));
        }
        if self.l_per_m > 0.0 && self.c_per_m > 0.0 {
            let v = 1.0 / (self.l_per_m * self.c_per_m).sqrt();
            if ((v - self.velocity_m_s) / v).abs() > 0.01 {
                return Err(Error::Config(format!(
                    "velocity {} m/s disagrees with 1/sqrt(LC) = {v} m/s",
                    self.velocity_m_s
                )));
            }
        }
        Ok(())
    }

    pub fn total_resistance(&self) -> f64 {
        self.r_per_m * self.length_m
    }

    pub fn total_inductance(&self) -> f64 {
        self.l_per_m * self.length_m
    }

    pub fn total_capacitance(&self) -> f64 {
        self.c_per_m * self.length_m
    }

    /// `sqrt(L/C)` per unit length.
    pub fn characteristic_impedance(&self) -> f64 {
        (self.l_per_m / self.c_per_m).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CableModel {
    Lumped,
    #[default]
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TapEnd {
    #[default]
    Alice,
    Bob,
}

pub fn build(model: CableModel, r_alice: f64, r_bob: f64, cable: &CableSpec) -> Result<Netlist> {
    match model {
        CableModel::Lumped => build_lumped(r_alice, r_bob, cable),
        CableModel::Distributed => build_distributed(r_alice, r_bob, cable),
    }
}

/// Single half-T section: series `R_s = rL/2`, `L_s = lL/2` from Alice's end,
/// then one shunt `C_p = cL` at Bob's end. For 1000 m of RG58 this is
/// 10.5 Ω, 125 µH and 100 nF.
pub fn build_lumped(r_alice: f64, r_bob: f64, cable: &CableSpec) -> Result<Netlist> {
    check_resistors(r_alice, r_bob)?;
    cable.validate()?;
    let mut net = Netlist::new();
    let a = party(&mut net, "A", SOURCE_ALICE, r_alice)?;
    let b = series(
        &mut net,
        a,
        "b",
        "1",
        cable.total_resistance() / 2.0,
        cable.total_inductance() / 2.0,
    )?;
    if cable.c_per_m > 0.0 {
        let shield = shield_rail(&mut net)?;
        net.add_capacitor("Cp", b, shield, cable.total_capacitance())?;
    }
    finish(&mut net, a, b, r_bob)?;
    Ok(net)
}

/// Ladder of `n_segments` identical Π sections: series `rΔx`, `lΔx` with
/// `cΔx/2` to the shield at each side. Interior nodes carry the merged `cΔx`.
pub fn build_distributed(r_alice: f64, r_bob: f64, cable: &CableSpec) -> Result<Netlist> {
    check_resistors(r_alice, r_bob)?;
    cable.validate()?;
    let n = cable.n_segments;
    let dx = cable.length_m / n as f64;
    let c_sec = cable.c_per_m * dx;
    let mut net = Netlist::new();
    let a = party(&mut net, "A", SOURCE_ALICE, r_alice)?;
    let shield = if c_sec > 0.0 { Some(shield_rail(&mut net)?) } else { None };
    let mut node = a;
    for k in 0..=n {
        if k > 0 {
            let name = if k == n { "b".to_string() } else { format!("x{k}") };
            node = series(&mut net, node, &name, &k.to_string(), cable.r_per_m * dx, cable.l_per_m * dx)?;
        }
        if let Some(shield) = shield {
            let c = if k == 0 || k == n { c_sec / 2.0 } else { c_sec };
            net.add_capacitor(&format!("C{k}"), node, shield, c)?;
        }
    }
    finish(&mut net, a, node, r_bob)?;
    Ok(net)
}

/// Quasi-static ratio `γ = (velocity / bandwidth) / length`.
pub fn wavelength_ratio(cable: &CableSpec, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be > 0, got {bandwidth_hz}")));
    }
    Ok(cable.velocity_m_s / bandwidth_hz / cable.length_m)
}

/// Corner frequency `1/(2π R_par C)` of the cable capacitance loaded by both resistors.
pub fn cutoff_frequency(r_low: f64, r_high: f64, total_capacitance: f64) -> Result<f64> {
    if !(r_low > 0.0 && r_high > 0.0) {
        return Err(Error::Domain(format!("resistances must be positive: {r_low}, {r_high}")));
    }
    if !(total_capacitance > 0.0) {
        return Err(Error::Domain("zero capacitance has no finite cutoff".into()));
    }
    let r_par = r_low * r_high / (r_low + r_high);
    Ok(1.0 / (2.0 * std::f64::consts::PI * r_par * total_capacitance))
}

/// Drive the shield with a unity-gain follower of the inner-wire voltage at
/// `tap` instead of grounding it.
pub fn apply_capacitor_killer(netlist: &Netlist, tap: TapEnd) -> Result<Netlist> {
    let probe = match tap {
        TapEnd::Alice => PROBE_U_ALICE,
        TapEnd::Bob => PROBE_U_BOB,
    };
    let node = match netlist.probe(probe).map(|p| &p.target) {
        Some(ProbeTarget::Voltage(n)) => *n,
        _ => return Err(Error::Netlist(format!("netlist has no voltage probe `{probe}`"))),
    };
    apply_capacitor_killer_at(netlist, node)
}

/// [`apply_capacitor_killer`] with an arbitrary inner-wire tap node.
pub fn apply_capacitor_killer_at(netlist: &Netlist, tap: NodeId) -> Result<Netlist> {
    let Some(shield) = netlist.find_node(SHIELD_NODE) else {
        log::warn!("capacitor killer: netlist has no shield rail, leaving it unchanged");
        return Ok(netlist.clone());
    };
    let has_shield_caps = netlist.branches().iter().any(|b| {
        matches!(b.kind, ElementKind::Capacitor(_)) && (b.pos == shield || b.neg == shield)
    });
    if !has_shield_caps {
        log::warn!("capacitor killer: no capacitors on the shield rail, leaving netlist unchanged");
        return Ok(netlist.clone());
    }
    if tap == shield || tap == GROUND || tap >= netlist.node_count() {
        return Err(Error::Netlist("follower tap must be an inner-wire node".into()));
    }
    let mut out = netlist.clone();
    out.remove_branch(SHIELD_SOURCE);
    out.add(FOLLOWER, ElementKind::Follower { control: tap, gain: 1.0 }, shield, GROUND)?;
    Ok(out)
}

fn check_resistors(r_alice: f64, r_bob: f64) -> Result<()> {
    if !(r_alice > 0.0 && r_bob > 0.0) {
        return Err(Error::Config(format!(
            "party resistors must be positive, got {r_alice} and {r_bob}"
        )));
    }
    Ok(())
}

/// Source, series resistor and channel-end node for one party.
fn party(net: &mut Netlist, tag: &str, source: &str, r: f64) -> Result<NodeId> {
    let s = net.node(&format!("s{}", tag.to_lowercase()));
    let end = net.node(&tag.to_lowercase());
    net.add_source(&format!("V{tag}"), s, GROUND, SourceValue::Waveform(source.to_string()))?;
    net.add_resistor(&format!("R{tag}"), s, end, r)?;
    Ok(end)
}

fn shield_rail(net: &mut Netlist) -> Result<NodeId> {
    let shield = net.node(SHIELD_NODE);
    net.add_source(SHIELD_SOURCE, shield, GROUND, SourceValue::Dc(0.0))?;
    Ok(shield)
}

/// Series R then L from `from` to a new node `to`; zero-valued elements are
/// omitted and an all-zero section collapses onto `from`.
fn series(net: &mut Netlist, from: NodeId, to: &str, tag: &str, r: f64, l: f64) -> Result<NodeId> {
    match (r > 0.0, l > 0.0) {
        (false, false) => Ok(from),
        (true, false) => {
            let end = net.node(to);
            net.add_resistor(&format!("Rs{tag}"), from, end, r)?;
            Ok(end)
        }
        (false, true) => {
            let end = net.node(to);
            net.add_inductor(&format!("Ls{tag}"), from, end, l)?;
            Ok(end)
        }
        (true, true) => {
            let mid = net.node(&format!("m{tag}"));
            let end = net.node(to);
            net.add_resistor(&format!("Rs{tag}"), from, mid, r)?;
            net.add_inductor(&format!("Ls{tag}"), mid, end, l)?;
            Ok(end)
        }
    }
}

fn finish(net: &mut Netlist, a: NodeId, b: NodeId, r_bob: f64) -> Result<()> {
    let sb = net.node("sb");
    net.add_source("VB", sb, GROUND, SourceValue::Waveform(SOURCE_BOB.to_string()))?;
    net.add_resistor(RESISTOR_BOB, sb, b, r_bob)?;
    net.add_probe(PROBE_U_ALICE, ProbeTarget::Voltage(a))?;
    net.add_probe(PROBE_I_ALICE, ProbeTarget::Current(RESISTOR_ALICE.into()))?;
    net.add_probe(PROBE_U_BOB, ProbeTarget::Voltage(b))?;
    net.add_probe(PROBE_I_BOB, ProbeTarget::Current(RESISTOR_BOB.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rg58_parameters() {
        let c = CableSpec::rg58(1000.0);
        c.validate().unwrap();
        assert_eq!(c.n_segments, 100);
        assert_eq!(CableSpec::rg58(100.0).n_segments, 10);
        assert_relative_eq!(c.characteristic_impedance(), 50.0, max_relative = 1e-12);
    }

    #[test]
    fn velocity_must_match_lc() {
        let mut c = CableSpec::rg58(10.0);
        c.velocity_m_s = 2.1e8;
        assert!(c.validate().is_err());
        c.velocity_m_s = 2.01e8;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn lumped_uses_half_series_values() {
        let net = build_lumped(1000.0, 9000.0, &CableSpec::rg58(1000.0)).unwrap();
        net.validate_kljn().unwrap();
        assert_eq!(net.branch("Rs1").unwrap().kind, ElementKind::Resistor(10.5));
        assert_relative_eq!(net.total('L'), 125e-6, max_relative = 1e-12);
        assert_relative_eq!(net.total('C'), 100e-9, max_relative = 1e-12);

        let short = build_lumped(1000.0, 9000.0, &CableSpec::rg58(100.0)).unwrap();
        assert_relative_eq!(short.total('C'), 10e-9, max_relative = 1e-12);
    }

    #[test]
    fn zero_capacitance_has_no_capacitor() {
        let c = CableSpec::rg58(1000.0).without_capacitance();
        for net in [build_lumped(1e3, 9e3, &c).unwrap(), build_distributed(1e3, 9e3, &c).unwrap()] {
            assert_eq!(net.count('C'), 0);
            assert!(net.find_node(SHIELD_NODE).is_none());
        }
    }

    #[test]
    fn ideal_cable_collapses_to_one_node() {
        let c = CableSpec { r_per_m: 0.0, l_per_m: 0.0, c_per_m: 0.0, ..CableSpec::rg58(1000.0) };
        let net = build_distributed(1e3, 9e3, &c).unwrap();
        assert_eq!(net.probe(PROBE_U_ALICE).unwrap().target, net.probe(PROBE_U_BOB).unwrap().target);
        assert_eq!(net.branches().len(), 4);
    }

    #[test]
    fn distributed_sums() {
        let net = build_distributed(1000.0, 9000.0, &CableSpec::rg58(1000.0)).unwrap();
        assert_relative_eq!(net.total('C'), 100e-9, max_relative = 1e-12);
        // RA + RB plus the cable.
        assert_relative_eq!(net.total('R') - 10_000.0, 21.0, max_relative = 1e-9);
        assert_relative_eq!(net.total('L'), 250e-6, max_relative = 1e-12);
        assert_eq!(net.count('C'), 101);
    }

    #[test]
    fn single_segment_is_a_pi() {
        let net = build_distributed(1e3, 9e3, &CableSpec::rg58(1000.0).with_segments(1)).unwrap();
        let a = net.find_node("a").unwrap();
        let b = net.find_node("b").unwrap();
        let caps: Vec<_> = net
            .branches()
            .iter()
            .filter_map(|br| match br.kind {
                ElementKind::Capacitor(v) => Some((br.pos, v)),
                _ => None,
            })
            .collect();
        assert_eq!(caps.iter().map(|c| c.0).collect::<Vec<_>>(), vec![a, b]);
        assert!(caps.iter().all(|c| (c.1 - 50e-9).abs() < 1e-20));
    }

    #[test]
    fn gamma_examples() {
        let c = CableSpec::rg58(1000.0);
        assert_relative_eq!(wavelength_ratio(&c, 250e3).unwrap(), 0.8, max_relative = 1e-12);
        assert_relative_eq!(wavelength_ratio(&c, 25e3).unwrap(), 8.0, max_relative = 1e-12);
        assert_relative_eq!(wavelength_ratio(&c, 250.0).unwrap(), 800.0, max_relative = 1e-12);
        assert_relative_eq!(wavelength_ratio(&c, 2e5).unwrap(), 1.0, max_relative = 1e-12);
        assert!(matches!(wavelength_ratio(&c, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cutoff_examples() {
        assert_relative_eq!(cutoff_frequency(1e3, 9e3, 100e-9).unwrap(), 1768.39, max_relative = 1e-5);
        assert_relative_eq!(cutoff_frequency(1e3, 9e3, 10e-9).unwrap(), 17683.9, max_relative = 1e-5);
        let (r, c) = (470.0, 3.3e-9);
        assert_relative_eq!(
            cutoff_frequency(r, r, c).unwrap(),
            1.0 / (std::f64::consts::PI * r * c),
            max_relative = 1e-12
        );
        assert!(matches!(cutoff_frequency(1e3, 9e3, 0.0), Err(Error::Domain(_))));
        assert!(cutoff_frequency(0.0, 9e3, 1e-9).is_err());
    }

    #[test]
    fn killer_rewires_the_shield() {
        let net = build_distributed(1e3, 9e3, &CableSpec::rg58(100.0)).unwrap();
        let killed = apply_capacitor_killer(&net, TapEnd::Alice).unwrap();
        assert!(killed.branch(SHIELD_SOURCE).is_none());
        let a = killed.find_node("a").unwrap();
        assert_eq!(killed.branch(FOLLOWER).unwrap().kind, ElementKind::Follower { control: a, gain: 1.0 });

        let bare = build_distributed(1e3, 9e3, &CableSpec::rg58(100.0).without_capacitance()).unwrap();
        assert_eq!(apply_capacitor_killer(&bare, TapEnd::Alice).unwrap(), bare);
    }

    #[test]
    fn rejects_non_positive_party_resistors() {
        assert!(matches!(build_lumped(0.0, 1.0, &CableSpec::rg58(1.0)), Err(Error::Config(_))));
        assert!(build_distributed(1.0, -1.0, &CableSpec::rg58(1.0)).is_err());
    }
}
