//! Circuit netlists and their line-oriented text form.
//!
//! ```text
//! * comment
//! R RA sa a 1000
//! V VA sa 0 @alice
//! C C3 n3 shield 1e-9
//! E EKILL shield 0 a
//! .probe U_cha v a
//! .probe I_cha i RA
//! ```
//!
//! Element lines are `KIND name node_a node_b value_or_source`. Voltage
//! sources take a DC value or `@name` for an externally supplied waveform;
//! `E` is a voltage follower whose last field is `node` or `gain*node`.
//! Node `0` is ground.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub const GROUND: NodeId = 0;
pub const GROUND_NAME: &str = "0";

pub const PROBE_U_ALICE: &str = "U_cha";
pub const PROBE_I_ALICE: &str = "I_cha";
pub const PROBE_U_BOB: &str = "U_chb";
pub const PROBE_I_BOB: &str = "I_chb";

#[derive(Debug, Clone, PartialEq)]
pub enum SourceValue {
    Dc(f64),
    /// Named waveform supplied at solve time.
    Waveform(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor(f64),
    Inductor(f64),
    Capacitor(f64),
    /// Independent voltage source, `v(pos) - v(neg) = value`.
    VoltageSource(SourceValue),
    /// Ideal voltage-controlled voltage source, `v(pos) - v(neg) = gain * v(control)`.
    Follower { control: NodeId, gain: f64 },
}

impl ElementKind {
    pub fn letter(&self) -> char {
        match self {
            ElementKind::Resistor(_) => 'R',
            ElementKind::Inductor(_) => 'L',
            ElementKind::Capacitor(_) => 'C',
            ElementKind::VoltageSource(_) => 'V',
            ElementKind::Follower { .. } => 'E',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub kind: ElementKind,
    pub pos: NodeId,
    pub neg: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeTarget {
    Voltage(NodeId),
    /// Current through a two-terminal passive branch, flowing pos → neg.
    Current(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub target: ProbeTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    nodes: Vec<String>,
    node_index: HashMap<String, NodeId>,
    branches: Vec<Branch>,
    probes: Vec<Probe>,
}

impl Default for Netlist {
    fn default() -> Self {
        Self::new()
    }
}

impl Netlist {
    pub fn new() -> Self {
        let mut node_index = HashMap::new();
        node_index.insert(GROUND_NAME.to_string(), GROUND);
        Self {
            nodes: vec![GROUND_NAME.to_string()],
            node_index,
            branches: Vec::new(),
            probes: Vec::new(),
        }
    }

    /// Look up a node by name, creating it if needed.
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.node_index.get(name) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(name.to_string());
        self.node_index.insert(name.to_string(), id);
        id
    }

    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, name: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.name == name)
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn probe(&self, name: &str) -> Option<&Probe> {
        self.probes.iter().find(|p| p.name == name)
    }

    pub fn add(&mut self, name: &str, kind: ElementKind, pos: NodeId, neg: NodeId) -> Result<()> {
        if self.branch(name).is_some() {
            return Err(Error::Netlist(format!("duplicate branch name `{name}`")));
        }
        for node in [pos, neg] {
            if node >= self.nodes.len() {
                return Err(Error::Netlist(format!("branch `{name}` references unknown node {node}")));
            }
        }
        if pos == neg {
            return Err(Error::Netlist(format!("branch `{name}` has both terminals on one node")));
        }
        match &kind {
            ElementKind::Resistor(v) | ElementKind::Inductor(v) | ElementKind::Capacitor(v) => {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::Netlist(format!(
                        "branch `{name}` needs a positive finite value, got {v}"
                    )));
                }
            }
            ElementKind::VoltageSource(SourceValue::Dc(v)) if !v.is_finite() => {
                return Err(Error::Netlist(format!("source `{name}` has non-finite value")));
            }
            ElementKind::Follower { control, gain } if *control >= self.nodes.len() || !gain.is_finite() => {
                return Err(Error::Netlist(format!("follower `{name}` is malformed")));
            }
            _ => {}
        }
        self.branches.push(Branch { name: name.to_string(), kind, pos, neg });
        Ok(())
    }

    pub fn add_resistor(&mut self, name: &str, pos: NodeId, neg: NodeId, ohms: f64) -> Result<()> {
        self.add(name, ElementKind::Resistor(ohms), pos, neg)
    }

    pub fn add_inductor(&mut self, name: &str, pos: NodeId, neg: NodeId, henry: f64) -> Result<()> {
        self.add(name, ElementKind::Inductor(henry), pos, neg)
    }

    pub fn add_capacitor(&mut self, name: &str, pos: NodeId, neg: NodeId, farad: f64) -> Result<()> {
        self.add(name, ElementKind::Capacitor(farad), pos, neg)
    }

    pub fn add_source(&mut self, name: &str, pos: NodeId, neg: NodeId, value: SourceValue) -> Result<()> {
        self.add(name, ElementKind::VoltageSource(value), pos, neg)
    }

    pub fn add_probe(&mut self, name: &str, target: ProbeTarget) -> Result<()> {
        if self.probe(name).is_some() {
            return Err(Error::Netlist(format!("duplicate probe `{name}`")));
        }
        match &target {
            ProbeTarget::Voltage(n) if *n >= self.nodes.len() => {
                return Err(Error::Netlist(format!("probe `{name}` references unknown node")));
            }
            ProbeTarget::Current(b) => match self.branch(b).map(|br| &br.kind) {
                Some(ElementKind::Resistor(_) | ElementKind::Inductor(_) | ElementKind::Capacitor(_)) => {}
                Some(_) => {
                    return Err(Error::Netlist(format!(
                        "probe `{name}`: current taps are supported on R, L and C branches only"
                    )))
                }
                None => return Err(Error::Netlist(format!("probe `{name}` references unknown branch `{b}`"))),
            },
            _ => {}
        }
        self.probes.push(Probe { name: name.to_string(), target });
        Ok(())
    }

    pub fn remove_branch(&mut self, name: &str) -> Option<Branch> {
        let idx = self.branches.iter().position(|b| b.name == name)?;
        Some(self.branches.remove(idx))
    }

    /// Change the value of an existing resistor.
    pub fn set_resistance(&mut self, name: &str, ohms: f64) -> Result<()> {
        if !(ohms > 0.0 && ohms.is_finite()) {
            return Err(Error::Config(format!("resistance must be positive, got {ohms}")));
        }
        match self.branches.iter_mut().find(|b| b.name == name) {
            Some(Branch { kind: ElementKind::Resistor(v), .. }) => {
                *v = ohms;
                Ok(())
            }
            _ => Err(Error::Netlist(format!("no resistor named `{name}`"))),
        }
    }

    /// Sum of all values of one passive kind (`'R'`, `'L'` or `'C'`).
    pub fn total(&self, letter: char) -> f64 {
        self.branches
            .iter()
            .filter_map(|b| match b.kind {
                ElementKind::Resistor(v) if letter == 'R' => Some(v),
                ElementKind::Inductor(v) if letter == 'L' => Some(v),
                ElementKind::Capacitor(v) if letter == 'C' => Some(v),
                _ => None,
            })
            .sum()
    }

    pub fn count(&self, letter: char) -> usize {
        self.branches.iter().filter(|b| b.kind.letter() == letter).count()
    }

    /// Names of the externally supplied source waveforms.
    pub fn waveform_sources(&self) -> Vec<&str> {
        self.branches
            .iter()
            .filter_map(|b| match &b.kind {
                ElementKind::VoltageSource(SourceValue::Waveform(w)) => Some(w.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Check that the four channel probes used by the key exchange exist.
    pub fn validate_kljn(&self) -> Result<()> {
        for p in [PROBE_U_ALICE, PROBE_I_ALICE, PROBE_U_BOB, PROBE_I_BOB] {
            if self.probe(p).is_none() {
                return Err(Error::Netlist(format!("missing channel probe `{p}`")));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for b in &self.branches {
            let value = match &b.kind {
                ElementKind::Resistor(v) | ElementKind::Inductor(v) | ElementKind::Capacitor(v) => fmt_value(*v),
                ElementKind::VoltageSource(SourceValue::Dc(v)) => fmt_value(*v),
                ElementKind::VoltageSource(SourceValue::Waveform(w)) => format!("@{w}"),
                ElementKind::Follower { control, gain } => {
                    if *gain == 1.0 {
                        self.nodes[*control].clone()
                    } else {
                        format!("{}*{}", fmt_value(*gain), self.nodes[*control])
                    }
                }
            };
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                b.kind.letter(),
                b.name,
                self.nodes[b.pos],
                self.nodes[b.neg],
                value
            );
        }
        for p in &self.probes {
            let _ = match &p.target {
                ProbeTarget::Voltage(n) => writeln!(out, ".probe {} v {}", p.name, self.nodes[*n]),
                ProbeTarget::Current(b) => writeln!(out, ".probe {} i {}", p.name, b),
            };
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut net = Netlist::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('*') {
                continue;
            }
            let perr = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == ".probe" {
                if fields.len() != 4 {
                    return Err(perr("expected `.probe NAME v|i TARGET`".into()));
                }
                let target = match fields[2] {
                    "v" => ProbeTarget::Voltage(
                        net.find_node(fields[3])
                            .ok_or_else(|| perr(format!("unknown node `{}`", fields[3])))?,
                    ),
                    "i" => ProbeTarget::Current(fields[3].to_string()),
                    other => return Err(perr(format!("unknown probe kind `{other}`"))),
                };
                net.add_probe(fields[1], target)
                    .map_err(|e| perr(e.to_string()))?;
                continue;
            }
            if fields.len() != 5 {
                return Err(perr(format!("expected 5 fields, found {}", fields.len())));
            }
            let (name, pos, neg, value) = (fields[1], net.node(fields[2]), net.node(fields[3]), fields[4]);
            let number = |s: &str| s.parse::<f64>().map_err(|_| perr(format!("bad number `{s}`")));
            let kind = match fields[0] {
                "R" => ElementKind::Resistor(number(value)?),
                "L" => ElementKind::Inductor(number(value)?),
                "C" => ElementKind::Capacitor(number(value)?),
                "V" => match value.strip_prefix('@') {
                    Some(w) if !w.is_empty() => ElementKind::VoltageSource(SourceValue::Waveform(w.to_string())),
                    Some(_) => return Err(perr("empty waveform name".into())),
                    None => ElementKind::VoltageSource(SourceValue::Dc(number(value)?)),
                },
                "E" => {
                    let (gain, ctrl) = match value.split_once('*') {
                        Some((g, n)) => (number(g)?, n),
                        None => (1.0, value),
                    };
                    ElementKind::Follower { control: net.node(ctrl), gain }
                }
                other => return Err(perr(format!("unknown element kind `{other}`"))),
            };
            net.add(name, kind, pos, neg).map_err(|e| perr(e.to_string()))?;
        }
        Ok(net)
    }
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divider() -> Netlist {
        let mut n = Netlist::new();
        let s = n.node("s");
        let m = n.node("m");
        n.add_source("V1", s, GROUND, SourceValue::Dc(1.0)).unwrap();
        n.add_resistor("R1", s, m, 1000.0).unwrap();
        n.add_resistor("R2", m, GROUND, 9000.0).unwrap();
        n.add_probe("out", ProbeTarget::Voltage(m)).unwrap();
        n.add_probe("i1", ProbeTarget::Current("R1".into())).unwrap();
        n
    }

    #[test]
    fn text_round_trip() {
        let mut n = divider();
        let m = n.find_node("m").unwrap();
        let sh = n.node("shield");
        n.add_capacitor("C1", m, sh, 1e-9).unwrap();
        n.add("E1", ElementKind::Follower { control: m, gain: 0.5 }, sh, GROUND).unwrap();
        let w = n.node("w");
        n.add_source("VW", w, GROUND, SourceValue::Waveform("drive".into())).unwrap();
        n.add_resistor("RW", w, m, 50.0).unwrap();
        let text = n.to_text();
        assert!(text.contains("R R1 s m 1000\n"));
        assert!(text.contains("C C1 m shield 1e-9\n"));
        assert!(text.contains("E E1 shield 0 0.5*m\n"));
        assert_eq!(Netlist::from_text(&text).unwrap(), n);
    }

    #[test]
    fn rejects_bad_branches() {
        let mut n = divider();
        let m = n.find_node("m").unwrap();
        assert!(n.add_resistor("R1", m, GROUND, 1.0).is_err(), "duplicate");
        assert!(n.add_resistor("Rx", m, 99, 1.0).is_err(), "unknown node");
        assert!(n.add_capacitor("Cx", m, GROUND, 0.0).is_err(), "zero value");
        assert!(n.add_resistor("Ry", m, m, 1.0).is_err(), "self loop");
        assert!(n.add_probe("bad", ProbeTarget::Current("V1".into())).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Netlist::from_text("* hdr\nR R1 a 0 1k\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(Netlist::from_text("Q Q1 a 0 1\n").is_err());
        assert!(Netlist::from_text(".probe x v nowhere\n").is_err());
    }

    #[test]
    fn totals_and_resistance_updates() {
        let mut n = divider();
        assert_eq!(n.total('R'), 10_000.0);
        n.set_resistance("R2", 1000.0).unwrap();
        assert_eq!(n.total('R'), 2000.0);
        assert!(n.set_resistance("V1", 1.0).is_err());
        assert!(n.validate_kljn().is_err());
    }
}
