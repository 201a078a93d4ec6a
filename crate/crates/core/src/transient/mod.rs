//! Transient simulation of linear RLC netlists.
//!
//! Nodal analysis with trapezoidal companion models. Grounded voltage sources
//! and followers are not given extra unknowns: the node they drive is
//! eliminated and replaced by an affine expression in the remaining node
//! voltages and source values. The very first step after a reset uses
//! backward Euler, which needs no initial capacitor currents; every later
//! step is trapezoidal.

mod envelope;

use std::collections::{BTreeMap, HashMap};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{ElementKind, Netlist, NodeId, ProbeTarget, SourceValue, GROUND};
use crate::waveform::Waveform;

pub use envelope::{ordering, EnvelopeLu, SparseMatrix};

/// Internal steps per measurement interval used by [`SolverConfig::for_measurement`].
pub const DEFAULT_STEPS_PER_SAMPLE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Trapezoidal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub internal_step_s: f64,
    #[serde(default)]
    pub method: Method,
    /// Relative residual bound for each per-step linear solve.
    pub tolerance: f64,
}

impl SolverConfig {
    pub fn new(internal_step_s: f64) -> Self {
        Self { internal_step_s, method: Method::Trapezoidal, tolerance: 1e-9 }
    }

    /// `t_s / 32`.
    pub fn for_measurement(t_s: f64) -> Self {
        Self::new(t_s / DEFAULT_STEPS_PER_SAMPLE as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.internal_step_s > 0.0 && self.internal_step_s.is_finite()) {
            return Err(Error::Config(format!(
                "internal step must be > 0, got {}",
                self.internal_step_s
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(Error::Config(format!(
                "solver tolerance must be in (0, 1e-6], got {}",
                self.tolerance
            )));
        }
        Ok(())
    }

    /// Internal steps per measurement sample; `t_s` must be a whole multiple
    /// of the internal step.
    pub fn decimation(&self, t_s: f64) -> Result<usize> {
        self.validate()?;
        let ratio = t_s / self.internal_step_s;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-6 * k {
            return Err(Error::Config(format!(
                "measurement interval {t_s} s is not a whole multiple of the internal step {} s",
                self.internal_step_s
            )));
        }
        Ok(k as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub steps: u64,
    pub max_residual: f64,
}

impl SolverDiagnostics {
    pub fn merge(&mut self, other: &SolverDiagnostics) {
        self.steps += other.steps;
        self.max_residual = self.max_residual.max(other.max_residual);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub probes: BTreeMap<String, Waveform>,
    pub diagnostics: SolverDiagnostics,
}

impl TransientResult {
    pub fn probe(&self, name: &str) -> Result<&Waveform> {
        self.probes
            .get(name)
            .ok_or_else(|| Error::Argument(format!("no probe named `{name}`")))
    }
}

/// `sum(free) + sum(sources) + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
struct Affine {
    free: Vec<(usize, f64)>,
    src: Vec<(usize, f64)>,
    constant: f64,
}

impl Affine {
    fn free_node(i: usize) -> Self {
        Self { free: vec![(i, 1.0)], ..Self::default() }
    }

    fn axpy(&mut self, alpha: f64, other: &Affine) {
        for &(i, c) in &other.free {
            push_coef(&mut self.free, i, alpha * c);
        }
        for &(i, c) in &other.src {
            push_coef(&mut self.src, i, alpha * c);
        }
        self.constant += alpha * other.constant;
    }

    fn prune(mut self) -> Self {
        self.free.retain(|&(_, c)| c != 0.0);
        self.src.retain(|&(_, c)| c != 0.0);
        self
    }

    #[inline]
    fn known(&self, src: &[f64]) -> f64 {
        self.src.iter().map(|&(i, c)| c * src[i]).sum::<f64>() + self.constant
    }

    #[inline]
    fn eval(&self, x: &[f64], src: &[f64]) -> f64 {
        self.free.iter().map(|&(i, c)| c * x[i]).sum::<f64>() + self.known(src)
    }
}

fn push_coef(list: &mut Vec<(usize, f64)>, i: usize, c: f64) {
    match list.iter_mut().find(|(j, _)| *j == i) {
        Some((_, v)) => *v += c,
        None => list.push((i, c)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Passive {
    R,
    L,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    BackwardEuler,
    Trapezoidal,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    kind: Passive,
    value: f64,
    /// `v(pos) - v(neg)`.
    diff: Affine,
    pos_row: Option<usize>,
    neg_row: Option<usize>,
    v_prev: f64,
    i_prev: f64,
}

impl Element {
    fn conductance(&self, mode: Mode, h: f64) -> f64 {
        match (self.kind, mode) {
            (Passive::R, _) => 1.0 / self.value,
            (Passive::C, Mode::Trapezoidal) => 2.0 * self.value / h,
            (Passive::C, Mode::BackwardEuler) => self.value / h,
            (Passive::L, Mode::Trapezoidal) => h / (2.0 * self.value),
            (Passive::L, Mode::BackwardEuler) => h / self.value,
        }
    }

    /// History current of the companion model, `i = g v + ieq`.
    fn history(&self, g: f64, mode: Mode) -> f64 {
        match (self.kind, mode) {
            (Passive::R, _) => 0.0,
            (Passive::C, Mode::Trapezoidal) => -(g * self.v_prev + self.i_prev),
            (Passive::C, Mode::BackwardEuler) => -g * self.v_prev,
            (Passive::L, Mode::Trapezoidal) => self.i_prev + g * self.v_prev,
            (Passive::L, Mode::BackwardEuler) => self.i_prev,
        }
    }

    fn energy(&self) -> f64 {
        match self.kind {
            Passive::R => 0.0,
            Passive::C => 0.5 * self.value * self.v_prev * self.v_prev,
            Passive::L => 0.5 * self.value * self.i_prev * self.i_prev,
        }
    }
}

#[derive(Debug, Clone)]
enum ProbeTap {
    Node(Affine),
    Element(usize),
}

#[derive(Debug, Clone)]
struct Factored {
    lu: EnvelopeLu,
    csr: envelope::Csr,
    /// Per-element conductance used when assembling this matrix.
    g: Vec<f64>,
}

/// Stateful time stepper for one netlist.
#[derive(Debug, Clone)]
pub struct TransientSolver {
    config: SolverConfig,
    free_names: Vec<String>,
    source_names: Vec<String>,
    elements: Vec<Element>,
    probe_names: Vec<String>,
    probe_taps: Vec<ProbeTap>,
    perm: Vec<usize>,
    /// Always `Some` outside of `step`.
    trap: Option<Factored>,
    cache: HashMap<Vec<u64>, Factored>,
    x: Vec<f64>,
    src: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
    resid: Vec<f64>,
    fresh: bool,
    time_s: f64,
    diagnostics: SolverDiagnostics,
}

impl TransientSolver {
    pub fn new(netlist: &Netlist, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let n_nodes = netlist.node_count();

        // Which nodes are fixed by a grounded source or follower.
        let mut driver: Vec<Option<(usize, f64)>> = vec![None; n_nodes];
        let mut source_names: Vec<String> = Vec::new();
        for (bi, b) in netlist.branches().iter().enumerate() {
            if !matches!(b.kind, ElementKind::VoltageSource(_) | ElementKind::Follower { .. }) {
                continue;
            }
            let (node, sign) = if b.neg == GROUND {
                (b.pos, 1.0)
            } else if b.pos == GROUND {
                (b.neg, -1.0)
            } else {
                return Err(Error::Netlist(format!(
                    "source `{}` is floating; sources must have one terminal on ground",
                    b.name
                )));
            };
            if driver[node].is_some() {
                return Err(Error::Netlist(format!(
                    "node `{}` is driven by more than one source",
                    netlist.node_name(node)
                )));
            }
            driver[node] = Some((bi, sign));
            if let ElementKind::VoltageSource(SourceValue::Waveform(w)) = &b.kind {
                if !source_names.contains(w) {
                    source_names.push(w.clone());
                }
            }
        }

        let mut free_index = vec![usize::MAX; n_nodes];
        let mut free_names = Vec::new();
        for node in 1..n_nodes {
            if driver[node].is_none() {
                free_index[node] = free_names.len();
                free_names.push(netlist.node_name(node).to_string());
            }
        }

        // Resolve every node voltage to an affine expression.
        let mut exprs: Vec<Option<Affine>> = vec![None; n_nodes];
        exprs[GROUND] = Some(Affine::default());
        for node in 1..n_nodes {
            resolve(node, netlist, &driver, &free_index, &source_names, &mut exprs, 0)?;
        }
        let expr = |n: NodeId| exprs[n].clone().expect("resolved");

        let row = |n: NodeId| (free_index[n] != usize::MAX).then_some(free_index[n]);
        let mut elements = Vec::new();
        for b in netlist.branches() {
            let (kind, value) = match b.kind {
                ElementKind::Resistor(v) => (Passive::R, v),
                ElementKind::Inductor(v) => (Passive::L, v),
                ElementKind::Capacitor(v) => (Passive::C, v),
                _ => continue,
            };
            let mut diff = expr(b.pos);
            diff.axpy(-1.0, &expr(b.neg));
            elements.push(Element {
                name: b.name.clone(),
                kind,
                value,
                diff: diff.prune(),
                pos_row: row(b.pos),
                neg_row: row(b.neg),
                v_prev: 0.0,
                i_prev: 0.0,
            });
        }

        let mut probe_names = Vec::new();
        let mut probe_taps = Vec::new();
        for p in netlist.probes() {
            let tap = match &p.target {
                ProbeTarget::Voltage(n) => ProbeTap::Node(expr(*n)),
                ProbeTarget::Current(b) => ProbeTap::Element(
                    elements
                        .iter()
                        .position(|e| &e.name == b)
                        .ok_or_else(|| Error::Netlist(format!("probe `{}`: no branch `{b}`", p.name)))?,
                ),
            };
            probe_names.push(p.name.clone());
            probe_taps.push(tap);
        }

        let n_free = free_names.len();
        let h = config.internal_step_s;
        let g: Vec<f64> = elements.iter().map(|e| e.conductance(Mode::Trapezoidal, h)).collect();
        let a = assemble(n_free, &elements, &g);
        let perm = ordering(&a);
        let trap = factor(&a, &perm, g, &free_names)?;
        Ok(Self {
            config: config.clone(),
            free_names,
            x: vec![0.0; n_free],
            src: vec![0.0; source_names.len()],
            source_names,
            elements,
            probe_names,
            probe_taps,
            perm,
            trap: Some(trap),
            cache: HashMap::new(),
            rhs: vec![0.0; n_free],
            work: Vec::with_capacity(n_free),
            resid: vec![0.0; n_free],
            fresh: true,
            time_s: 0.0,
            diagnostics: SolverDiagnostics::default(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Names of the externally supplied source waveforms, in the order
    /// expected by [`TransientSolver::run`].
    pub fn source_names(&self) -> &[String] {
        &self.source_names
    }

    pub fn source_index(&self, name: &str) -> Option<usize> {
        self.source_names.iter().position(|s| s == name)
    }

    pub fn probe_names(&self) -> &[String] {
        &self.probe_names
    }

    pub fn unknowns(&self) -> usize {
        self.free_names.len()
    }

    pub fn time_s(&self) -> f64 {
        self.time_s
    }

    pub fn diagnostics(&self) -> SolverDiagnostics {
        self.diagnostics
    }

    /// Zero all state (capacitor voltages, inductor currents) and restart at t = 0.
    pub fn reset(&mut self) {
        for e in &mut self.elements {
            e.v_prev = 0.0;
            e.i_prev = 0.0;
        }
        self.x.iter_mut().for_each(|v| *v = 0.0);
        self.src.iter_mut().for_each(|v| *v = 0.0);
        self.fresh = true;
        self.time_s = 0.0;
    }

    /// Total energy stored in capacitors and inductors.
    pub fn stored_energy(&self) -> f64 {
        self.elements.iter().map(Element::energy).sum()
    }

    /// Change a resistor's value while keeping the dynamic state.
    /// Factorizations are cached per resistor-value combination.
    pub fn set_resistance(&mut self, name: &str, ohms: f64) -> Result<()> {
        if !(ohms > 0.0 && ohms.is_finite()) {
            return Err(Error::Config(format!("resistance must be positive, got {ohms}")));
        }
        let idx = self
            .elements
            .iter()
            .position(|e| e.name == name && e.kind == Passive::R)
            .ok_or_else(|| Error::Netlist(format!("no resistor named `{name}`")))?;
        if self.elements[idx].value == ohms {
            return Ok(());
        }
        let old_key = self.resistor_key();
        self.elements[idx].value = ohms;
        let new_key = self.resistor_key();
        let next = match self.cache.remove(&new_key) {
            Some(f) => f,
            None => self.factor_mode(Mode::Trapezoidal)?,
        };
        if let Some(prev) = self.trap.replace(next) {
            self.cache.insert(old_key, prev);
        }
        Ok(())
    }

    fn resistor_key(&self) -> Vec<u64> {
        self.elements
            .iter()
            .filter(|e| e.kind == Passive::R)
            .map(|e| e.value.to_bits())
            .collect()
    }

    fn factor_mode(&self, mode: Mode) -> Result<Factored> {
        let h = self.config.internal_step_s;
        let g: Vec<f64> = self.elements.iter().map(|e| e.conductance(mode, h)).collect();
        let a = assemble(self.free_names.len(), &self.elements, &g);
        factor(&a, &self.perm, g, &self.free_names)
    }

    /// Advance one internal step; `sources` holds each source's value at the
    /// end of the step.
    pub fn step(&mut self, sources: &[f64]) -> Result<()> {
        if sources.len() != self.src.len() {
            return Err(Error::Argument(format!(
                "expected {} source values, got {}",
                self.src.len(),
                sources.len()
            )));
        }
        self.src.copy_from_slice(sources);
        if self.fresh {
            let be = self.factor_mode(Mode::BackwardEuler)?;
            self.advance(&be, Mode::BackwardEuler)?;
            self.fresh = false;
        } else {
            let trap = self.trap.take().expect("trapezoidal factorization present");
            let r = self.advance(&trap, Mode::Trapezoidal);
            self.trap = Some(trap);
            r?;
        }
        Ok(())
    }

    fn advance(&mut self, f: &Factored, mode: Mode) -> Result<()> {
        self.rhs.iter_mut().for_each(|v| *v = 0.0);
        for (e, &g) in self.elements.iter().zip(&f.g) {
            let contrib = g * e.diff.known(&self.src) + e.history(g, mode);
            if let Some(r) = e.pos_row {
                self.rhs[r] -= contrib;
            }
            if let Some(r) = e.neg_row {
                self.rhs[r] += contrib;
            }
        }
        f.lu.solve(&self.rhs, &mut self.x, &mut self.work);
        let (mut res, scale) = f.csr.residual(&self.x, &self.rhs, &mut self.resid);
        let rhs_max = self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let denom = scale + rhs_max;
        let mut rel = if denom > 0.0 { res / denom } else { 0.0 };
        if rel > self.config.tolerance {
            // One step of iterative refinement.
            let mut dx = vec![0.0; self.x.len()];
            f.lu.solve(&self.resid, &mut dx, &mut self.work);
            self.x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            (res, _) = f.csr.residual(&self.x, &self.rhs, &mut self.resid);
            rel = if denom > 0.0 { res / denom } else { 0.0 };
        }
        self.diagnostics.max_residual = self.diagnostics.max_residual.max(rel);
        self.diagnostics.steps += 1;
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: self.diagnostics.steps });
        }
        for (e, &g) in self.elements.iter_mut().zip(&f.g) {
            let v = e.diff.eval(&self.x, &self.src);
            let i = g * v + e.history(g, mode);
            e.v_prev = v;
            e.i_prev = i;
        }
        self.time_s += self.config.internal_step_s;
        Ok(())
    }

    /// Current value of one probe.
    pub fn probe_value(&self, index: usize) -> f64 {
        match &self.probe_taps[index] {
            ProbeTap::Node(expr) => expr.eval(&self.x, &self.src),
            ProbeTap::Element(e) => self.elements[*e].i_prev,
        }
    }

    /// Run `n_steps` steps and record every probe after each `decimation`-th
    /// step. `sources[k]` is one waveform per entry of [`Self::source_names`].
    pub fn run(&mut self, sources: &[&[f64]], n_steps: usize, decimation: usize) -> Result<Vec<Vec<f64>>> {
        if sources.len() != self.src.len() {
            return Err(Error::Argument(format!(
                "expected {} source waveforms ({:?}), got {}",
                self.src.len(),
                self.source_names,
                sources.len()
            )));
        }
        if let Some(s) = sources.iter().find(|s| s.len() < n_steps) {
            return Err(Error::Argument(format!(
                "source waveform has {} samples, {n_steps} steps requested",
                s.len()
            )));
        }
        if decimation == 0 {
            return Err(Error::Argument("decimation must be >= 1".into()));
        }
        let n_probes = self.probe_taps.len();
        let mut out = vec![Vec::with_capacity(n_steps / decimation); n_probes];
        let mut values = vec![0.0; sources.len()];
        for k in 0..n_steps {
            for (v, s) in values.iter_mut().zip(sources) {
                *v = s[k];
            }
            self.step(&values)?;
            if (k + 1) % decimation == 0 {
                for (p, o) in out.iter_mut().enumerate() {
                    o.push(self.probe_value(p));
                }
            }
        }
        Ok(out)
    }
}

fn resolve(
    node: NodeId,
    netlist: &Netlist,
    driver: &[Option<(usize, f64)>],
    free_index: &[usize],
    source_names: &[String],
    exprs: &mut Vec<Option<Affine>>,
    depth: usize,
) -> Result<Affine> {
    if let Some(e) = &exprs[node] {
        return Ok(e.clone());
    }
    if depth > netlist.node_count() {
        return Err(Error::Netlist("controlled sources form a cycle".into()));
    }
    let e = match driver[node] {
        None => Affine::free_node(free_index[node]),
        Some((bi, sign)) => match &netlist.branches()[bi].kind {
            ElementKind::VoltageSource(SourceValue::Dc(v)) => Affine { constant: sign * v, ..Affine::default() },
            ElementKind::VoltageSource(SourceValue::Waveform(w)) => {
                let i = source_names.iter().position(|s| s == w).expect("registered");
                Affine { src: vec![(i, sign)], ..Affine::default() }
            }
            ElementKind::Follower { control, gain } => {
                let inner = resolve(*control, netlist, driver, free_index, source_names, exprs, depth + 1)?;
                let mut e = Affine::default();
                e.axpy(sign * gain, &inner);
                e
            }
            _ => unreachable!("only sources drive nodes"),
        },
    };
    exprs[node] = Some(e.clone());
    Ok(e)
}

fn assemble(n_free: usize, elements: &[Element], g: &[f64]) -> SparseMatrix {
    let mut a = SparseMatrix::new(n_free);
    for (e, &g) in elements.iter().zip(g) {
        for (row, sign) in [(e.pos_row, 1.0), (e.neg_row, -1.0)] {
            if let Some(r) = row {
                for &(j, c) in &e.diff.free {
                    a.add(r, j, sign * g * c);
                }
            }
        }
    }
    a
}

fn factor(a: &SparseMatrix, perm: &[usize], g: Vec<f64>, names: &[String]) -> Result<Factored> {
    let lu = EnvelopeLu::factor(a, perm.to_vec())
        .map_err(|envelope::SingularPivot(i)| Error::Singular { node: names[i].clone() })?;
    Ok(Factored { lu, csr: a.to_csr(), g })
}

/// One-shot transient run from zero initial conditions.
///
/// Every waveform source in the netlist must be supplied at the internal
/// step; sample `k` is the value at `t = (k + 1) h`. Probes are returned at
/// `t_s`, `2 t_s`, ...
pub fn transient_solve(
    netlist: &Netlist,
    sources: &HashMap<String, Waveform>,
    config: &SolverConfig,
    duration_s: f64,
    t_s: f64,
) -> Result<TransientResult> {
    let decimation = config.decimation(t_s)?;
    let h = config.internal_step_s;
    let n_steps = (duration_s / h).round() as usize;
    if n_steps == 0 {
        return Err(Error::Argument(format!("duration {duration_s} s is shorter than one step")));
    }
    let mut solver = TransientSolver::new(netlist, config)?;
    let mut inputs: Vec<&[f64]> = Vec::new();
    for name in solver.source_names() {
        let w = sources
            .get(name)
            .ok_or_else(|| Error::Argument(format!("no waveform supplied for source `{name}`")))?;
        if ((w.sample_interval_s() - h) / h).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "source `{name}` is sampled at {} s, solver step is {h} s",
                w.sample_interval_s()
            )));
        }
        inputs.push(w.samples());
    }
    let traces = solver.run(&inputs, n_steps, decimation)?;
    let t0 = decimation as f64 * h;
    let mut probes = BTreeMap::new();
    for (name, samples) in solver.probe_names().iter().zip(traces) {
        if samples.is_empty() {
            return Err(Error::Argument(format!("duration {duration_s} s is shorter than t_s = {t_s} s")));
        }
        probes.insert(name.clone(), Waveform::new(samples, t_s, t0)?);
    }
    Ok(TransientResult { probes, diagnostics: solver.diagnostics() })
}

/// Complex gain from a unit cosine on `source` to `probe` at `f_hz`.
///
/// All other sources are held at zero. The first `settle_s` seconds are
/// discarded, then `y = a cos ωt + b sin ωt + c` is least-squares fitted
/// over at least four periods and the gain is `a - i b`.
pub fn frequency_response_check(
    netlist: &Netlist,
    source: &str,
    probe: &str,
    f_hz: f64,
    config: &SolverConfig,
    settle_s: f64,
) -> Result<Complex64> {
    let h = config.internal_step_s;
    if !(f_hz > 0.0) || f_hz >= 0.5 / h {
        return Err(Error::Argument(format!(
            "frequency {f_hz} Hz must lie in (0, {}) for step {h} s",
            0.5 / h
        )));
    }
    let mut solver = TransientSolver::new(netlist, config)?;
    let si = solver
        .source_index(source)
        .ok_or_else(|| Error::Argument(format!("no source named `{source}`")))?;
    let pi = solver
        .probe_names()
        .iter()
        .position(|p| p == probe)
        .ok_or_else(|| Error::Argument(format!("no probe named `{probe}`")))?;
    let omega = 2.0 * std::f64::consts::PI * f_hz;
    let settle = (settle_s.max(0.0) / h).ceil() as usize;
    let measure = ((4.0 / f_hz) / h).ceil().max(64.0) as usize;
    let mut values = vec![0.0; solver.source_names().len()];
    // Normal equations for [cos, sin, 1].
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for k in 0..settle + measure {
        let t = (k + 1) as f64 * h;
        values[si] = (omega * t).cos();
        solver.step(&values)?;
        if k >= settle {
            let basis = [(omega * t).cos(), (omega * t).sin(), 1.0];
            let y = solver.probe_value(pi);
            for i in 0..3 {
                rhs[i] += basis[i] * y;
                for j in 0..3 {
                    m[i][j] += basis[i] * basis[j];
                }
            }
        }
    }
    let [a, b, _] = solve3(m, rhs).ok_or_else(|| Error::Argument("degenerate sinusoid fit".into()))?;
    Ok(Complex64::new(a, -b))
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for i in 0..3 {
            mc[i][c] = r[i];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

#[cfg(test)]
mod tests;
