use super::*;
use crate::cable::{self, CableSpec, TapEnd};
use crate::netlist::{Netlist, ProbeTarget, SourceValue, GROUND};
use crate::noise::{self, NoiseSpec};
use crate::waveform::nrmsd;

fn step_source(net: &mut Netlist, r: f64) -> (NodeId, NodeId) {
    let s = net.node("s");
    let out = net.node("out");
    net.add_source("V1", s, GROUND, SourceValue::Waveform("in".into())).unwrap();
    net.add_resistor("R1", s, out, r).unwrap();
    net.add_probe("v", ProbeTarget::Voltage(out)).unwrap();
    (s, out)
}

fn sources(pairs: &[(&str, Waveform)]) -> HashMap<String, Waveform> {
    pairs.iter().map(|(n, w)| (n.to_string(), w.clone())).collect()
}

#[test]
fn resistive_divider_holds_at_every_sample() {
    let mut net = Netlist::new();
    let (_, out) = step_source(&mut net, 1000.0);
    net.add_resistor("R2", out, GROUND, 9000.0).unwrap();
    let cfg = SolverConfig::new(1e-4);
    let src = sources(&[("in", Waveform::constant(1.0, 1000, 1e-4).unwrap())]);
    let r = transient_solve(&net, &src, &cfg, 0.1, 1e-3).unwrap();
    let v = r.probe("v").unwrap();
    assert_eq!(v.len(), 100);
    for &x in v.samples() {
        assert!((x - 0.9).abs() < 1e-12, "{x}");
    }
}

#[test]
fn rc_step_matches_exponential() {
    let (r, c) = (900.0, 100e-9);
    let tau = r * c;
    let h = tau / 100.0;
    let mut net = Netlist::new();
    let (_, out) = step_source(&mut net, r);
    net.add_capacitor("C1", out, GROUND, c).unwrap();
    let n = 1000;
    let cfg = SolverConfig::new(h);
    let src = sources(&[("in", Waveform::constant(1.0, n, h).unwrap())]);
    let res = transient_solve(&net, &src, &cfg, n as f64 * h, h).unwrap();
    let v = res.probe("v").unwrap();
    let worst = v
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let t = (k + 1) as f64 * h;
            (x - (1.0 - (-t / tau).exp())).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max deviation {worst}");
    assert!(res.diagnostics.max_residual < 1e-12);
}

#[test]
fn series_rlc_step_matches_damped_oscillation() {
    let (r, l, c): (f64, f64, f64) = (20.0, 1e-3, 1e-6);
    let alpha = r / (2.0 * l);
    let wd = (1.0 / (l * c) - alpha * alpha).sqrt();
    let h = (2.0 * std::f64::consts::PI / wd) / 400.0;
    let mut net = Netlist::new();
    let (_, mid) = step_source(&mut net, r);
    let out = net.node("cap");
    net.add_inductor("L1", mid, out, l).unwrap();
    net.add_capacitor("C1", out, GROUND, c).unwrap();
    net.add_probe("vc", ProbeTarget::Voltage(out)).unwrap();
    let n = 4000;
    let src = sources(&[("in", Waveform::constant(1.0, n, h).unwrap())]);
    let res = transient_solve(&net, &src, &SolverConfig::new(h), n as f64 * h, h).unwrap();
    let worst = res
        .probe("vc")
        .unwrap()
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let t = (k + 1) as f64 * h;
            let exact = 1.0 - (-alpha * t).exp() * ((wd * t).cos() + alpha / wd * (wd * t).sin());
            (x - exact).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 2e-3, "max deviation {worst}");
}

#[test]
fn silent_sources_give_silent_probes() {
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(100.0)).unwrap();
    let h = 1e-3 / 32.0;
    let z = Waveform::constant(0.0, 3200, h).unwrap();
    let src = sources(&[("alice", z.clone()), ("bob", z)]);
    let res = transient_solve(&net, &src, &SolverConfig::new(h), 0.1, 1e-3).unwrap();
    for w in res.probes.values() {
        assert!(w.samples().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn floating_node_is_named() {
    let mut net = Netlist::new();
    let (_, out) = step_source(&mut net, 100.0);
    net.add_resistor("R2", out, GROUND, 100.0).unwrap();
    let lonely = net.node("island");
    let other = net.node("island2");
    net.add_inductor("Lx", lonely, other, 1e-3).unwrap();
    match TransientSolver::new(&net, &SolverConfig::new(1e-6)) {
        Err(Error::Singular { node }) => assert!(node.starts_with("island"), "{node}"),
        other => panic!("expected singular error, got {other:?}"),
    }
}

#[test]
fn floating_sources_are_rejected() {
    let mut net = Netlist::new();
    let a = net.node("a");
    let b = net.node("b");
    net.add_source("V1", a, b, SourceValue::Dc(1.0)).unwrap();
    net.add_resistor("R1", a, GROUND, 1.0).unwrap();
    net.add_resistor("R2", b, GROUND, 1.0).unwrap();
    assert!(matches!(TransientSolver::new(&net, &SolverConfig::new(1e-6)), Err(Error::Netlist(_))));
}

#[test]
fn config_validation() {
    assert!(SolverConfig::new(0.0).validate().is_err());
    let mut c = SolverConfig::new(1e-5);
    c.tolerance = 1e-3;
    assert!(c.validate().is_err());
    assert_eq!(SolverConfig::for_measurement(1e-3).decimation(1e-3).unwrap(), 32);
    assert!(SolverConfig::new(3e-4).decimation(1e-3).is_err());
}

#[test]
fn missing_or_mismatched_sources() {
    let net = cable::build_lumped(1e3, 9e3, &CableSpec::rg58(100.0)).unwrap();
    let h = 1e-5;
    let w = Waveform::constant(0.0, 100, h).unwrap();
    let cfg = SolverConfig::new(h);
    let only_alice = sources(&[("alice", w.clone())]);
    assert!(matches!(transient_solve(&net, &only_alice, &cfg, 1e-3, 1e-4), Err(Error::Argument(_))));
    let wrong_rate = sources(&[("alice", w.clone()), ("bob", Waveform::constant(0.0, 100, 2e-5).unwrap())]);
    assert!(transient_solve(&net, &wrong_rate, &cfg, 1e-3, 1e-4).is_err());
    let short = sources(&[("alice", w.clone()), ("bob", w)]);
    assert!(transient_solve(&net, &short, &cfg, 2e-3, 1e-4).is_err());
}

fn noise(rms: f64, n: usize, h: f64, seed: u64) -> Waveform {
    noise::generate(&NoiseSpec {
        bandwidth_hz: 250.0,
        rms_volts: rms,
        duration_s: n as f64 * h,
        sample_interval_s: h,
        seed,
    })
    .unwrap()
}

fn run_pair(net: &Netlist, a: &Waveform, b: &Waveform, n: usize, h: f64) -> TransientResult {
    let src = sources(&[("alice", a.clone()), ("bob", b.clone())]);
    transient_solve(net, &src, &SolverConfig::new(h), n as f64 * h, 32.0 * h).unwrap()
}

fn max_rel_diff(x: &TransientResult, y: &TransientResult) -> f64 {
    x.probes
        .iter()
        .map(|(k, w)| {
            let other = y.probes[k].samples();
            let scale = w.samples().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            w.samples().iter().zip(other).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[test]
fn linear_and_superposing_on_the_ladder() {
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(1000.0)).unwrap();
    let h = 1e-3 / 32.0;
    let n = 32 * 200;
    let a = noise(1.0, n, h, 1);
    let b = noise(3.0, n, h, 2);
    let zero = Waveform::constant(0.0, n, h).unwrap();

    let base = run_pair(&net, &a, &b, n, h);
    let scaled = run_pair(&net, &a.scaled(2.5), &b.scaled(2.5), n, h);
    let mut expect = base.clone();
    for w in expect.probes.values_mut() {
        *w = w.scaled(2.5);
    }
    assert!(max_rel_diff(&scaled, &expect) < 1e-9);

    let only_a = run_pair(&net, &a, &zero, n, h);
    let only_b = run_pair(&net, &zero, &b, n, h);
    let mut sum = only_a.clone();
    for (k, w) in sum.probes.iter_mut() {
        *w = w.add(&only_b.probes[k]).unwrap();
    }
    assert!(max_rel_diff(&base, &sum) < 1e-9);
}

#[test]
fn stored_energy_never_grows_once_sources_stop() {
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(1000.0)).unwrap();
    let h = 1e-3 / 32.0;
    let mut solver = TransientSolver::new(&net, &SolverConfig::new(h)).unwrap();
    let a = noise(1.0, 3200, h, 3);
    let b = noise(3.0, 3200, h, 4);
    solver.run(&[a.samples(), b.samples()], 3200, 32).unwrap();
    let zero = [0.0, 0.0];
    solver.step(&zero).unwrap();
    let start = solver.stored_energy();
    let mut last = start;
    assert!(last > 0.0);
    for _ in 0..3000 {
        solver.step(&zero).unwrap();
        let e = solver.stored_energy();
        assert!(e <= last * (1.0 + 1e-12), "{e} > {last}");
        last = e;
    }
    assert!(last < start);
}

#[test]
fn killer_zeroes_the_colocated_capacitor_current() {
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(1000.0)).unwrap();
    let killed = cable::apply_capacitor_killer(&net, TapEnd::Alice).unwrap();
    let mut probed = killed.clone();
    probed.add_probe("ic0", ProbeTarget::Current("C0".into())).unwrap();
    probed.add_probe("ic_far", ProbeTarget::Current("C100".into())).unwrap();
    let h = 1e-3 / 32.0;
    let n = 3200;
    let res = run_pair(&probed, &noise(1.0, n, h, 5), &noise(3.0, n, h, 6), n, h);
    assert!(res.probe("ic0").unwrap().samples().iter().all(|&i| i == 0.0));
    // Away from the tap the shield no longer tracks the wire exactly.
    let ambient = res.probe("I_cha").unwrap().rms();
    let far = res.probe("ic_far").unwrap().rms();
    assert!(far > 0.0 && far < 1e-2 * ambient, "{far} vs {ambient}");
}

#[test]
fn resistance_swaps_keep_state_and_reuse_factorizations() {
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(100.0)).unwrap();
    let h = 1e-3 / 32.0;
    let a = noise(1.0, 640, h, 7);
    let b = noise(3.0, 640, h, 8);
    let mut s = TransientSolver::new(&net, &SolverConfig::new(h)).unwrap();
    s.run(&[a.samples(), b.samples()], 320, 32).unwrap();
    s.set_resistance("RA", 9e3).unwrap();
    s.set_resistance("RB", 1e3).unwrap();
    let swapped = s.run(&[&a.samples()[320..], &b.samples()[320..]], 320, 32).unwrap();

    // Same thing with the second half on a netlist built with swapped values,
    // carrying the state across by running both halves on one solver.
    let mut t = TransientSolver::new(&net, &SolverConfig::new(h)).unwrap();
    t.run(&[a.samples(), b.samples()], 320, 32).unwrap();
    t.set_resistance("RA", 9e3).unwrap();
    t.set_resistance("RB", 1e3).unwrap();
    t.set_resistance("RA", 1e3).unwrap();
    t.set_resistance("RB", 9e3).unwrap();
    t.set_resistance("RA", 9e3).unwrap();
    t.set_resistance("RB", 1e3).unwrap();
    let again = t.run(&[&a.samples()[320..], &b.samples()[320..]], 320, 32).unwrap();
    assert_eq!(swapped, again);
    assert!(s.set_resistance("C0", 1.0).is_err());
}

#[test]
fn rc_gain_at_cutoff() {
    let (r, c) = (900.0, 100e-9);
    let tau = r * c;
    let mut net = Netlist::new();
    let (_, out) = step_source(&mut net, r);
    net.add_capacitor("C1", out, GROUND, c).unwrap();
    let fc = 1.0 / (2.0 * std::f64::consts::PI * tau);
    let cfg = SolverConfig::new(tau / 100.0);
    let g = frequency_response_check(&net, "in", "v", fc, &cfg, 10.0 * tau).unwrap();
    assert!((g.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01 * std::f64::consts::FRAC_1_SQRT_2);
    assert!((g.arg() + std::f64::consts::FRAC_PI_4).abs() < 0.01);

    let low = frequency_response_check(&net, "in", "v", fc / 1000.0, &cfg, 10.0 * tau).unwrap();
    assert!((low.norm() - 1.0).abs() < 1e-3);

    let nyq = 0.5 / cfg.internal_step_s;
    assert!(matches!(
        frequency_response_check(&net, "in", "v", nyq, &cfg, 0.0),
        Err(Error::Argument(_))
    ));
}

#[test]
fn step_halving_converges_at_operating_bandwidth() {
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(1000.0)).unwrap();
    let h = 1e-3 / 32.0;
    let n = 32 * 200;
    let a = noise(1.0, 2 * n, h / 2.0, 9);
    let b = noise(3.0, 2 * n, h / 2.0, 10);
    let fine = run_pair(&net, &a, &b, 2 * n, h / 2.0);
    let a2 = a.decimate(2, 1).unwrap();
    let b2 = b.decimate(2, 1).unwrap();
    let coarse = run_pair(&net, &a2, &b2, n, h);
    for (name, w) in &coarse.probes {
        let f = fine.probes[name].decimate(2, 1).unwrap();
        let d = nrmsd(w.samples(), f.samples());
        assert!(d < 1e-3, "{name}: {d}");
    }
}

#[test]
fn killed_ladder_matches_dense_reference() {
    // The killed netlist has a hub column; compare the envelope solve with
    // a plain dense solve of the same per-step system.
    let net = cable::build_distributed(1e3, 9e3, &CableSpec::rg58(1000.0).with_segments(20)).unwrap();
    let killed = cable::apply_capacitor_killer(&net, TapEnd::Bob).unwrap();
    let s = TransientSolver::new(&killed, &SolverConfig::new(1e-5)).unwrap();
    let f = s.trap.as_ref().unwrap();
    let n = s.unknowns();
    let mut a = nalgebra::DMatrix::zeros(n, n);
    let sp = assemble(n, &s.elements, &f.g);
    for (r, c, v) in sp.iter() {
        a[(r, c)] = v;
    }
    let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut x = vec![0.0; n];
    f.lu.solve(&b, &mut x, &mut Vec::new());
    let expect = a.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
    for i in 0..n {
        assert!((x[i] - expect[i]).abs() < 1e-9 * (1.0 + expect[i].abs()));
    }
}
