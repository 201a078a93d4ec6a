//! Step response of an RC low-pass through the transient solver, next to
//! the exponential it should follow.

use std::collections::HashMap;

use kljn_sim::netlist::{Netlist, ProbeTarget, SourceValue, GROUND};
use kljn_sim::transient::{transient_solve, SolverConfig};
use kljn_sim::Waveform;

fn main() -> kljn_sim::Result<()> {
    let (r, c) = (900.0, 100e-9);
    let tau = r * c;
    let h = tau / 100.0;

    let mut net = Netlist::new();
    let s = net.node("s");
    let out = net.node("out");
    net.add_source("V1", s, GROUND, SourceValue::Waveform("step".into()))?;
    net.add_resistor("R1", s, out, r)?;
    net.add_capacitor("C1", out, GROUND, c)?;
    net.add_probe("v", ProbeTarget::Voltage(out))?;

    let n = 600;
    let sources = HashMap::from([("step".to_string(), Waveform::constant(1.0, n, h)?)]);
    let result = transient_solve(&net, &sources, &SolverConfig::new(h), n as f64 * h, 50.0 * h)?;
    let v = result.probe("v")?;
    println!("{:>10} {:>10} {:>10}", "t/tau", "v", "exact");
    for (k, &x) in v.samples().iter().enumerate() {
        let t = v.time_at(k);
        println!("{:>10.2} {:>10.6} {:>10.6}", t / tau, x, 1.0 - (-t / tau).exp());
    }
    println!("max relative residual {:.1e}", result.diagnostics.max_residual);
    Ok(())
}
