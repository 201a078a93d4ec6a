//! Generate a long Johnson-noise realization for a 1 kΩ resistor and check
//! its standard deviation, band confinement and Gaussian shape.
//!
//! cargo run --release --example noise_check > gaussianity.csv

use kljn_sim::noise::{self, NoiseSpec};
use kljn_sim::protocol::default_t_eff;

fn main() -> kljn_sim::Result<()> {
    let bandwidth_hz = 250.0;
    let h = 1.0 / (4.0 * bandwidth_hz);
    let spec = NoiseSpec {
        bandwidth_hz,
        rms_volts: noise::rms_for_resistor(1e3, default_t_eff(), bandwidth_hz),
        duration_s: 1e6 * h,
        sample_interval_s: h,
        seed: 1,
    };
    let (w, q) = noise::quality_check(&spec, 50)?;
    eprintln!("samples            {}", q.n_samples);
    eprintln!("sigma              {:.5} V (target {:.5} V)", q.sample_std, q.target_rms);
    eprintln!("out-of-band power  {:.2e}", q.out_of_band_fraction);
    eprintln!("chi-square         {:.1} on {} dof, p = {:.3}", q.chi_square.statistic, q.chi_square.dof, q.chi_square.p_value);

    let report = noise::gaussianity_report(&w, 50)?;
    eprintln!("max |empirical - normal quantile| {:.4} V", report.max_quantile_deviation());
    print!("{}", report.to_csv());
    Ok(())
}
