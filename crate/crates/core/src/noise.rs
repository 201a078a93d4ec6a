//! Band-limited Gaussian "Johnson-like" noise sources.
//!
//! Noise is synthesized in the frequency domain: independent Gaussian
//! coefficients on every FFT line in `(0, B]`, nothing above, inverse
//! transform. The result is exactly Gaussian and exactly band-limited on the
//! synthesis grid.

use std::cell::RefCell;
use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::stats;
use crate::waveform::Waveform;

/// Boltzmann constant, CODATA 2018 exact value (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Minimum number of spectral lines below the band edge in one synthesis block.
const MIN_BAND_LINES: f64 = 64.0;

/// Maximum number of quantile pairs emitted by [`gaussianity_report`].
const MAX_QUANTILE_PAIRS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub bandwidth_hz: f64,
    /// RMS value, equal to the standard deviation (zero mean).
    pub rms_volts: f64,
    pub duration_s: f64,
    pub sample_interval_s: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Config(format!("noise bandwidth must be > 0, got {}", self.bandwidth_hz)));
        }
        if !(self.rms_volts >= 0.0) || !self.rms_volts.is_finite() {
            return Err(Error::Config(format!("rms must be >= 0, got {}", self.rms_volts)));
        }
        if !(self.sample_interval_s > 0.0) {
            return Err(Error::Config(format!(
                "sample interval must be > 0, got {}",
                self.sample_interval_s
            )));
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(Error::Config(format!("duration must be > 0, got {}", self.duration_s)));
        }
        let nyquist = 0.5 / self.sample_interval_s;
        if self.bandwidth_hz >= nyquist {
            return Err(Error::Config(format!(
                "noise bandwidth {} Hz is not below the Nyquist frequency {} Hz",
                self.bandwidth_hz, nyquist
            )));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        ((self.duration_s / self.sample_interval_s).round() as usize).max(1)
    }
}

/// Johnson noise rms voltage `sqrt(4 k T R B)`.
pub fn rms_for_resistor(r_ohm: f64, t_eff_kelvin: f64, bandwidth_hz: f64) -> f64 {
    (4.0 * BOLTZMANN * t_eff_kelvin * r_ohm * bandwidth_hz).sqrt()
}

/// Effective temperature at which resistor `r_ohm` produces `rms_volts` over `bandwidth_hz`.
pub fn t_eff_for_rms(rms_volts: f64, r_ohm: f64, bandwidth_hz: f64) -> f64 {
    rms_volts * rms_volts / (4.0 * BOLTZMANN * r_ohm * bandwidth_hz)
}

/// Ratio of the two parties' noise rms values, `sqrt(r_low / r_high)`.
pub fn rms_ratio(r_low: f64, r_high: f64) -> Result<f64> {
    if !(r_low > 0.0 && r_high > 0.0) {
        return Err(Error::Domain(format!(
            "resistances must be positive, got {r_low} and {r_high}"
        )));
    }
    Ok((r_low / r_high).sqrt())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Synthesize one zero-mean band-limited Gaussian realization.
pub fn generate(spec: &NoiseSpec) -> Result<Waveform> {
    spec.validate()?;
    let n = spec.n_samples();
    let h = spec.sample_interval_s;
    let min_block = (MIN_BAND_LINES / (spec.bandwidth_hz * h)).ceil() as usize;
    let block = (2 * n).max(min_block).next_power_of_two();
    // Lines k/(block*h) <= B, excluding DC.
    let lines = ((spec.bandwidth_hz * block as f64 * h) + 1e-9).floor() as usize;
    let lines = lines.min(block / 2 - 1).max(1);

    if spec.rms_volts == 0.0 {
        return Waveform::from_samples(vec![0.0; n], h);
    }

    let scale = spec.rms_volts / (lines as f64).sqrt();
    let mut rng = seeds::rng_from(spec.seed);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); block];
    for line in spectrum.iter_mut().skip(1).take(lines) {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        *line = Complex64::new(scale * a, -scale * b);
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(block).process(&mut spectrum));
    let samples = spectrum[..n].iter().map(|c| c.re).collect();
    Waveform::from_samples(samples, h)
}

/// Histogram plus normal-probability-plot data for a waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianityReport {
    pub bin_centers: Vec<f64>,
    pub counts: Vec<u64>,
    /// `(standard normal quantile, empirical quantile)` pairs.
    pub quantile_pairs: Vec<(f64, f64)>,
    pub mean: f64,
    pub std_dev: f64,
}

impl GaussianityReport {
    /// Largest deviation of the quantile pairs from the straight line
    /// `mean + std_dev * q`, in units of `std_dev`.
    pub fn max_quantile_deviation(&self) -> f64 {
        if self.std_dev == 0.0 {
            return 0.0;
        }
        self.quantile_pairs
            .iter()
            .map(|(q, e)| ((e - self.mean) / self.std_dev - q).abs())
            .fold(0.0, f64::max)
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Two CSV blocks separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center,count\n");
        for (c, n) in self.bin_centers.iter().zip(&self.counts) {
            let _ = writeln!(out, "{c},{n}");
        }
        out.push_str("\ntheoretical_q,empirical_q\n");
        for (q, e) in &self.quantile_pairs {
            let _ = writeln!(out, "{q},{e}");
        }
        out
    }
}

pub fn gaussianity_report(w: &Waveform, n_bins: usize) -> Result<GaussianityReport> {
    if n_bins < 2 {
        return Err(Error::Argument(format!("need at least 2 bins, got {n_bins}")));
    }
    let xs = w.samples();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &x in xs {
        let k = if width > 0.0 {
            (((x - lo) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    let bin_centers = (0..n_bins).map(|k| lo + (k as f64 + 0.5) * width).collect();

    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let m = n.min(MAX_QUANTILE_PAIRS);
    let quantile_pairs = (0..m)
        .map(|j| {
            let p = (j as f64 + 0.5) / m as f64;
            let idx = ((p * n as f64) as usize).min(n - 1);
            (stats::normal_quantile(p), sorted[idx])
        })
        .collect();

    Ok(GaussianityReport {
        bin_centers,
        counts,
        quantile_pairs,
        mean: stats::mean(xs),
        std_dev: stats::std_dev(xs),
    })
}

/// Statistics of one long realization against its specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseQuality {
    pub n_samples: usize,
    pub target_rms: f64,
    pub sample_std: f64,
    /// Share of the (non-DC) power above the bandwidth.
    pub out_of_band_fraction: f64,
    /// Pearson χ² on the subsequence spaced `1/(2B)` apart; band-limited
    /// white noise is uncorrelated at that spacing.
    pub chi_square: stats::ChiSquareTest,
}

impl NoiseQuality {
    /// `|σ / target − 1|`
    pub fn sigma_error(&self) -> f64 {
        (self.sample_std / self.target_rms - 1.0).abs()
    }
}

pub fn quality_check(spec: &NoiseSpec, n_bins: usize) -> Result<(Waveform, NoiseQuality)> {
    if !(spec.rms_volts > 0.0) {
        return Err(Error::Argument("quality check needs a non-zero rms".into()));
    }
    let w = generate(spec)?;
    let stride = ((0.5 / (spec.bandwidth_hz * spec.sample_interval_s)).floor() as usize).max(1);
    let spaced = w.decimate(stride, 0)?;
    let quality = NoiseQuality {
        n_samples: w.len(),
        target_rms: spec.rms_volts,
        sample_std: w.std_dev(),
        out_of_band_fraction: stats::power_fraction_above(w.samples(), spec.sample_interval_s, spec.bandwidth_hz),
        chi_square: stats::chi_square_normality(spaced.samples(), n_bins)?,
    };
    Ok((w, quality))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(rms: f64, n: usize, seed: u64) -> NoiseSpec {
        NoiseSpec {
            bandwidth_hz: 250.0,
            rms_volts: rms,
            duration_s: n as f64 * 1e-3,
            sample_interval_s: 1e-3,
            seed,
        }
    }

    #[test]
    fn johnson_rms_at_the_operating_temperature() {
        // T back-solved from 1 V across 1 kΩ over 250 Hz: T = U²/(4kRB).
        let t = 1.0 / (4.0 * 1.380649e-23 * 1000.0 * 250.0);
        assert_relative_eq!(t, 7.2430e16, max_relative = 1e-4);
        assert_relative_eq!(rms_for_resistor(1000.0, 7.246e16, 250.0), 1.000, epsilon = 1e-3);
        assert_relative_eq!(rms_for_resistor(9000.0, 7.246e16, 250.0), 3.000, epsilon = 2e-3);
        assert_eq!(rms_for_resistor(1000.0, 7.246e16, 0.0), 0.0);
        assert_relative_eq!(t_eff_for_rms(1.0, 1000.0, 250.0), t, max_relative = 1e-12);
    }

    #[test]
    fn rms_ratio_examples() {
        assert_relative_eq!(rms_ratio(1000.0, 9000.0).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(rms_ratio(50.0, 50.0).unwrap(), 1.0);
        assert_eq!(rms_ratio(4.0, 1.0).unwrap(), 2.0);
        assert!(matches!(rms_ratio(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(rms_ratio(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn nyquist_violation_is_a_config_error() {
        let mut s = spec(1.0, 100, 0);
        s.bandwidth_hz = 500.0;
        assert!(matches!(generate(&s), Err(Error::Config(_))));
        s.bandwidth_hz = 0.0;
        assert!(matches!(generate(&s), Err(Error::Config(_))));
    }

    #[test]
    fn zero_rms_gives_silence() {
        let w = generate(&spec(0.0, 500, 1)).unwrap();
        assert_eq!(w.len(), 500);
        assert!(w.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn million_samples_hit_target_sigma() {
        let w = generate(&spec(1.0, 1_000_000, 11)).unwrap();
        let s = w.std_dev();
        assert!((0.98..=1.02).contains(&s), "sigma {s}");
        assert!(w.mean().abs() < 0.01);
    }

    #[test]
    fn spectrum_is_confined_to_the_band() {
        let w = generate(&spec(1.0, 1 << 16, 12)).unwrap();
        let frac = stats::power_fraction_above(w.samples(), 1e-3, 1.2 * 250.0);
        assert!(frac < 1e-3, "{frac}");
    }

    #[test]
    fn autocorrelation_shape() {
        // t_s = 1/(4B): lag 1 is a quarter correlation time, sinc(1/2) ≈ 0.64.
        let w = generate(&spec(1.0, 200_000, 13)).unwrap();
        let xs = w.samples();
        assert!(stats::autocorrelation(xs, 1) > 0.5);
        let bound = 5.0 / (xs.len() as f64).sqrt();
        assert!(stats::autocorrelation(xs, 400).abs() < bound);
    }

    #[test]
    fn distinct_seeds_are_uncorrelated() {
        let a = generate(&spec(1.0, 100_000, 21)).unwrap();
        let b = generate(&spec(1.0, 100_000, 22)).unwrap();
        let dot: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| x * y).sum();
        let corr = dot / (a.len() as f64 * a.std_dev() * b.std_dev());
        // ~5·10^4 effective independent samples at this oversampling.
        assert!(corr.abs() < 5.0 / (50_000f64).sqrt(), "{corr}");
    }

    #[test]
    fn report_on_constant_input_has_one_bin() {
        let w = Waveform::constant(0.3, 100, 1.0).unwrap();
        let r = gaussianity_report(&w, 10).unwrap();
        assert_eq!(r.occupied_bins(), 1);
        assert!(gaussianity_report(&w, 1).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let w = generate(&spec(1.0, 2000, 5)).unwrap();
        let csv = gaussianity_report(&w, 4).unwrap().to_csv();
        let mut blocks = csv.split("\n\n");
        let hist = blocks.next().unwrap();
        assert!(hist.starts_with("bin_center,count\n"));
        assert_eq!(hist.lines().count(), 5);
        assert!(blocks.next().unwrap().starts_with("theoretical_q,empirical_q\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn deterministic_and_linear_in_rms(seed in any::<u64>(), rms in 0.01f64..10.0, n in 10usize..3000) {
            let a = generate(&spec(rms, n, seed)).unwrap();
            let b = generate(&spec(rms, n, seed)).unwrap();
            prop_assert_eq!(a.samples(), b.samples());

            let doubled = generate(&spec(2.0 * rms, n, seed)).unwrap();
            let scaled = a.scaled(2.0);
            prop_assert_eq!(doubled.samples(), scaled.samples());

            let unit = generate(&spec(1.0, n, seed)).unwrap();
            for (x, u) in a.samples().iter().zip(unit.samples()) {
                prop_assert!((x - rms * u).abs() <= 1e-12 * rms.max(1.0) * (1.0 + u.abs()));
            }
        }
    }
}
