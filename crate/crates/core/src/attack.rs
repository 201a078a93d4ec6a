//! Eve's cable-capacitance attack.
//!
//! With a capacitive cable the loop current differs between the two ends by
//! the capacitive current `C dU/dt`, which is larger at the end of the lower
//! resistor. Eve correlates each end's current with the time derivative of
//! the local voltage and compares the two ends.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{Arrangement, BepMeasurement, Exchange};
use crate::seeds::{self, Domain};
use crate::waveform::Waveform;

/// Central differences inside, one-sided differences at both ends.
pub fn time_derivative(w: &Waveform) -> Result<Waveform> {
    let x = w.samples();
    let n = x.len();
    if n < 3 {
        return Err(Error::Argument(format!("derivative needs at least 3 samples, got {n}")));
    }
    let dt = w.sample_interval_s();
    let mut d = Vec::with_capacity(n);
    d.push((x[1] - x[0]) / dt);
    d.extend(x.windows(3).map(|s| (s[2] - s[0]) / (2.0 * dt)));
    d.push((x[n - 1] - x[n - 2]) / dt);
    Waveform::new(d, dt, w.start_time_s())
}

/// Finite-time average of `i(t) * du(t)`.
pub fn cross_correlation(i: &Waveform, du_dt: &Waveform) -> Result<f64> {
    i.check_same_grid(du_dt)?;
    let n = i.len() as f64;
    Ok(i.samples().iter().zip(du_dt.samples()).map(|(a, b)| a * b).sum::<f64>() / n)
}

/// Positive `rho` means `LH`, negative means `HL`, zero is a fair coin.
pub fn eve_decide(rho: f64, tie_seed: u64) -> Arrangement {
    if rho > 0.0 {
        Arrangement::LH
    } else if rho < 0.0 {
        Arrangement::HL
    } else if seeds::rng_from(tie_seed).random::<bool>() {
        Arrangement::LH
    } else {
        Arrangement::HL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessRate {
    pub p_e: f64,
    pub epsilon: f64,
    pub binomial_std: f64,
    pub n_bits: usize,
}

pub fn success_rate(q: &[u8]) -> Result<SuccessRate> {
    if q.is_empty() {
        return Err(Error::Argument("success rate of an empty list".into()));
    }
    if let Some(bad) = q.iter().find(|&&v| v > 1) {
        return Err(Error::Argument(format!("q values must be 0 or 1, got {bad}")));
    }
    let n = q.len();
    let p = q.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    Ok(SuccessRate { p_e: p, epsilon: p - 0.5, binomial_std: (p * (1.0 - p) / n as f64).sqrt(), n_bits: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitVerdict {
    pub bit: u64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub rho: f64,
    pub guess: Arrangement,
    pub truth: Arrangement,
    pub q: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub bits: Vec<BitVerdict>,
    pub summary: SuccessRate,
}

impl AttackOutcome {
    pub fn q(&self) -> Vec<u8> {
        self.bits.iter().map(|b| b.q).collect()
    }

    /// `bit,rho_a,rho_b,rho,guess,q`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bit", "rho_a", "rho_b", "rho", "guess", "q"])?;
        for b in &self.bits {
            out.write_record([
                b.bit.to_string(),
                format!("{:e}", b.rho_a),
                format!("{:e}", b.rho_b),
                format!("{:e}", b.rho),
                b.guess.label().to_string(),
                b.q.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `{p_E, epsilon, n_bits, binomial_std}`
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p_E": self.summary.p_e,
            "epsilon": self.summary.epsilon,
            "n_bits": self.summary.n_bits,
            "binomial_std": self.summary.binomial_std,
        })
    }
}

/// Eve's statistic and verdict for one period.
pub fn analyze_bep(m: &BepMeasurement, tie_seed: u64) -> Result<BitVerdict> {
    let p = &m.probes;
    let rho_a = cross_correlation(&p.i_cha, &time_derivative(&p.u_cha)?)?;
    let rho_b = cross_correlation(&p.i_chb, &time_derivative(&p.u_chb)?)?;
    let rho = rho_a - rho_b;
    let guess = eve_decide(rho, tie_seed);
    let truth = m.arrangement();
    Ok(BitVerdict { bit: m.bit_index, rho_a, rho_b, rho, guess, truth, q: u8::from(guess == truth) })
}

/// Attack every secure period; discarded (`LL`, `HH`) periods are skipped.
pub fn run_attack(measurements: &[BepMeasurement], master_seed: u64) -> Result<AttackOutcome> {
    let bits = measurements
        .par_iter()
        .filter(|m| m.exchange == Exchange::Secure)
        .map(|m| analyze_bep(m, seeds::derive(master_seed, Domain::EveTie, m.bit_index, 0)))
        .collect::<Result<Vec<_>>>()?;
    let q: Vec<u8> = bits.iter().map(|b| b.q).collect();
    let summary = success_rate(&q)
        .map_err(|_| Error::Argument("no secure bit-exchange periods to attack".into()))?;
    Ok(AttackOutcome { bits, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wave(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> Waveform {
        Waveform::from_samples((0..n).map(|k| f(k as f64 * dt)).collect(), dt).unwrap()
    }

    #[test]
    fn derivative_of_ramp_and_constant() {
        let d = time_derivative(&wave(|t| 3.5 * t, 10, 0.1)).unwrap();
        assert!(d.samples().iter().all(|v| (v - 3.5).abs() < 1e-12));
        let z = time_derivative(&Waveform::constant(2.0, 5, 1.0).unwrap()).unwrap();
        assert!(z.samples().iter().all(|&v| v == 0.0));
        assert!(time_derivative(&Waveform::constant(2.0, 2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn derivative_of_slow_sine() {
        let f = 10.0;
        let dt = 0.01 / f;
        let d = time_derivative(&wave(|t| (2.0 * PI * f * t).sin(), 500, dt)).unwrap();
        let amp = 2.0 * PI * f;
        for k in 1..499 {
            let exact = amp * (2.0 * PI * f * k as f64 * dt).cos();
            assert!((d.samples()[k] - exact).abs() < 1e-3 * amp);
        }
    }

    #[test]
    fn correlation_oracles() {
        let dt = 1e-4;
        let n = 10_000; // ten periods of 10 Hz
        let w = 2.0 * PI * 10.0;
        let s = wave(|t| (w * t).sin(), n, dt);
        let c = wave(|t| (w * t).cos(), n, dt);
        assert!(cross_correlation(&s, &c).unwrap().abs() < 1e-12);

        // Capacitor driven by A sin: I = C dU/dt.
        let (cap, a) = (1e-7, 2.0);
        let du = wave(|t| a * w * (w * t).cos(), n, dt);
        let i = du.scaled(cap);
        let rho = cross_correlation(&i, &du).unwrap();
        let exact = cap * a * a * w * w / 2.0;
        assert!((rho - exact).abs() < 1e-9 * exact);

        let short = wave(|t| t, 10, dt);
        assert!(cross_correlation(&short, &s).is_err());
    }

    #[test]
    fn decision_rule() {
        assert_eq!(eve_decide(1e-9, 0), Arrangement::LH);
        assert_eq!(eve_decide(-1e-9, 0), Arrangement::HL);
        let wins = (0..10_000u64).filter(|&s| eve_decide(0.0, seeds::derive(5, Domain::EveTie, s, 0)) == Arrangement::LH).count();
        assert!((wins as f64 / 1e4 - 0.5).abs() < 3.0 * 0.005);
    }

    #[test]
    fn success_rate_cases() {
        let r = success_rate(&[1; 10]).unwrap();
        assert_eq!((r.p_e, r.epsilon, r.binomial_std), (1.0, 0.5, 0.0));
        assert!(success_rate(&[]).is_err());
        assert!(success_rate(&[2]).is_err());
        let r = success_rate(&[1, 0, 1, 0]).unwrap();
        assert!((r.binomial_std - 0.25).abs() < 1e-12);
    }
}
