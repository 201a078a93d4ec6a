use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled real signal (volts or amperes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_interval_s: f64,
    start_time_s: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_interval_s: f64, start_time_s: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Argument("waveform must have at least one sample".into()));
        }
        if !(sample_interval_s > 0.0 && sample_interval_s.is_finite()) {
            return Err(Error::Argument(format!(
                "sample interval must be positive, got {sample_interval_s}"
            )));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("sample {k} is not finite")));
        }
        Ok(Self { samples, sample_interval_s, start_time_s })
    }

    /// Waveform starting at t = 0.
    pub fn from_samples(samples: Vec<f64>, sample_interval_s: f64) -> Result<Self> {
        Self::new(samples, sample_interval_s, 0.0)
    }

    pub fn constant(value: f64, len: usize, sample_interval_s: f64) -> Result<Self> {
        Self::from_samples(vec![value; len], sample_interval_s)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_interval_s(&self) -> f64 {
        self.sample_interval_s
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 * self.sample_interval_s
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.start_time_s + k as f64 * self.sample_interval_s
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let var = self.samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / self.samples.len() as f64;
        var.sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Every `factor`-th sample, starting with sample `offset`.
    pub fn decimate(&self, factor: usize, offset: usize) -> Result<Self> {
        if factor == 0 || offset >= self.samples.len() {
            return Err(Error::Argument(format!(
                "cannot decimate {} samples by {factor} from offset {offset}",
                self.samples.len()
            )));
        }
        let samples = self.samples[offset..].iter().step_by(factor).copied().collect();
        Self::new(
            samples,
            self.sample_interval_s * factor as f64,
            self.time_at(offset),
        )
    }

    /// Sample-by-sample sum; grids must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(Self { samples, ..self.clone() })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.samples.len() != other.samples.len() {
            return Err(Error::Argument(format!(
                "waveform lengths differ: {} vs {}",
                self.samples.len(),
                other.samples.len()
            )));
        }
        let rel = (self.sample_interval_s - other.sample_interval_s).abs() / self.sample_interval_s;
        if rel > 1e-9 {
            return Err(Error::Argument(format!(
                "sample intervals differ: {} vs {}",
                self.sample_interval_s, other.sample_interval_s
            )));
        }
        Ok(())
    }
}

/// Normalized RMS deviation `rms(a - b) / rms(reference)`.
pub fn nrmsd(a: &[f64], reference: &[f64]) -> f64 {
    assert_eq!(a.len(), reference.len(), "nrmsd needs equal lengths");
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = reference.iter().map(|y| y * y).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}
