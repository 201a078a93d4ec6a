//! Statistical helpers shared by the noise validation, protocol and attack code.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// One-sided periodogram `|X_k|^2` for `k = 0..=n/2` with bin spacing `1/(n dt)`.
pub fn periodogram(xs: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let mut buf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let df = 1.0 / (n as f64 * dt);
    let freqs = (0..=half).map(|k| k as f64 * df).collect();
    let power = buf[..=half].iter().map(|c| c.norm_sqr()).collect();
    (freqs, power)
}

/// Fraction of (non-DC) periodogram power at frequencies strictly above `f_cut`.
pub fn power_fraction_above(xs: &[f64], dt: f64, f_cut: f64) -> f64 {
    let (freqs, power) = periodogram(xs, dt);
    let total: f64 = power.iter().skip(1).sum();
    if total == 0.0 {
        return 0.0;
    }
    let above: f64 = freqs
        .iter()
        .zip(&power)
        .skip(1)
        .filter(|(f, _)| **f > f_cut)
        .map(|(_, p)| p)
        .sum();
    above / total
}

/// Normalized autocorrelation at integer lag (biased estimator, mean removed).
pub fn autocorrelation(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len();
    if lag >= n {
        return 0.0;
    }
    let m = mean(xs);
    let var: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..n - lag).map(|k| (xs[k] - m) * (xs[k + lag] - m)).sum();
    cov / var
}

/// Result of a chi-square goodness-of-fit test against a fitted normal law.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square normality test on `n_bins` equal-width bins spanning
/// mean ± 4σ, with the two outer bins extended to ±∞. Mean and σ are
/// estimated from the data, which costs two degrees of freedom.
pub fn chi_square_normality(xs: &[f64], n_bins: usize) -> Result<ChiSquareTest> {
    if n_bins < 4 {
        return Err(Error::Argument(format!("need at least 4 bins, got {n_bins}")));
    }
    if xs.len() < 5 * n_bins {
        return Err(Error::Argument(format!(
            "{} samples are too few for {n_bins} bins",
            xs.len()
        )));
    }
    let m = mean(xs);
    let s = std_dev(xs);
    if s == 0.0 {
        return Err(Error::Argument("constant data has no distribution shape".into()));
    }
    let lo = m - 4.0 * s;
    let width = 8.0 * s / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &x in xs {
        let k = ((x - lo) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(n_bins - 1) };
        counts[k] += 1;
    }
    let n = xs.len() as f64;
    let law = Normal::new(m, s).map_err(|e| Error::Domain(e.to_string()))?;
    let mut statistic = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let a = if k == 0 { 0.0 } else { law.cdf(lo + k as f64 * width) };
        let b = if k == n_bins - 1 { 1.0 } else { law.cdf(lo + (k + 1) as f64 * width) };
        let expected = n * (b - a);
        statistic += (c as f64 - expected).powi(2) / expected;
    }
    let dof = n_bins - 3;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sf(statistic);
    Ok(ChiSquareTest { statistic, dof, p_value })
}

/// Two-sample Kolmogorov–Smirnov test; returns `(D, asymptotic p-value)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("KS test needs two non-empty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok((d, kolmogorov_sf(lambda)))
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
