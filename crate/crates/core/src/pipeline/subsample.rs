use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Fraction of spectral energy that defines a series' bandwidth.
const ENERGY_FRACTION: f64 = 0.95;

/// Frequency (Hz) below which 95% of the mean-removed series' spectral energy lies.
/// Constant series have zero bandwidth.
pub fn bandwidth(series: &[f64], rate: f64) -> f64 {
    let n = series.len();
    if n < 2 {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // one-sided power spectrum, bins 1..=n/2
    let half = n / 2;
    let power: Vec<f64> = (0..=half).map(|k| buf[k].norm_sqr()).collect();
    let total: f64 = power[1..].iter().sum();
    if total <= 1e-18 * n as f64 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (k, p) in power.iter().enumerate().skip(1) {
        acc += p;
        if acc >= ENERGY_FRACTION * total {
            return k as f64 * rate / n as f64;
        }
    }
    rate / 2.0
}

/// Fails with the offending row when timestamps are not evenly spaced.
pub fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Ok(0.0);
    }
    let period = times[1] - times[0];
    if period <= 0.0 {
        return Err(Error::NonUniformSampling(1));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - period).abs() > 1e-6 * period.max(1.0) {
            return Err(Error::NonUniformSampling(i + 1));
        }
    }
    Ok(period)
}

/// Keeps rows 0, k, 2k, ...
pub fn decimate<T: Clone>(rows: &[T], k: usize) -> Vec<T> {
    rows.iter().step_by(k.max(1)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsampled {
    pub factor: usize,
    pub rate: f64,
    /// Largest per-series bandwidth, Hz.
    pub bandwidth: f64,
    pub series: Vec<Vec<f64>>,
}

/// Checks `candidate_rate` against the Nyquist bound of every series and decimates by the
/// integer factor nearest `input_rate / candidate_rate`.
pub fn nyquist_subsample(series: &[Vec<f64>], input_rate: f64, candidate_rate: f64) -> Result<Subsampled> {
    if !(candidate_rate > 0.0) || candidate_rate > input_rate * (1.0 + 1e-12) {
        return Err(Error::Parse(format!(
            "candidate rate {candidate_rate} Hz must lie in (0, {input_rate}]"
        )));
    }
    let bw = series
        .iter()
        .map(|s| bandwidth(s, input_rate))
        .fold(0.0, f64::max);
    if candidate_rate < 2.0 * bw {
        return Err(Error::BelowNyquist {
            candidate: candidate_rate,
            bound: 2.0 * bw,
        });
    }
    let factor = ((input_rate / candidate_rate).round() as usize).max(1);
    Ok(Subsampled {
        factor,
        rate: input_rate / factor as f64,
        bandwidth: bw,
        series: series.iter().map(|s| decimate(s, factor)).collect(),
    })
}
