use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::{Psd, TimeSeries};
use crate::error::{Error, Result};

/// Largest record [`synthesize_noise`] will build (about 4 GiB of spectrum).
pub const MAX_SAMPLES: usize = 1 << 28;

/// Gaussian stationary noise with one-sided density `target`.
///
/// Each FFT bin k (ω_k = kΔω, Δω = 2π/(N dt)) gets an independent complex
/// normal amplitude with E|Z_k|² = 2 S(ω_k) Δω, so the sample variance
/// approaches ∫ S dω.
pub fn synthesize_noise(target: &Psd, duration: f64, dt: f64, seed: u64) -> Result<TimeSeries> {
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration and dt must be positive (duration = {duration}, dt = {dt})"
        )));
    }
    let nyquist = PI / dt;
    if target.max_freq() > nyquist * (1.0 + 1e-12) {
        return Err(Error::Resolution(format!(
            "dt = {dt:e} s resolves up to {nyquist:.4e} rad/s, target extends to {:.4e} rad/s",
            target.max_freq()
        )));
    }
    let min_freq = target
        .freqs
        .iter()
        .copied()
        .find(|&f| f > 0.0)
        .unwrap_or(target.max_freq());
    if duration < 100.0 / min_freq * (1.0 - 1e-12) {
        return Err(Error::Resolution(format!(
            "duration {duration:e} s is shorter than 100/omega_min = {:e} s",
            100.0 / min_freq
        )));
    }
    let n_f = (duration / dt).round().max(2.0);
    if n_f > MAX_SAMPLES as f64 {
        return Err(Error::Resolution(format!(
            "duration {duration:e} s at dt = {dt:e} s needs {n_f:e} samples, limit is {MAX_SAMPLES}"
        )));
    }
    let n = n_f as usize;
    let dw = 2.0 * PI / (n as f64 * dt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let half = n / 2;
    for k in 1..=half {
        let s = target.eval(k as f64 * dw);
        // Draw for every bin, even empty ones, so the stream does not depend
        // on the target shape.
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        if s == 0.0 {
            continue;
        }
        let scale = (s * dw).sqrt();
        if 2 * k == n {
            spec[k] = Complex64::new(scale * re, 0.0);
        } else {
            let z = Complex64::new(re, im) * (0.5 * scale);
            spec[k] = z;
            spec[n - k] = z.conj();
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n).process(&mut spec);
    TimeSeries::new(spec.into_iter().map(|c| c.re).collect(), dt, 0.0)
}

/// One-sided periodogram (ω_k, Ŝ_k) for k = 1..N/2, normalized so that
/// Σ Ŝ_k Δω equals the mean square of the zero-mean part of the series.
pub fn periodogram(series: &TimeSeries) -> (Vec<f64>, Vec<f64>) {
    let n = series.len();
    let mut buf: Vec<Complex64> = series.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let dw = 2.0 * PI / (n as f64 * series.dt);
    let norm = (n as f64).powi(2) * dw;
    (1..=n / 2)
        .map(|k| {
            let factor = if 2 * k == n { 1.0 } else { 2.0 };
            (k as f64 * dw, factor * buf[k].norm_sqr() / norm)
        })
        .unzip()
}
