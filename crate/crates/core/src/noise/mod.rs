//! Stability analysis: sensitivity function, Allan statistics, PSD variance
//! integrals and noise synthesis for Monte-Carlo checks.
//!
//! Spectral densities are one-sided in angular frequency: a stationary
//! signal with density `S(ω)` has variance `∫₀^∞ S(ω) dω`.

mod allan;
mod montecarlo;
mod psd;
mod sensitivity;
mod synth;

pub use allan::{AllanMethod, AllanResult, allan_deviation, allan_deviation_with};
pub use montecarlo::{
    McResult, phase_noise_monte_carlo, shot_phase_from_phase_noise,
    shot_phase_from_vibration, vibration_monte_carlo,
};
pub use psd::{
    Coverage, VarianceResult, allan_from_acceleration_psd, coverage_band,
    phase_variance_from_psd, vibration_phase_variance, weighted_integral,
};
pub use sensitivity::{
    SensitivityForm, SensitivityProfile, acceleration_kernel, acceleration_phase,
    acceleration_phase_nested, sensitivity_a, sensitivity_g, square_transfer,
    transfer_function, transfer_function_exact, transfer_function_with,
};
pub use synth::{periodogram, synthesize_noise};

use crate::error::{Error, Result};

/// Uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub t0: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "time series needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        Ok(Self { samples, dt, t0 })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

/// Tabulated one-sided spectral density, linearly interpolated between
/// knots and zero outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

impl Psd {
    pub fn new(freqs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if freqs.len() != values.len() || freqs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "PSD needs matching columns with at least 2 rows ({} freqs, {} values)",
                freqs.len(),
                values.len()
            )));
        }
        if freqs[0] < 0.0 || freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "PSD frequencies must be non-negative and strictly ascending".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("PSD values must be finite and non-negative".into()));
        }
        Ok(Self { freqs, values })
    }

    /// Constant density `level` on `[lo, hi]`.
    pub fn white(level: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![level, level])
    }

    pub fn min_freq(&self) -> f64 {
        self.freqs[0]
    }

    pub fn max_freq(&self) -> f64 {
        self.freqs[self.freqs.len() - 1]
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let f = &self.freqs;
        if omega < f[0] || omega > f[f.len() - 1] {
            return 0.0;
        }
        let j = f.partition_point(|&x| x <= omega).clamp(1, f.len() - 1);
        let (x0, x1) = (f[j - 1], f[j]);
        let (y0, y1) = (self.values[j - 1], self.values[j]);
        y0 + (y1 - y0) * (omega - x0) / (x1 - x0)
    }

    /// ∫ S dω, exact for the piecewise-linear interpolant.
    pub fn integral(&self) -> f64 {
        self.freqs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(f, v)| 0.5 * (v[0] + v[1]) * (f[1] - f[0]))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}
