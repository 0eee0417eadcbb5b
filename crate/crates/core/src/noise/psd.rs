use std::f64::consts::PI;

use super::Psd;
use super::sensitivity::{SensitivityProfile, transfer_function_exact};
use crate::error::{Error, Result};
use crate::numeric::simpson;

/// What to do when the PSD table does not span the required band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coverage {
    /// Fail with a coverage error.
    #[default]
    Require,
    /// Integrate what is there and report the truncation estimate.
    Allow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceResult {
    pub variance: f64,
    /// Estimated contribution of the uncovered part of the band, obtained by
    /// holding the PSD at its edge value. Zero when the band is covered.
    pub truncation: f64,
    pub band: (f64, f64),
    pub covered: bool,
}

/// Band a PSD table must span: from 1% of the fringe frequency 2π/T up to
/// 100 Ω_R, well past the pulse-bandwidth roll-off.
pub fn coverage_band(profile: &SensitivityProfile) -> (f64, f64) {
    (2.0 * PI * 0.01 / profile.interrogation_time, 100.0 * profile.omega_r)
}

/// Composite Simpson on `[a, b]` split geometrically (ratio ≤ 1.1) and with
/// at least 32 nodes per oscillation of period `period`.
fn integrate_range<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, period: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let a = if a > 0.0 { a } else { b * 1e-9 };
    let pieces = ((b / a).ln() / 1.1f64.ln()).ceil().max(1.0) as usize;
    let ratio = (b / a).powf(1.0 / pieces as f64);
    let mut total = 0.0;
    let mut lo = a;
    for i in 0..pieces {
        let hi = if i + 1 == pieces { b } else { lo * ratio };
        let n = ((32.0 * (hi - lo) / period).ceil() as usize).max(8);
        total += simpson(f, lo, hi, n);
        lo = hi;
    }
    total
}

/// ∫ weight(ω) S(ω) dω over the PSD support, with coverage checking against
/// [`coverage_band`].
pub fn weighted_integral<W: Fn(f64) -> f64>(
    psd: &Psd,
    weight: W,
    profile: &SensitivityProfile,
    coverage: Coverage,
) -> Result<VarianceResult> {
    let band = coverage_band(profile);
    let period = 2.0 * PI / profile.duration();
    let mut variance = 0.0;
    for (f, v) in psd.freqs.windows(2).zip(psd.values.windows(2)) {
        if v[0] == 0.0 && v[1] == 0.0 {
            continue;
        }
        let integrand = |w: f64| weight(w) * (v[0] + (v[1] - v[0]) * (w - f[0]) / (f[1] - f[0]));
        variance += integrate_range(&integrand, f[0], f[1], period);
    }
    let (lo, hi) = (psd.min_freq(), psd.max_freq());
    let mut truncation = 0.0;
    if lo > band.0 {
        let edge = psd.values[0];
        truncation += edge * integrate_range(&weight, band.0, lo, period);
    }
    if hi < band.1 {
        let edge = psd.values[psd.values.len() - 1];
        truncation += edge * integrate_range(&weight, hi, band.1, period);
    }
    let covered = lo <= band.0 && hi >= band.1 * (1.0 - 1e-12);
    if !covered && coverage == Coverage::Require {
        return Err(Error::Coverage(format!(
            "PSD spans [{lo:.4e}, {hi:.4e}] rad/s but [{:.4e}, {:.4e}] rad/s is required; \
             estimated truncation {truncation:.3e}",
            band.0, band.1
        )));
    }
    Ok(VarianceResult {
        variance,
        truncation,
        band,
        covered,
    })
}

/// σ_Φ² = ∫ [ω|G(ω)|]² S_φ(ω) dω.
pub fn phase_variance_from_psd(
    s_phi: &Psd,
    profile: &SensitivityProfile,
    coverage: Coverage,
) -> Result<VarianceResult> {
    weighted_integral(
        s_phi,
        |w| w * w * transfer_function_exact(w, profile).norm_sqr(),
        profile,
        coverage,
    )
}

/// Vibration term in its literal form: (k_eff²/τ_m) ∫ |G(ω)/ω²|² S_a(ω) dω
/// with τ_m the cycle time.
///
/// The units do not reduce to a phase variance and, for a spectrum flat at
/// low frequency, the integrand grows as 1/ω², so the value is set by the
/// lower edge of the table. [`vibration_phase_variance`] is the consistent
/// counterpart.
pub fn allan_from_acceleration_psd(
    s_a: &Psd,
    profile: &SensitivityProfile,
    k_eff: f64,
    cycle_time: f64,
    coverage: Coverage,
) -> Result<VarianceResult> {
    if !(cycle_time >= profile.duration() * (1.0 - 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "cycle time {cycle_time:e} s is shorter than the sequence {:e} s",
            profile.duration()
        )));
    }
    let pref = k_eff * k_eff / cycle_time;
    weighted_integral(
        s_a,
        |w| pref * transfer_function_exact(w, profile).norm_sqr() / w.powi(4),
        profile,
        coverage,
    )
}

/// Per-shot phase variance from vibration, k_eff² ∫ |G(ω)|²/ω² S_a(ω) dω.
/// The phase response to acceleration is k_eff·G(ω)/(iω), the transform of
/// the double integral of g_s.
pub fn vibration_phase_variance(
    s_a: &Psd,
    profile: &SensitivityProfile,
    k_eff: f64,
    coverage: Coverage,
) -> Result<VarianceResult> {
    let k2 = k_eff * k_eff;
    weighted_integral(
        s_a,
        |w| k2 * transfer_function_exact(w, profile).norm_sqr() / (w * w),
        profile,
        coverage,
    )
}
