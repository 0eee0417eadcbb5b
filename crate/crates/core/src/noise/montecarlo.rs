use rayon::prelude::*;

use super::allan::allan_deviation;
use super::sensitivity::{SensitivityProfile, acceleration_kernel, sensitivity_g};
use super::synth::synthesize_noise;
use super::{Psd, TimeSeries};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Interferometer phase for one shot, δΦ = ∫ g_s dφ, from laser-phase
/// samples `phi[0..=L]` spaced by `dt` starting at the first pulse.
pub fn shot_phase_from_phase_noise(phi: &[f64], dt: f64, profile: &SensitivityProfile) -> f64 {
    let terms: Vec<f64> = phi
        .windows(2)
        .enumerate()
        .map(|(n, w)| sensitivity_g((n as f64 + 0.5) * dt, profile) * (w[1] - w[0]))
        .collect();
    pairwise_sum(&terms)
}

/// Interferometer phase for one shot, δΦ = k_eff ∫ K δa dt, from
/// acceleration samples spaced by `dt` starting at the first pulse.
pub fn shot_phase_from_vibration(accel: &[f64], dt: f64, profile: &SensitivityProfile, k_eff: f64) -> f64 {
    // K vanishes at both ends of the sequence, so the trapezoid rule reduces
    // to a plain sum.
    let terms: Vec<f64> = accel
        .iter()
        .enumerate()
        .map(|(n, a)| acceleration_kernel(n as f64 * dt, profile) * a)
        .collect();
    k_eff * dt * pairwise_sum(&terms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub phases: Vec<f64>,
    /// Sample variance of the per-shot phases.
    pub variance: f64,
    /// Allan variance of the phase sequence at τ = one cycle.
    pub allan_variance: f64,
    /// Spacing of consecutive shots (s), the sequence length rounded up to
    /// a whole number of samples.
    pub cycle_time: f64,
}

fn run_shots<F>(
    psd: &Psd,
    profile: &SensitivityProfile,
    shots: usize,
    dt: f64,
    seed: u64,
    workers: usize,
    per_shot: F,
) -> Result<McResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if shots < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 shots, got {shots}")));
    }
    let len = (profile.duration() / dt * (1.0 - 1e-12)).ceil() as usize;
    let samples = shots * len + 1;
    let min_freq = psd.freqs.iter().copied().find(|&f| f > 0.0).unwrap_or(1.0);
    let duration = (samples as f64 * dt).max(100.0 / min_freq);
    let noise = synthesize_noise(psd, duration, dt, seed)?;
    let slice = |i: usize| &noise.samples[i * len..=i * len + len];
    let phases: Vec<f64> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..shots).into_par_iter().map(|i| per_shot(slice(i))).collect())
    } else {
        (0..shots).map(|i| per_shot(slice(i))).collect()
    };
    let n = phases.len() as f64;
    let mean = pairwise_sum(&phases) / n;
    let sq: Vec<f64> = phases.iter().map(|p| (p - mean).powi(2)).collect();
    let variance = pairwise_sum(&sq) / (n - 1.0);
    let cycle_time = len as f64 * dt;
    let allan = allan_deviation(&TimeSeries::new(phases.clone(), cycle_time, 0.0)?, &[cycle_time])?;
    Ok(McResult {
        phases,
        variance,
        allan_variance: allan.adevs[0].powi(2),
        cycle_time,
    })
}

/// Monte-Carlo phase variance for laser phase noise with density `s_phi`:
/// one long synthesized record, cut into back-to-back shots.
pub fn phase_noise_monte_carlo(
    s_phi: &Psd,
    profile: &SensitivityProfile,
    shots: usize,
    dt: f64,
    seed: u64,
    workers: usize,
) -> Result<McResult> {
    run_shots(s_phi, profile, shots, dt, seed, workers, |phi| {
        shot_phase_from_phase_noise(phi, dt, profile)
    })
}

/// Monte-Carlo phase statistics for platform vibration with acceleration
/// density `s_a`.
pub fn vibration_monte_carlo(
    s_a: &Psd,
    profile: &SensitivityProfile,
    k_eff: f64,
    shots: usize,
    dt: f64,
    seed: u64,
    workers: usize,
) -> Result<McResult> {
    run_shots(s_a, profile, shots, dt, seed, workers, |a| {
        shot_phase_from_vibration(a, dt, profile, k_eff)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::psd::{Coverage, coverage_band, phase_variance_from_psd, vibration_phase_variance};

    #[test]
    fn phase_step_between_first_pulses() {
        let p = SensitivityProfile::new(0.01, 1e-3).unwrap();
        let dt = 1e-5;
        let len = (p.duration() / dt).ceil() as usize;
        let jump_at = (0.5 * p.interrogation_time / dt) as usize;
        let phi: Vec<f64> = (0..=len).map(|n| if n > jump_at { 0.3 } else { 0.0 }).collect();
        assert!((shot_phase_from_phase_noise(&phi, dt, &p) + 0.3).abs() < 1e-12);
        let jump_at = (1.5 * p.interrogation_time / dt) as usize;
        let phi: Vec<f64> = (0..=len).map(|n| if n > jump_at { 0.3 } else { 0.0 }).collect();
        assert!((shot_phase_from_phase_noise(&phi, dt, &p) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn constant_acceleration_shot() {
        let p = SensitivityProfile::new(0.01, 1e-6).unwrap();
        let dt = 1e-7;
        let len = (p.duration() / dt).ceil() as usize;
        let a = vec![2.0; len + 1];
        let phase = shot_phase_from_vibration(&a, dt, &p, 3.0);
        let expect = 3.0 * 2.0 * 0.01f64.powi(2);
        assert!(((phase - expect) / expect).abs() < 1e-3);
    }

    #[test]
    fn workers_do_not_change_results() {
        let p = SensitivityProfile::new(0.01, 1e-3).unwrap();
        let (lo, hi) = coverage_band(&p);
        let psd = Psd::white(1e-9, lo, hi).unwrap();
        let a = phase_noise_monte_carlo(&psd, &p, 50, 1e-5, 3, 1).unwrap();
        let b = phase_noise_monte_carlo(&psd, &p, 50, 1e-5, 3, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn white_phase_noise_matches_psd_integral() {
        let p = SensitivityProfile::new(0.01, 1e-3).unwrap();
        let (lo, hi) = coverage_band(&p);
        let psd = Psd::white(1e-9, lo, hi).unwrap();
        let pred = phase_variance_from_psd(&psd, &p, Coverage::Require).unwrap().variance;
        let mc = phase_noise_monte_carlo(&psd, &p, 500, 1e-5, 17, 4).unwrap();
        let ratio = mc.variance / pred;
        assert!((ratio - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn white_vibration_matches_consistent_integral() {
        let p = SensitivityProfile::new(0.01, 1e-3).unwrap();
        let (lo, hi) = coverage_band(&p);
        let psd = Psd::white(1e-10, lo, hi).unwrap();
        let k = 1.61e7;
        let pred = vibration_phase_variance(&psd, &p, k, Coverage::Require).unwrap().variance;
        let mc = vibration_monte_carlo(&psd, &p, k, 500, 1e-5, 23, 4).unwrap();
        let ratio = mc.allan_variance / pred;
        assert!((ratio - 1.0).abs() < 0.25, "ratio {ratio}");
    }
}
