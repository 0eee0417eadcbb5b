use log::warn;

use super::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AllanMethod {
    /// Adjacent, disjoint blocks.
    #[default]
    NonOverlapping,
    /// Every start offset; lower variance of the estimate.
    Overlapping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllanResult {
    /// Averaging times actually used (snapped down to a multiple of dt).
    pub tau_avgs: Vec<f64>,
    pub adevs: Vec<f64>,
    /// Number of block means entering each point.
    pub n_blocks: Vec<usize>,
    /// Requested averaging times that could not be evaluated.
    pub skipped: Vec<(f64, Error)>,
}

/// Non-overlapping Allan deviation at each requested averaging time.
pub fn allan_deviation(series: &TimeSeries, tau_avgs: &[f64]) -> Result<AllanResult> {
    allan_deviation_with(series, tau_avgs, AllanMethod::NonOverlapping)
}

pub fn allan_deviation_with(
    series: &TimeSeries,
    tau_avgs: &[f64],
    method: AllanMethod,
) -> Result<AllanResult> {
    let y = &series.samples;
    let n = y.len();
    // Referencing to the first sample keeps the running sums small and makes
    // a constant input give exactly zero.
    let y0 = y[0];
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in y {
        prefix.push(prefix[prefix.len() - 1] + (v - y0));
    }
    let block_mean = |start: usize, m: usize| (prefix[start + m] - prefix[start]) / m as f64;

    let mut out = AllanResult {
        tau_avgs: Vec::new(),
        adevs: Vec::new(),
        n_blocks: Vec::new(),
        skipped: Vec::new(),
    };
    for &tau in tau_avgs {
        // Small tolerance so that 3·dt requested as 0.03 with dt = 0.01 is not
        // snapped down to 2·dt.
        let m = (tau / series.dt * (1.0 + 1e-9)).floor() as usize;
        if m == 0 {
            let err = Error::InsufficientData(format!("tau {tau:e} s is shorter than dt"));
            warn!("{err}");
            out.skipped.push((tau, err));
            continue;
        }
        let snapped = m as f64 * series.dt;
        if (snapped - tau).abs() > 1e-9 * tau {
            warn!("tau {tau:e} s snapped down to {snapped:e} s");
        }
        let blocks = n / m;
        if blocks < 2 {
            let err = Error::InsufficientData(format!(
                "tau {snapped:e} s leaves {blocks} block(s), need at least 2"
            ));
            warn!("{err}");
            out.skipped.push((tau, err));
            continue;
        }
        let (var, count) = match method {
            AllanMethod::NonOverlapping => {
                let means: Vec<f64> = (0..blocks).map(|i| block_mean(i * m, m)).collect();
                let diffs: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
                (crate::numeric::pairwise_sum(&diffs) / (2.0 * (blocks - 1) as f64), blocks)
            }
            AllanMethod::Overlapping => {
                let terms = n + 1 - 2 * m;
                let diffs: Vec<f64> = (0..terms)
                    .map(|j| (block_mean(j + m, m) - block_mean(j, m)).powi(2))
                    .collect();
                (crate::numeric::pairwise_sum(&diffs) / (2.0 * terms as f64), blocks)
            }
        };
        out.tau_avgs.push(snapped);
        out.adevs.push(var.max(0.0).sqrt());
        out.n_blocks.push(count);
    }
    if out.tau_avgs.is_empty() && !tau_avgs.is_empty() {
        return Err(Error::InsufficientData(
            "no requested averaging time leaves at least 2 blocks".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::shot_rng;
    use crate::numeric::linear_slope;
    use rand_distr::{Distribution, StandardNormal};

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = shot_rng(seed, 0);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn log_taus(dt: f64, lo: usize, decades: u32) -> Vec<f64> {
        (0..=4 * decades)
            .map(|i| (lo as f64 * 10f64.powf(i as f64 / 4.0)).round() * dt)
            .collect()
    }

    #[test]
    fn constant_series_is_exactly_zero() {
        let s = TimeSeries::new(vec![3.7; 1000], 0.1, 0.0).unwrap();
        for method in [AllanMethod::NonOverlapping, AllanMethod::Overlapping] {
            let r = allan_deviation_with(&s, &[0.1, 0.5, 10.0, 50.0], method).unwrap();
            assert!(r.adevs.iter().all(|&a| a == 0.0));
        }
    }

    #[test]
    fn alternating_series() {
        let y: Vec<f64> = (0..1001).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = TimeSeries::new(y, 1.0, 0.0).unwrap();
        let r = allan_deviation(&s, &[1.0]).unwrap();
        assert!((r.adevs[0].powi(2) - 2.0).abs() < 1e-12);
        assert_eq!(r.n_blocks[0], 1001);
    }

    #[test]
    fn snapping_and_skipping() {
        let s = TimeSeries::new(vec![0.0; 100], 0.01, 0.0).unwrap();
        let r = allan_deviation(&s, &[0.025, 0.03, 0.001, 0.6]).unwrap();
        assert_eq!(r.tau_avgs.len(), 2);
        assert!((r.tau_avgs[0] - 0.02).abs() < 1e-15);
        assert!((r.tau_avgs[1] - 0.03).abs() < 1e-15);
        assert_eq!(r.skipped.len(), 2);
        assert!(r.n_blocks.iter().all(|&b| b >= 2));
        assert!(allan_deviation(&s, &[0.6]).is_err());
    }

    #[test]
    fn white_noise_slope() {
        let dt = 0.01;
        let s = TimeSeries::new(white(1_000_000, 1), dt, 0.0).unwrap();
        let taus = log_taus(dt, 10, 2);
        for method in [AllanMethod::NonOverlapping, AllanMethod::Overlapping] {
            let r = allan_deviation_with(&s, &taus, method).unwrap();
            let lx: Vec<f64> = r.tau_avgs.iter().map(|t| t.ln()).collect();
            let ly: Vec<f64> = r.adevs.iter().map(|a| a.ln()).collect();
            let slope = linear_slope(&lx, &ly);
            assert!((slope + 0.5).abs() < 0.05, "{method:?} slope {slope}");
            // σ_y(τ) ≈ σ/√(τ/dt)
            let m = r.tau_avgs[0] / dt;
            assert!((r.adevs[0] * m.sqrt() - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn random_walk_slope() {
        let dt = 1.0;
        let mut acc = 0.0;
        let walk: Vec<f64> = white(1_000_000, 2)
            .into_iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        let s = TimeSeries::new(walk, dt, 0.0).unwrap();
        let r = allan_deviation_with(&s, &log_taus(dt, 10, 2), AllanMethod::Overlapping).unwrap();
        let lx: Vec<f64> = r.tau_avgs.iter().map(|t| t.ln()).collect();
        let ly: Vec<f64> = r.adevs.iter().map(|a| a.ln()).collect();
        let slope = linear_slope(&lx, &ly);
        assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
    }
}
