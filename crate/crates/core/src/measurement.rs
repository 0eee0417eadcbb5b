//! Simulated gravity measurement: chirp scans, shot-noise detection and
//! fringe fitting.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::trajectory::chirped_phase;

/// Excited-state probability ½[1 − cos((β − k_eff g)T² + Δφ)].
pub fn ideal_fringe(beta: f64, k_eff: f64, g_true: f64, interrogation_time: f64, dphi_laser: f64) -> f64 {
    0.5 * (1.0 - chirped_phase(beta, k_eff, g_true, interrogation_time, dphi_laser).cos())
}

/// Fringe period in chirp rate, 2π/T².
pub fn fringe_period(interrogation_time: f64) -> f64 {
    2.0 * PI / (interrogation_time * interrogation_time)
}

/// Independent random stream for shot `index` of a run seeded with `seed`.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fraction of `n_atoms` detected in the excited state.
pub fn detect<R: rand::Rng + ?Sized>(p_ideal: f64, n_atoms: u64, rng: &mut R) -> Result<f64> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
    }
    let p = p_ideal.clamp(0.0, 1.0);
    let dist = Binomial::new(n_atoms, p)
        .map_err(|e| Error::InvalidParameter(format!("binomial({n_atoms}, {p}): {e}")))?;
    Ok(dist.sample(rng) as f64 / n_atoms as f64)
}

/// Inputs of a simulated scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub k_eff: f64,
    pub g_true: f64,
    pub interrogation_time: f64,
    pub dphi_laser: f64,
    /// Atoms per shot; `None` records the ideal probabilities.
    pub n_atoms: Option<u64>,
    /// Standard deviation of a Gaussian phase error added to every shot (rad).
    pub phase_noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub betas: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub measured: Vec<f64>,
    pub n_atoms: Option<u64>,
    pub seed: u64,
}

impl FringeScan {
    pub fn validate(&self) -> Result<()> {
        if self.betas.len() != self.probabilities.len() || self.betas.len() != self.measured.len() {
            return Err(Error::InsufficientData(format!(
                "scan columns differ in length ({}, {}, {})",
                self.betas.len(),
                self.probabilities.len(),
                self.measured.len()
            )));
        }
        if let Some(p) = self
            .probabilities
            .iter()
            .chain(&self.measured)
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        Ok(())
    }
}

/// `n` chirp rates evenly spaced over `[center − half_width, center + half_width]`.
pub fn scan_grid(center: f64, half_width: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![center];
    }
    (0..n)
        .map(|i| center - half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect()
}

/// Simulate one scan. Shot `i` draws from `shot_rng(seed, i)`.
pub fn simulate_scan(betas: &[f64], cfg: &ScanConfig) -> Result<FringeScan> {
    let noise = if cfg.phase_noise > 0.0 {
        Some(Normal::new(0.0, cfg.phase_noise).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut probabilities = Vec::with_capacity(betas.len());
    let mut measured = Vec::with_capacity(betas.len());
    for (i, &beta) in betas.iter().enumerate() {
        let p = ideal_fringe(beta, cfg.k_eff, cfg.g_true, cfg.interrogation_time, cfg.dphi_laser);
        probabilities.push(p);
        let mut rng = shot_rng(cfg.seed, i as u64);
        let p_shot = match &noise {
            Some(n) => ideal_fringe(
                beta,
                cfg.k_eff,
                cfg.g_true,
                cfg.interrogation_time,
                cfg.dphi_laser + n.sample(&mut rng),
            ),
            None => p,
        };
        measured.push(match cfg.n_atoms {
            Some(n) => detect(p_shot, n, &mut rng)?,
            None => p_shot,
        });
    }
    Ok(FringeScan {
        betas: betas.to_vec(),
        probabilities,
        measured,
        n_atoms: cfg.n_atoms,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityEstimate {
    pub g_hat: f64,
    pub sigma_g: f64,
    /// Chirp rate that cancels the total phase, after offset correction and
    /// folding to the fringe nearest the scan centre.
    pub beta_null: f64,
    /// Fitted minimum position β₀ of A − B cos((β − β₀)T²), folded likewise.
    pub beta_fit: f64,
    pub offset: f64,
    pub amplitude: f64,
    /// RMS residual of the fit.
    pub fit_residual: f64,
    pub iterations: usize,
}

/// Options of [`estimate_g_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Known constant laser phase Δφ; the null is corrected by Δφ/T².
    pub dphi_known: f64,
    pub grid_points: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the phase (rad) and amplitude steps.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            dphi_known: 0.0,
            grid_points: 72,
            max_iterations: 100,
            tolerance: 1e-12,
        }
    }
}

/// Fit with default options.
pub fn estimate_g(scan: &FringeScan, k_eff: f64, interrogation_time: f64) -> Result<GravityEstimate> {
    estimate_g_with(scan, k_eff, interrogation_time, &FitOptions::default())
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI { PI } else { y }
}

/// Linear least squares for (A, B) at fixed phase `u`; returns (A, B, SSE).
fn linear_ab(x: &[f64], y: &[f64], u: f64) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    let (mut sc, mut scc, mut sy, mut syc) = (0.0, 0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let c = -(xi - u).cos();
        sc += c;
        scc += c * c;
        sy += yi;
        syc += yi * c;
    }
    let det = n * scc - sc * sc;
    if det.abs() < 1e-12 * n * n {
        return None;
    }
    let a = (scc * sy - sc * syc) / det;
    let b = (n * syc - sc * sy) / det;
    let sse = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - a + b * (xi - u).cos();
            r * r
        })
        .sum();
    Some((a, b, sse))
}

/// Least-squares fit of A − B cos((β − β₀)T²) and conversion of the null to g.
pub fn estimate_g_with(
    scan: &FringeScan,
    k_eff: f64,
    interrogation_time: f64,
    opts: &FitOptions,
) -> Result<GravityEstimate> {
    scan.validate()?;
    let t2 = interrogation_time * interrogation_time;
    if !(t2 > 0.0) || k_eff == 0.0 {
        return Err(Error::InvalidParameter("T and k_eff must be non-zero".into()));
    }
    let n = scan.betas.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!("{n} scan points, need at least 4")));
    }
    let mut sorted = scan.betas.clone();
    sorted.sort_by(f64::total_cmp);
    let span = (sorted[n - 1] - sorted[0]) * t2 / (2.0 * PI);
    if span < 1.5 {
        return Err(Error::AmbiguousFringe(format!(
            "scan spans {span:.3} fringe periods, need at least 1.5"
        )));
    }
    let max_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let per_period = 2.0 * PI / (max_gap * t2);
    if per_period < 8.0 {
        return Err(Error::AmbiguousFringe(format!(
            "{per_period:.2} points per fringe period, need at least 8"
        )));
    }

    let center = 0.5 * (sorted[0] + sorted[n - 1]);
    let x: Vec<f64> = scan.betas.iter().map(|b| (b - center) * t2).collect();
    let y = &scan.measured;

    // Coarse grid over one period, best linear (A, B) at each phase.
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for j in 0..opts.grid_points.max(8) {
        let u = -PI + 2.0 * PI * j as f64 / opts.grid_points.max(8) as f64;
        if let Some((a, b, sse)) = linear_ab(&x, y, u) {
            if b > 0.0 && best.is_none_or(|bst| sse < bst.3) {
                best = Some((a, b, u, sse));
            }
        }
    }
    let Some((mut a, mut b, mut u, _)) = best else {
        return Err(Error::FitFailure("no fringe contrast found on the seed grid".into()));
    };

    let residuals = |a: f64, b: f64, u: f64| -> Vec<f64> {
        x.iter().zip(y).map(|(&xi, &yi)| yi - (a - b * (xi - u).cos())).collect()
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut jtj = Matrix3::zeros();
    while iterations < opts.max_iterations {
        iterations += 1;
        let r = residuals(a, b, u);
        let mut jtr = Vector3::zeros();
        jtj = Matrix3::zeros();
        for (&xi, &ri) in x.iter().zip(&r) {
            let (s, c) = (xi - u).sin_cos();
            let j = Vector3::new(1.0, -c, -b * s);
            jtj += j * j.transpose();
            jtr += j * ri;
        }
        let Some(step) = jtj.lu().solve(&jtr) else {
            return Err(Error::FitFailure(format!(
                "singular normal matrix at iteration {iterations} (A = {a:.4}, B = {b:.4})"
            )));
        };
        a += step[0];
        b += step[1];
        u += step[2];
        if !(a.is_finite() && b.is_finite() && u.is_finite()) {
            return Err(Error::FitFailure(format!("non-finite parameters at iteration {iterations}")));
        }
        if step[2].abs() < opts.tolerance && step[1].abs() < opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        let rms = (residuals(a, b, u).iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
        return Err(Error::FitFailure(format!(
            "no convergence after {iterations} iterations (A = {a:.6}, B = {b:.6}, rms = {rms:.3e})"
        )));
    }
    if b < 0.0 {
        b = -b;
        u += PI;
    }

    let sse: f64 = residuals(a, b, u).iter().map(|r| r * r).sum();
    let dof = (n - 3) as f64;
    let var_u = jtj
        .try_inverse()
        .map(|inv| inv[(2, 2)] * sse / dof)
        .ok_or_else(|| Error::FitFailure("singular covariance".into()))?;
    let sigma_beta = var_u.max(0.0).sqrt() / t2;

    let u_fit = wrap_pi(u);
    let u_null = wrap_pi(u + opts.dphi_known);
    let beta_null = center + u_null / t2;
    Ok(GravityEstimate {
        g_hat: beta_null / k_eff,
        sigma_g: sigma_beta / k_eff.abs(),
        beta_null,
        beta_fit: center + u_fit / t2,
        offset: a,
        amplitude: b,
        fit_residual: (sse / n as f64).sqrt(),
        iterations,
    })
}

/// Resolve the fringe ambiguity with two interrogation times.
///
/// Each estimate is known only modulo its period 2π/(k_eff T²). The long-T
/// candidate within `max_fringes` of its fitted value that agrees best with
/// the short-T candidates is returned.
pub fn disambiguate_two_t(
    short: &GravityEstimate,
    t_short: f64,
    long: &GravityEstimate,
    t_long: f64,
    k_eff: f64,
    max_fringes: i64,
) -> f64 {
    let p_short = fringe_period(t_short) / k_eff.abs();
    let p_long = fringe_period(t_long) / k_eff.abs();
    let mut best = (f64::INFINITY, long.g_hat);
    for m in -max_fringes..=max_fringes {
        let cand = long.g_hat + m as f64 * p_long;
        let off = (cand - short.g_hat) / p_short;
        let dist = (off - off.round()).abs() * p_short;
        if dist < best.0 {
            best = (dist, cand);
        }
    }
    best.1
}

/// Repeat a scan and fit for every seed, in parallel over `workers` threads.
/// The output order follows `seeds`, independent of scheduling.
pub fn estimate_ensemble(
    betas: &[f64],
    cfg: &ScanConfig,
    seeds: &[u64],
    workers: usize,
) -> Result<Vec<Result<GravityEstimate>>> {
    let run = |seed: u64| {
        let scan = simulate_scan(betas, &ScanConfig { seed, ..*cfg })?;
        estimate_g(&scan, cfg.k_eff, cfg.interrogation_time)
    };
    if workers <= 1 {
        return Ok(seeds.iter().map(|&s| run(s)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| run(s)).collect()))
}
