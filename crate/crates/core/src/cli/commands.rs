use std::f64::consts::PI;
use std::path::PathBuf;

use super::config::RunConfig;
use super::output::{Output, Summary, read_table};
use super::{CliError, Command, RunOptions};
use crate::measurement::{
    FitOptions, ScanConfig, estimate_g_with, fringe_period, scan_grid, simulate_scan,
};
use crate::noise::{
    AllanMethod, Coverage, Psd, SensitivityForm, SensitivityProfile, TimeSeries, acceleration_kernel,
    allan_deviation_with, allan_from_acceleration_psd, phase_noise_monte_carlo, phase_variance_from_psd,
    sensitivity_g, square_transfer, synthesize_noise, transfer_function_exact, vibration_monte_carlo,
    vibration_phase_variance,
};
use crate::numeric::linear_slope;
use crate::twolevel::{evolve_pulse, ode_oracle};
use crate::types::{DEFAULT_G, DEFAULT_K_EFF, PulseParams, TwoLevelState, laser_phase_combination};

const DEFAULT_T: f64 = 0.1;
const DEFAULT_TAU_P: f64 = 1e-5;

pub(super) fn dispatch(command: Command, config: &RunConfig, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Output::new(&opts.out, command.name(), opts.seed)?;
    match command {
        Command::Rabi => rabi(config, &mut out)?,
        Command::Fringe => fringe(config, opts, &mut out, false)?,
        Command::Gsweep => fringe(config, opts, &mut out, true)?,
        Command::Allan => allan(config, &mut out)?,
        Command::Sensitivity => sensitivity(config, opts, &mut out)?,
        Command::PsdVariance => psd_variance(config, opts, &mut out)?,
        Command::Synth => synth(config, opts, &mut out)?,
    }
    Ok(out.written().to_vec())
}

fn profile(config: &RunConfig, opts: &RunOptions) -> Result<SensitivityProfile, CliError> {
    let t = config.positive_or("sequence.T", DEFAULT_T)?;
    let tau = config.positive_or("sequence.tau_p", DEFAULT_TAU_P)?;
    let form = if opts.paper_gs {
        SensitivityForm::Piecewise
    } else {
        SensitivityForm::Odd
    };
    config.set_resolved("sensitivity.form", if opts.paper_gs { "piecewise" } else { "odd" });
    Ok(SensitivityProfile::new(t, tau)?.with_form(form))
}

fn rabi(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let rabi = config.get_or("pulse.rabi", 2.0 * PI * 1e4)?;
    let detuning = config.get_or("pulse.detuning", 0.0)?;
    let phase = config.get_or("pulse.phase", 0.0)?;
    let omega_r = rabi.hypot(detuning);
    let duration = if omega_r > 0.0 {
        config.positive_or("pulse.duration", PI / omega_r)?
    } else {
        config.positive_or("pulse.duration", 1e-4)?
    };
    let samples: usize = config.get_or("pulse.samples", 101)?;
    if samples < 2 {
        return Err(config.invalid("pulse.samples", "need at least 2 samples").into());
    }
    let max_dt = if omega_r > 0.0 {
        2.0 * PI / (200.0 * omega_r)
    } else {
        duration / (samples - 1) as f64
    };
    let dt = config.positive_or("pulse.dt", max_dt)?;

    let start = TwoLevelState::ground();
    let mut oracle = start;
    let mut rows = Vec::with_capacity(samples);
    let mut max_diff: f64 = 0.0;
    let mut prev_t = 0.0;
    for i in 0..samples {
        let t = duration * i as f64 / (samples - 1) as f64;
        let closed = evolve_pulse(&start, &PulseParams::new(rabi, detuning, phase, 0.0, t));
        if t > prev_t {
            let span = t - prev_t;
            let steps = (span / dt * (1.0 - 1e-12)).ceil().max(1.0);
            let piece = PulseParams::new(rabi, detuning, phase, prev_t, span);
            oracle = ode_oracle(&oracle, &piece, span / steps)?;
        }
        prev_t = t;
        let (pc, po) = (closed.c_b.norm_sqr(), oracle.c_b.norm_sqr());
        max_diff = max_diff.max((pc - po).abs());
        rows.push(vec![t, pc, po]);
    }
    let last = rows[rows.len() - 1][1];
    out.csv("rabi.csv", &["t", "p_excited_closed", "p_excited_oracle"], rows, config)?;
    let mut s = Summary::default();
    s.num("omega_r", omega_r)
        .num("oracle_dt", dt)
        .num("p_excited_final", last)
        .num("max_discrepancy", max_diff);
    out.summary("rabi_summary.txt", &s, config)?;
    Ok(())
}

fn fringe(config: &RunConfig, opts: &RunOptions, out: &mut Output, grid_only: bool) -> Result<(), CliError> {
    let t = config.positive_or("sequence.T", DEFAULT_T)?;
    let k_eff = config.get_or("sequence.k_eff", DEFAULT_K_EFF)?;
    if k_eff == 0.0 {
        return Err(config.invalid("sequence.k_eff", "must be non-zero").into());
    }
    let phases = [
        config.get_or("sequence.phi1", 0.0)?,
        config.get_or("sequence.phi2", 0.0)?,
        config.get_or("sequence.phi3", 0.0)?,
    ];
    let g_true = config.get_or("constants.g", DEFAULT_G)?;
    let n_atoms: u64 = config.get_or("measurement.n_atoms", 0)?;
    let phase_noise = config.get_or("measurement.phase_noise", 0.0)?;
    if phase_noise < 0.0 {
        return Err(config.invalid("measurement.phase_noise", "must be non-negative").into());
    }

    let betas = match (grid_only, config.list_opt("scan.betas")?) {
        (true, Some(_)) => {
            return Err(config
                .invalid("scan.betas", "gsweep always scans the grid; remove scan.betas or use fringe")
                .into());
        }
        (false, Some(b)) => b,
        (_, None) => {
            let center = config.get_or("scan.center", k_eff * g_true)?;
            let half = config.positive_or("scan.half_width", 1.5 * fringe_period(t))?;
            let points: usize = config.get_or("scan.points", 50)?;
            if points < 4 {
                return Err(config.invalid("scan.points", "need at least 4 points").into());
            }
            scan_grid(center, half, points)
        }
    };

    let dphi = laser_phase_combination(phases);
    let cfg = ScanConfig {
        k_eff,
        g_true,
        interrogation_time: t,
        dphi_laser: dphi,
        n_atoms: (n_atoms > 0).then_some(n_atoms),
        phase_noise,
        seed: opts.seed,
    };
    let scan = simulate_scan(&betas, &cfg)?;
    let rows: Vec<Vec<f64>> = (0..betas.len())
        .map(|i| vec![scan.betas[i], scan.probabilities[i], scan.measured[i]])
        .collect();
    out.csv("fringe.csv", &["beta", "p_ideal", "p_measured"], rows, config)?;

    let fit = estimate_g_with(
        &scan,
        k_eff,
        t,
        &FitOptions {
            dphi_known: dphi,
            ..FitOptions::default()
        },
    )?;
    let mut s = Summary::default();
    s.num("g_hat", fit.g_hat)
        .num("sigma_g", fit.sigma_g)
        .num("g_true", g_true)
        .num("relative_error", (fit.g_hat - g_true) / g_true)
        .num("beta_null", fit.beta_null)
        .num("offset", fit.offset)
        .num("amplitude", fit.amplitude)
        .num("fit_residual", fit.fit_residual)
        .int("iterations", fit.iterations as u64)
        .int("points", betas.len() as u64);
    out.summary("fringe_summary.txt", &s, config)?;
    Ok(())
}

fn allan(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let path = config.path("allan.input")?;
    let table = read_table(&path, &[1, 2])?;
    let (samples, dt, t0) = if table[0].len() == 2 {
        if table.len() < 2 {
            return Err(CliError::Data(format!("{}: need at least 2 rows", path.display())));
        }
        let t0 = table[0][0];
        let dt = table[1][0] - t0;
        if !(dt > 0.0) {
            return Err(CliError::Data(format!("{}: time column must increase", path.display())));
        }
        for (i, w) in table.windows(2).enumerate() {
            let step = w[1][0] - w[0][0];
            if (step - dt).abs() > 1e-6 * dt {
                return Err(CliError::Data(format!(
                    "{}: non-uniform sampling at data row {} (step {step:e}, expected {dt:e})",
                    path.display(),
                    i + 2
                )));
            }
        }
        if config.is_set("allan.dt") {
            return Err(config.invalid("allan.dt", "input has a time column; dt is taken from it").into());
        }
        config.set_resolved("allan.dt", super::config::fmt_value(&dt));
        (table.iter().map(|r| r[1]).collect::<Vec<_>>(), dt, t0)
    } else {
        let dt: f64 = config.require("allan.dt")?;
        if !(dt > 0.0) {
            return Err(config.invalid("allan.dt", "must be positive").into());
        }
        (table.iter().map(|r| r[0]).collect(), dt, 0.0)
    };
    let n = samples.len();
    let series = TimeSeries::new(samples, dt, t0)?;
    let tau_min = config.positive_or("allan.tau_min", dt)?;
    let tau_max = config.positive_or("allan.tau_max", 0.5 * n as f64 * dt)?;
    let points: usize = config.get_or("allan.tau_points", 20)?;
    if points < 1 || tau_max < tau_min {
        return Err(config.invalid("allan.tau_points", "need tau_points >= 1 and tau_max >= tau_min").into());
    }
    let method = match config.get_or("allan.method", "nonoverlapping".to_string())?.as_str() {
        "nonoverlapping" => AllanMethod::NonOverlapping,
        "overlapping" => AllanMethod::Overlapping,
        other => {
            return Err(config
                .invalid("allan.method", format!("'{other}' is not 'nonoverlapping' or 'overlapping'"))
                .into());
        }
    };
    // Log-spaced grid, snapped to whole samples and deduplicated.
    let mut taus: Vec<f64> = (0..points)
        .map(|i| {
            let f = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            let tau = tau_min * (tau_max / tau_min).powf(f);
            (tau / dt * (1.0 + 1e-9)).floor().max(1.0) * dt
        })
        .collect();
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * *b);

    let r = allan_deviation_with(&series, &taus, method)?;
    let rows: Vec<Vec<f64>> = (0..r.tau_avgs.len())
        .map(|i| vec![r.tau_avgs[i], r.adevs[i], r.n_blocks[i] as f64])
        .collect();
    out.csv("allan.csv", &["tau", "adev", "n_blocks"], rows, config)?;

    let mut s = Summary::default();
    s.int("samples", n as u64)
        .num("dt", dt)
        .int("points", r.tau_avgs.len() as u64)
        .int("skipped", r.skipped.len() as u64);
    let positive: Vec<(f64, f64)> = r
        .tau_avgs
        .iter()
        .zip(&r.adevs)
        .filter(|(_, a)| **a > 0.0)
        .map(|(t, a)| (t.ln(), a.ln()))
        .collect();
    if positive.len() >= 2 {
        let (lx, ly): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        s.num("loglog_slope", linear_slope(&lx, &ly));
    } else {
        s.text("loglog_slope", "nan");
    }
    for (i, (tau, err)) in r.skipped.iter().enumerate() {
        s.text(&format!("skipped_{i}"), format!("{} ({err})", super::output::num(*tau)));
    }
    out.summary("allan_summary.txt", &s, config)?;
    Ok(())
}

fn sensitivity(config: &RunConfig, opts: &RunOptions, out: &mut Output) -> Result<(), CliError> {
    let p = profile(config, opts)?;
    let samples: usize = config.get_or("sensitivity.samples", 2001)?;
    let per_fringe: usize = config.get_or("sensitivity.points_per_fringe", 20)?;
    let fringes: usize = config.get_or("sensitivity.fringes", 10)?;
    if samples < 2 || per_fringe < 1 || fringes < 1 {
        return Err(config
            .invalid("sensitivity.samples", "samples >= 2, points_per_fringe >= 1 and fringes >= 1 required")
            .into());
    }
    let span = p.support_end();
    let rows = (0..samples).map(|i| {
        let t = span * i as f64 / (samples - 1) as f64;
        vec![t, sensitivity_g(t, &p), acceleration_kernel(t, &p)]
    });
    out.csv("sensitivity.csv", &["t", "g_s", "kernel"], rows, config)?;

    // ω grid hits ωT = 2πm exactly at every `per_fringe`-th row.
    let step = 2.0 * PI / (p.interrogation_time * per_fringe as f64);
    let rows = (1..=per_fringe * fringes).map(|i| {
        let w = i as f64 * step;
        vec![w, transfer_function_exact(w, &p).norm(), square_transfer(w, p.interrogation_time)]
    });
    out.csv("transfer.csv", &["omega", "abs_G", "abs_G_square_pulse"], rows, config)?;
    Ok(())
}

fn read_psd(config: &RunConfig, key: &str) -> Result<Psd, CliError> {
    let path = config.path(key)?;
    let table = read_table(&path, &[2])?;
    let (f, v): (Vec<f64>, Vec<f64>) = table.into_iter().map(|r| (r[0], r[1])).unzip();
    Psd::new(f, v).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn psd_variance(config: &RunConfig, opts: &RunOptions, out: &mut Output) -> Result<(), CliError> {
    let psd = read_psd(config, "noise.psd")?;
    let p = profile(config, opts)?;
    let coverage = match config.get_or("noise.coverage", "require".to_string())?.as_str() {
        "require" => Coverage::Require,
        "allow" => Coverage::Allow,
        other => {
            return Err(config.invalid("noise.coverage", format!("'{other}' is not 'require' or 'allow'")).into());
        }
    };
    let kind = config.get_or("noise.kind", "phase".to_string())?;
    let shots: usize = config.get_or("noise.mc_shots", 0)?;
    let mut s = Summary::default();
    let mc_dt = if shots > 0 {
        Some(config.positive_or("noise.mc_dt", p.tau_p / 10.0)?)
    } else {
        None
    };
    match kind.as_str() {
        "phase" => {
            let r = phase_variance_from_psd(&psd, &p, coverage)?;
            s.num("band_lo", r.band.0)
                .num("band_hi", r.band.1)
                .text("covered", r.covered.to_string())
                .num("truncation", r.truncation)
                .num("phase_variance", r.variance);
            if let Some(dt) = mc_dt {
                let mc = phase_noise_monte_carlo(&psd, &p, shots, dt, opts.seed, opts.workers)?;
                s.int("mc_shots", shots as u64)
                    .num("mc_phase_variance", mc.variance)
                    .num("mc_ratio", mc.variance / r.variance);
            }
        }
        "acceleration" => {
            let k_eff = config.get_or("sequence.k_eff", DEFAULT_K_EFF)?;
            let cycle = config.positive_or("noise.cycle_time", p.duration())?;
            let consistent = vibration_phase_variance(&psd, &p, k_eff, coverage)?;
            let literal = allan_from_acceleration_psd(&psd, &p, k_eff, cycle, coverage)?;
            s.num("band_lo", consistent.band.0)
                .num("band_hi", consistent.band.1)
                .text("covered", consistent.covered.to_string())
                .num("truncation", consistent.truncation)
                .num("phase_variance", consistent.variance)
                .num("literal_allan_variance", literal.variance)
                .num("literal_truncation", literal.truncation);
            if let Some(dt) = mc_dt {
                let mc = vibration_monte_carlo(&psd, &p, k_eff, shots, dt, opts.seed, opts.workers)?;
                s.int("mc_shots", shots as u64)
                    .num("mc_cycle_time", mc.cycle_time)
                    .num("mc_phase_variance", mc.variance)
                    .num("mc_allan_variance", mc.allan_variance)
                    .num("mc_ratio", mc.allan_variance / consistent.variance);
            }
        }
        other => {
            return Err(config.invalid("noise.kind", format!("'{other}' is not 'phase' or 'acceleration'")).into());
        }
    }
    out.summary("psd_variance.txt", &s, config)?;
    Ok(())
}

fn synth(config: &RunConfig, opts: &RunOptions, out: &mut Output) -> Result<(), CliError> {
    let psd = read_psd(config, "synth.psd")?;
    let duration: f64 = config.require("synth.duration")?;
    let dt: f64 = config.require("synth.dt")?;
    let series = synthesize_noise(&psd, duration, dt, opts.seed)?;
    let rows = series.samples.iter().enumerate().map(|(i, &x)| vec![series.time(i), x]);
    out.csv("synth.csv", &["t", "value"], rows, config)?;
    Ok(())
}
