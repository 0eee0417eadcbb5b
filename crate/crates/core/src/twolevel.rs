//! Laser-driven two-level atom under the rotating-wave approximation.
//!
//! Amplitudes `C_a`, `C_b` are interaction-picture coefficients: the bare
//! phases `exp(-iω_a t)`, `exp(-iω_b t)` live in the basis, so the
//! coefficients are constant while no light is on. The residual laser phase
//! re-enters through each pulse's start time `t₀`.
//!
//! Matrices act on `(C_b, C_a)ᵀ` (excited first).

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::rk4_integrate;
use crate::types::{laser_phase_combination, PulseParams, TwoLevelState};

pub type Mat2 = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Time-dependent coupling matrix in the interaction picture (J).
pub fn interaction_hamiltonian(pulse: &PulseParams, t: f64, hbar: f64) -> Mat2 {
    let rabi = pulse.rabi();
    let phase = pulse.detuning * t + pulse.laser_phase;
    let upper = rabi * cis(-phase) * (0.5 * hbar);
    let lower = rabi.conj() * cis(phase) * (0.5 * hbar);
    Mat2::new(Complex64::new(0.0, 0.0), upper, lower, Complex64::new(0.0, 0.0))
}

/// Time-independent Hamiltonian seen in the frame co-rotating with the laser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingFrameHamiltonian {
    pub delta: f64,
    pub rabi_mod: f64,
    pub rabi_arg: f64,
    pub laser_phase: f64,
}

impl RotatingFrameHamiltonian {
    pub fn from_pulse(pulse: &PulseParams) -> Self {
        Self {
            delta: pulse.detuning,
            rabi_mod: pulse.rabi_mod,
            rabi_arg: pulse.rabi_arg,
            laser_phase: pulse.laser_phase,
        }
    }

    /// Phase of the upper off-diagonal element is `-(φ - arg Ω)`.
    pub fn effective_phase(&self) -> f64 {
        self.laser_phase - self.rabi_arg
    }

    pub fn omega_r(&self) -> f64 {
        self.rabi_mod.hypot(self.delta)
    }

    pub fn matrix(&self, hbar: f64) -> Mat2 {
        let h = 0.5 * hbar;
        let phi = self.effective_phase();
        Mat2::new(
            Complex64::new(-h * self.delta, 0.0),
            cis(-phi) * (h * self.rabi_mod),
            cis(phi) * (h * self.rabi_mod),
            Complex64::new(h * self.delta, 0.0),
        )
    }
}

/// `rotating_frame_hamiltonian` as a matrix (J).
pub fn rotating_frame_hamiltonian(pulse: &PulseParams, hbar: f64) -> Mat2 {
    RotatingFrameHamiltonian::from_pulse(pulse).matrix(hbar)
}

/// θ with sin θ = Ω/Ω_R and cos θ = −δ/Ω_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub theta: f64,
    pub omega_r: f64,
}

pub fn mixing_angle(delta: f64, rabi: f64) -> Result<MixingAngle> {
    let rabi = rabi.abs();
    let omega_r = rabi.hypot(delta);
    if omega_r == 0.0 {
        return Err(Error::DegenerateDrive);
    }
    // atan2 with a non-negative first argument already lies in [0, π].
    let theta = rabi.atan2(-delta);
    Ok(MixingAngle { theta, omega_r })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: [Complex64; 2],
    pub v_minus: [Complex64; 2],
}

impl Eigensystem {
    fn outer(v: &[Complex64; 2]) -> Mat2 {
        Mat2::new(
            v[0] * v[0].conj(),
            v[0] * v[1].conj(),
            v[1] * v[0].conj(),
            v[1] * v[1].conj(),
        )
    }

    pub fn projector_plus(&self) -> Mat2 {
        Self::outer(&self.v_plus)
    }

    pub fn projector_minus(&self) -> Mat2 {
        Self::outer(&self.v_minus)
    }
}

/// Analytic eigenvalues and eigenvectors of the rotating-frame Hamiltonian.
pub fn eigensystem(h: &RotatingFrameHamiltonian, hbar: f64) -> Result<Eigensystem> {
    let MixingAngle { theta, omega_r } = mixing_angle(h.delta, h.rabi_mod)?;
    let (s, c) = (0.5 * theta).sin_cos();
    let phi = h.effective_phase();
    let ep = cis(0.5 * phi);
    let em = cis(-0.5 * phi);
    Ok(Eigensystem {
        lambda_plus: 0.5 * hbar * omega_r,
        lambda_minus: -0.5 * hbar * omega_r,
        v_plus: [em * c, ep * s],
        v_minus: [-em * s, ep * c],
    })
}

/// Closed-form pulse propagator acting on `(C_b, C_a)ᵀ`.
pub fn pulse_propagator(pulse: &PulseParams) -> Mat2 {
    if pulse.duration == 0.0 {
        return Mat2::identity();
    }
    shifted_propagator(
        pulse.rabi(),
        pulse.detuning,
        0.0,
        pulse.laser_phase,
        pulse.start_time,
        pulse.duration,
    )
}

/// Propagator for a coupling whose diagonal carries a differential light
/// shift `±δ_ls/2` on (excited, ground).
///
/// The mixing angle and generalized Rabi frequency use `δ − δ_ls`; the frame
/// factors `exp(∓iδτ/2)` and `exp(∓i(δt₀ + φ))` use the bare `δ`.
pub fn shifted_propagator(
    rabi: Complex64,
    delta: f64,
    light_shift: f64,
    phase: f64,
    t0: f64,
    tau: f64,
) -> Mat2 {
    let rabi_mod = rabi.norm();
    let eff = delta - light_shift;
    let omega_r = rabi_mod.hypot(eff);
    let lead = cis(-0.5 * delta * tau);
    let trail = cis(0.5 * delta * tau);
    if omega_r == 0.0 {
        return Mat2::new(lead, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), trail);
    }
    let cos_t = -eff / omega_r;
    let sin_t = rabi_mod / omega_r;
    let (s, c) = (0.5 * omega_r * tau).sin_cos();
    let arg = if rabi_mod > 0.0 { rabi.arg() } else { 0.0 };
    let chi = delta * t0 + phase - arg;
    Mat2::new(
        lead * Complex64::new(c, -cos_t * s),
        -I * lead * cis(-chi) * (sin_t * s),
        -I * trail * cis(chi) * (sin_t * s),
        trail * Complex64::new(c, cos_t * s),
    )
}

fn apply(m: &Mat2, state: &TwoLevelState) -> TwoLevelState {
    let [b, a] = state.to_column();
    TwoLevelState::from_column([m[(0, 0)] * b + m[(0, 1)] * a, m[(1, 0)] * b + m[(1, 1)] * a])
}

/// Propagate through one square pulse with the closed-form propagator.
pub fn evolve_pulse(state: &TwoLevelState, pulse: &PulseParams) -> TwoLevelState {
    apply(&pulse_propagator(pulse), state)
}

/// Dark evolution leaves interaction-picture coefficients unchanged.
pub fn evolve_free(state: &TwoLevelState, _duration: f64) -> TwoLevelState {
    *state
}

/// Small-detuning fringe law ½[1 − cos(Δφ − δτ_p/2)].
pub fn mach_zehnder_probability(delta: f64, tau_p: f64, dphi_laser: f64) -> f64 {
    0.5 * (1.0 - (dphi_laser - 0.5 * delta * tau_p).cos())
}

/// Placement of the three pulses in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseTiming {
    /// Pulses start at `t₁`, `t₁ + T + τ_p/2`, `t₁ + 2T + 3τ_p/2`: every dark
    /// interval lasts exactly `T`.
    #[default]
    DarkIntervals,
    /// Pulses start at `t₁`, `t₁ + T`, `t₁ + 2T`.
    EqualStarts,
}

/// Inputs of a three-pulse Mach–Zehnder run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceRun {
    pub phases: [f64; 3],
    pub interrogation_time: f64,
    pub tau_p: f64,
    pub rabi: f64,
    pub delta: f64,
    pub t1: f64,
    pub timing: PulseTiming,
}

impl SequenceRun {
    pub fn pulses(&self) -> Result<[PulseParams; 3]> {
        let (t, tau) = (self.interrogation_time, self.tau_p);
        if !(t >= 0.0) || !(tau >= 0.0) {
            return Err(Error::InvalidSequence(format!(
                "T and tau_p must be non-negative (T = {t}, tau_p = {tau})"
            )));
        }
        let (t2, t3) = match self.timing {
            PulseTiming::DarkIntervals => (self.t1 + t + 0.5 * tau, self.t1 + 2.0 * t + 1.5 * tau),
            PulseTiming::EqualStarts => (self.t1 + t, self.t1 + 2.0 * t),
        };
        let p = |phase, start, dur| PulseParams::new(self.rabi, self.delta, phase, start, dur);
        Ok([
            p(self.phases[0], self.t1, 0.5 * tau),
            p(self.phases[1], t2, tau),
            p(self.phases[2], t3, 0.5 * tau),
        ])
    }

    /// State after the third pulse, starting from the ground state.
    pub fn final_state(&self) -> Result<TwoLevelState> {
        let pulses = self.pulses()?;
        let mut state = TwoLevelState::ground();
        for (k, pulse) in pulses.iter().enumerate() {
            if k > 0 {
                let prev = &pulses[k - 1];
                state = evolve_free(&state, pulse.start_time - (prev.start_time + prev.duration));
            }
            state = evolve_pulse(&state, pulse);
        }
        Ok(state)
    }

    pub fn laser_phase_combination(&self) -> f64 {
        laser_phase_combination(self.phases)
    }
}

/// Excited-state probability after a π/2–π–π/2 sequence composed from exact
/// pulse propagators, with dark intervals of length `T`.
pub fn run_sequence(
    phases: [f64; 3],
    interrogation_time: f64,
    tau_p: f64,
    rabi: f64,
    delta: f64,
    t1: f64,
) -> Result<f64> {
    let run = SequenceRun {
        phases,
        interrogation_time,
        tau_p,
        rabi,
        delta,
        t1,
        timing: PulseTiming::DarkIntervals,
    };
    Ok(run.final_state()?.c_b.norm_sqr())
}

/// Largest step accepted by [`ode_oracle`] for a pulse.
pub fn max_oracle_step(pulse: &PulseParams) -> f64 {
    let omega_r = pulse.omega_r();
    if omega_r == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / (100.0 * omega_r)
    }
}

/// Brute-force RK4 integration of the interaction-picture Schrödinger
/// equation across one pulse.
pub fn ode_oracle(state: &TwoLevelState, pulse: &PulseParams, dt: f64) -> Result<TwoLevelState> {
    let max_dt = max_oracle_step(pulse);
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, max_dt });
    }
    let rabi = pulse.rabi();
    let (delta, phi) = (pulse.detuning, pulse.laser_phase);
    let rhs = |t: f64, y: &[Complex64; 2]| {
        let e = cis(-(delta * t + phi));
        // i dC_b/dt = Ω/2 e^{-i(δt+φ)} C_a ; i dC_a/dt = Ω*/2 e^{+i(δt+φ)} C_b
        [
            -I * 0.5 * rabi * e * y[1],
            -I * 0.5 * rabi.conj() * e.conj() * y[0],
        ]
    };
    let out = rk4_integrate(rhs, pulse.start_time, state.to_column(), pulse.duration, dt);
    Ok(TwoLevelState::from_column(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::HBAR;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn interaction_hamiltonian_zero_coupling() {
        let p = PulseParams::new(0.0, 3.0, 0.2, 0.0, 1.0);
        let h = interaction_hamiltonian(&p, 0.7, HBAR);
        assert!(h.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn interaction_hamiltonian_resonant_is_constant() {
        let omega = 2.0 * PI * 5e3;
        let p = PulseParams::new(omega, 0.0, 0.0, 0.0, 1.0);
        for t in [0.0, 1e-4, 0.37] {
            let h = interaction_hamiltonian(&p, t, HBAR);
            assert!(close(h[(0, 1)], c(0.5 * HBAR * omega, 0.0), 1e-50));
            assert!(close(h[(1, 0)], c(0.5 * HBAR * omega, 0.0), 1e-50));
        }
    }

    #[test]
    fn interaction_hamiltonian_matches_trig_form() {
        // Independent route: expand e^{∓ix} as cos x ∓ i sin x by hand.
        let (omega, delta, phi, t) = (2.0 * PI * 1e4, 2.0 * PI * 1e3, PI / 3.0, 1e-3);
        let p = PulseParams::new(omega, delta, phi, 0.0, 1.0);
        let h = interaction_hamiltonian(&p, t, 1.0);
        let x = delta * t + phi;
        let upper = c(0.5 * omega * x.cos(), -0.5 * omega * x.sin());
        let lower = c(0.5 * omega * x.cos(), 0.5 * omega * x.sin());
        assert!(close(h[(0, 1)], upper, 1e-9));
        assert!(close(h[(1, 0)], lower, 1e-9));
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        assert!(close(h[(0, 1)], h[(1, 0)].conj(), 1e-12));
    }

    #[test]
    fn rotating_frame_trace_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = PulseParams::new(
                rng.random_range(0.0..1e5),
                rng.random_range(-1e5..1e5),
                rng.random_range(-PI..PI),
                0.0,
                1.0,
            );
            let h = rotating_frame_hamiltonian(&p, 1.0);
            let tr = h.trace();
            let det = h.determinant();
            let expect = -0.25 * p.omega_r().powi(2);
            assert!(tr.norm() < 1e-9);
            assert!((det.re - expect).abs() <= 1e-12 * expect.abs());
            assert!(det.im.abs() <= 1e-12 * expect.abs());
            assert!(close(h[(0, 1)], h[(1, 0)].conj(), 1e-9));
        }
    }

    #[test]
    fn rotating_frame_eigenvalues_numeric() {
        // δ = Ω: eigenvalues ±Ω/√2 (ħ = 1 units after the ½ factor).
        let omega = 1.0e4;
        let p = PulseParams::new(omega, omega, 0.0, 0.0, 1.0);
        let h = rotating_frame_hamiltonian(&p, 1.0);
        let eig = h.symmetric_eigenvalues();
        let mut ev: Vec<f64> = eig.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = omega / 2f64.sqrt();
        assert!((ev[0] + expect).abs() < 1e-9 * expect);
        assert!((ev[1] - expect).abs() < 1e-9 * expect);
        let zero = rotating_frame_hamiltonian(&PulseParams::new(0.0, 0.0, 0.0, 0.0, 1.0), 1.0);
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn mixing_angle_cases() {
        assert!((mixing_angle(0.0, 3.0).unwrap().theta - PI / 2.0).abs() < 1e-15);
        assert!(mixing_angle(-1.0, 1e-12).unwrap().theta < 1e-11);
        assert!((mixing_angle(-2.0, 2.0).unwrap().theta - PI / 4.0).abs() < 1e-15);
        assert!((mixing_angle(2.0, 2.0).unwrap().theta - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(mixing_angle(0.0, 0.0), Err(Error::DegenerateDrive));
        let m = mixing_angle(-0.3, 0.4).unwrap();
        assert!((m.omega_r - 0.5).abs() < 1e-15);
        assert!((m.theta.sin() - 0.8).abs() < 1e-12);
        assert!((m.theta.cos() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn resonant_eigenvectors() {
        let h = RotatingFrameHamiltonian {
            delta: 0.0,
            rabi_mod: 1.0,
            rabi_arg: 0.0,
            laser_phase: 0.0,
        };
        let e = eigensystem(&h, 1.0).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!(close(e.v_plus[0], c(r, 0.0), 1e-15) && close(e.v_plus[1], c(r, 0.0), 1e-15));
        // (1, -1)/√2 up to a global sign
        assert!((e.v_minus[0] + e.v_minus[1]).norm() < 1e-15);
        assert!((e.v_minus[0].norm() - r).abs() < 1e-15);
    }

    #[test]
    fn eigen_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let h = RotatingFrameHamiltonian {
                delta: rng.random_range(-1e4..1e4),
                rabi_mod: rng.random_range(0.0..1e4),
                rabi_arg: rng.random_range(-PI..PI),
                laser_phase: rng.random_range(-PI..PI),
            };
            let e = eigensystem(&h, 1.0).unwrap();
            let m = h.matrix(1.0);
            let scale = h.omega_r();
            for (lam, v) in [(e.lambda_plus, e.v_plus), (e.lambda_minus, e.v_minus)] {
                let r0 = m[(0, 0)] * v[0] + m[(0, 1)] * v[1] - v[0] * lam;
                let r1 = m[(1, 0)] * v[0] + m[(1, 1)] * v[1] - v[1] * lam;
                assert!(r0.norm() < 1e-12 * scale && r1.norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn eigensystem_degenerate() {
        let h = RotatingFrameHamiltonian {
            delta: 0.0,
            rabi_mod: 0.0,
            rabi_arg: 0.0,
            laser_phase: 0.0,
        };
        assert_eq!(eigensystem(&h, 1.0), Err(Error::DegenerateDrive));
    }

    #[test]
    fn zero_duration_is_identity() {
        let s = TwoLevelState::new(c(0.6, 0.0), c(0.0, 0.8));
        let p = PulseParams::new(1e4, 30.0, 0.4, 0.1, 0.0);
        assert_eq!(evolve_pulse(&s, &p), s);
    }

    #[test]
    fn resonant_pi_pulse_inversion_phase() {
        let omega = 2.0 * PI * 2e4;
        let (phi, t0) = (0.9, 3.3e-3);
        let p = PulseParams::new(omega, 0.0, phi, t0, PI / omega);
        let out = evolve_pulse(&TwoLevelState::ground(), &p);
        let expect = -I * cis(-phi);
        assert!(close(out.c_b, expect, 1e-12));
        assert!(out.c_a.norm() < 1e-12);
    }

    #[test]
    fn detuned_pi_pulse_phase_factors() {
        // δ ≠ 0 with τ = π/Ω_R: C_b = −i sinθ e^{−iδτ/2} e^{−i(δt₀+φ)} C_a.
        let (omega, delta, phi, t0): (f64, f64, f64, f64) = (1.0e4, 3.0e2, -0.4, 0.02);
        let omega_r = omega.hypot(delta);
        let tau = PI / omega_r;
        let p = PulseParams::new(omega, delta, phi, t0, tau);
        let out = evolve_pulse(&TwoLevelState::ground(), &p);
        let expect =
            -I * (omega / omega_r) * cis(-0.5 * delta * tau) * cis(-(delta * t0 + phi));
        assert!(close(out.c_b, expect, 1e-12));
    }

    #[test]
    fn free_evolution_is_identity() {
        let s = TwoLevelState::new(c(0.6, 0.0), c(0.0, 0.8));
        assert_eq!(evolve_free(&s, 0.1), s);
        assert_eq!(evolve_free(&s, 0.0), s);
        assert_eq!(evolve_free(&evolve_free(&s, 0.1), 0.2), evolve_free(&s, 0.3));
    }

    #[test]
    fn fringe_formula_cases() {
        assert_eq!(mach_zehnder_probability(0.0, 1e-5, 0.0), 0.0);
        assert!((mach_zehnder_probability(0.0, 1e-5, PI) - 1.0).abs() < 1e-15);
        // δτ_p/2 = 0.3 and Δφ = 0.3 cancel
        assert!(mach_zehnder_probability(0.6, 1.0, 0.3).abs() < 1e-15);
    }

    #[test]
    fn sequence_bright_fringe() {
        let omega = 2.0 * PI * 1e4;
        let p = run_sequence([PI, 0.0, 0.0], 0.01, PI / omega, omega, 0.0, 0.0).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let p = run_sequence([0.0; 3], 0.01, PI / omega, omega, 0.0, 0.0).unwrap();
        assert!(p < 1e-24);
    }

    #[test]
    fn sequence_rejects_negative_times() {
        assert!(matches!(
            run_sequence([0.0; 3], -1.0, 1e-5, 1.0, 0.0, 0.0),
            Err(Error::InvalidSequence(_))
        ));
        assert!(matches!(
            run_sequence([0.0; 3], 1.0, -1e-5, 1.0, 0.0, 0.0),
            Err(Error::InvalidSequence(_))
        ));
    }

    #[test]
    fn sequence_equal_starts_follows_formula() {
        // With pulse starts spaced by exactly T the composed propagators
        // reproduce the small-detuning fringe law.
        let omega = 2.0 * PI * 1e4;
        let tau = PI / omega;
        let delta = 1e-3 * omega;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let phases = [
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
            ];
            let run = SequenceRun {
                phases,
                interrogation_time: 0.01,
                tau_p: tau,
                rabi: omega,
                delta,
                t1: 0.0,
                timing: PulseTiming::EqualStarts,
            };
            let p = run.final_state().unwrap().c_b.norm_sqr();
            let f = mach_zehnder_probability(delta, tau, run.laser_phase_combination());
            assert!((p - f).abs() < 1e-5, "{p} vs {f}");
        }
    }

    #[test]
    fn oracle_zero_coupling_identity() {
        let s = TwoLevelState::new(c(0.6, 0.0), c(0.0, 0.8));
        let p = PulseParams::new(0.0, 0.0, 0.3, 0.0, 1e-3);
        let out = ode_oracle(&s, &p, 1e-6).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn oracle_rejects_coarse_step() {
        let omega = 1e4;
        let p = PulseParams::new(omega, 0.0, 0.0, 0.0, PI / omega);
        let max = max_oracle_step(&p);
        assert!(matches!(
            ode_oracle(&TwoLevelState::ground(), &p, 2.0 * max),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn oracle_resonant_pi_pulse() {
        let omega = 2.0 * PI * 1e4;
        let p = PulseParams::new(omega, 0.0, 0.0, 0.0, PI / omega);
        let out = ode_oracle(&TwoLevelState::ground(), &p, 2.0 * PI / (200.0 * omega)).unwrap();
        assert!((out.c_b.norm_sqr() - 1.0).abs() < 1e-8);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_fourth_order_convergence() {
        let omega = 2.0 * PI * 1e4;
        let p = PulseParams::new(omega, 0.1 * omega, 0.7, 1.3e-3, 2.0 * PI / omega);
        let exact = evolve_pulse(&TwoLevelState::ground(), &p);
        let err = |dt: f64| {
            let o = ode_oracle(&TwoLevelState::ground(), &p, dt).unwrap();
            (o.c_a - exact.c_a).norm() + (o.c_b - exact.c_b).norm()
        };
        let dt = max_oracle_step(&p);
        let ratio = err(dt) / err(dt / 2.0);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn oracle_matches_closed_form_grid() {
        let omega = 2.0 * PI * 1e4;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for area in [PI / 2.0, PI, 2.0 * PI] {
            for rel in [0.0, 0.01, 0.1] {
                let p = PulseParams::new(
                    omega,
                    rel * omega,
                    rng.random_range(-PI..PI),
                    rng.random_range(0.0..0.05),
                    area / omega,
                )
                .with_complex_rabi(Complex64::from_polar(omega, rng.random_range(-PI..PI)));
                let start = TwoLevelState::new(c(0.8, 0.0), Complex64::from_polar(0.6, 0.4));
                let a = evolve_pulse(&start, &p);
                let b = ode_oracle(&start, &p, max_oracle_step(&p)).unwrap();
                assert!(close(a.c_a, b.c_a, 1e-6) && close(a.c_b, b.c_b, 1e-6));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn propagator_is_unitary(
                omega in 0.0..1e5f64, delta in -1e5..1e5f64, phi in -PI..PI,
                arg in -PI..PI, t0 in 0.0..1.0f64, tau in 0.0..1e-3f64
            ) {
                let p = PulseParams::new(omega, delta, phi, t0, tau)
                    .with_complex_rabi(Complex64::from_polar(omega, arg));
                let u = pulse_propagator(&p);
                let id = u.adjoint() * u;
                prop_assert!((id - Mat2::identity()).iter().all(|z| z.norm() < 1e-12));
            }

            #[test]
            fn rabi_flopping_formula(
                omega in 1.0..1e5f64, delta in -1e5..1e5f64, phi in -PI..PI,
                t0 in 0.0..1.0f64, tau in 0.0..1e-3f64
            ) {
                let p = PulseParams::new(omega, delta, phi, t0, tau);
                let pe = evolve_pulse(&TwoLevelState::ground(), &p).c_b.norm_sqr();
                let wr = p.omega_r();
                let expect = (omega / wr).powi(2) * (0.5 * wr * tau).sin().powi(2);
                prop_assert!((pe - expect).abs() < 1e-12);
            }

            #[test]
            fn projectors_complete(
                delta in -1e4..1e4f64, omega in 1e-3..1e4f64, phi in -PI..PI
            ) {
                let h = RotatingFrameHamiltonian { delta, rabi_mod: omega, rabi_arg: 0.0, laser_phase: phi };
                let e = eigensystem(&h, 1.0).unwrap();
                let sum = e.projector_plus() + e.projector_minus();
                prop_assert!((sum - Mat2::identity()).iter().all(|z| z.norm() < 1e-12));
            }
        }
    }
}
