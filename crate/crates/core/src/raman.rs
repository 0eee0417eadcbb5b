//! Stimulated Raman transitions through a far-detuned intermediate level.
//!
//! The full model couples `|a, p⟩ ↔ |i, p + ħk₁⟩ ↔ |b, p + ħk_eff⟩`. Removing
//! `|i⟩` adiabatically yields an effective two-level system with a two-photon
//! Rabi frequency and light shifts on both diagonal entries.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::rk4_integrate;
use crate::twolevel::{mach_zehnder_probability, shifted_propagator};
use crate::types::{Level, PhysicalConstants, ThreeLevelState};

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Two counter-propagating Raman beams and their single-photon couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserPair {
    pub k1: f64,
    pub k2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Coupling `|a⟩ ↔ |i⟩` driven by beam 1.
    pub rabi_gi: Complex64,
    /// Coupling `|b⟩ ↔ |i⟩` driven by beam 2.
    pub rabi_ei: Complex64,
}

impl LaserPair {
    pub fn k_eff(&self) -> f64 {
        self.k1 - self.k2
    }

    /// Relative deviation of |k_eff| from 2|k₁|.
    pub fn counter_propagation_mismatch(&self) -> f64 {
        (self.k_eff().abs() - 2.0 * self.k1.abs()).abs() / (2.0 * self.k1.abs())
    }

    /// Check the counter-propagating geometry within a relative tolerance.
    pub fn check_geometry(&self, tolerance: f64) -> Result<()> {
        if self.k1 * self.k2 >= 0.0 {
            return Err(Error::InvalidParameter(
                "Raman beams must counter-propagate (k1·k2 < 0)".into(),
            ));
        }
        let mismatch = self.counter_propagation_mismatch();
        if mismatch > tolerance {
            return Err(Error::InvalidParameter(format!(
                "|k_eff| deviates from 2|k1| by {mismatch:.3e} (tolerance {tolerance:.1e})"
            )));
        }
        Ok(())
    }
}

/// Angular frequencies of the three internal levels (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelFrequencies {
    pub omega_a: f64,
    pub omega_i: f64,
    pub omega_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanDetunings {
    pub delta1: f64,
    pub delta2: f64,
    pub delta_two_photon: f64,
}

impl RamanDetunings {
    /// Symmetric single-photon detuning (Δ₁ + Δ₂)/2 used for elimination.
    pub fn mean(&self) -> f64 {
        0.5 * (self.delta1 + self.delta2)
    }
}

/// Kinetic-energy-corrected single-photon detunings and their difference.
pub fn detunings(
    lasers: &LaserPair,
    p: f64,
    atom: &PhysicalConstants,
    levels: &LevelFrequencies,
) -> RamanDetunings {
    let (hbar, m) = (atom.hbar, atom.atom_mass);
    let p_i = p + hbar * lasers.k1;
    let p_b = p + hbar * lasers.k_eff();
    let kinetic = |q: f64| q * q / (2.0 * m * hbar);
    let delta1 = lasers.omega1 - (levels.omega_i - levels.omega_a) + kinetic(p) - kinetic(p_i);
    let delta2 = lasers.omega2 - (levels.omega_i - levels.omega_b) + kinetic(p_b) - kinetic(p_i);
    RamanDetunings {
        delta1,
        delta2,
        delta_two_photon: delta1 - delta2,
    }
}

/// Which algebraic form of the eliminated couplings to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliminationConvention {
    /// Ω_eff = Ω_ai Ω_bi*/2Δ, Ω_a^AC = |Ω_ai|²/4Δ, Ω_b^AC = |Ω_bi|²/4Δ.
    /// This is what the pre-elimination amplitude equations reduce to.
    #[default]
    Standard,
    /// Factor-4 variant: Ω_eff = Ω_b^AC = Ω_ai Ω_bi*/4Δ and
    /// Ω_a^AC = Ω_bi Ω_ai*/4Δ. Light shifts are complex in general.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub omega_eff: Complex64,
    pub ac_g: Complex64,
    pub ac_e: Complex64,
    pub delta_ac: Complex64,
    /// φ₂ − φ₁.
    pub phi_eff: f64,
    /// Single-photon detuning Δ used in the elimination.
    pub big_delta: f64,
    /// Raw Δ₁ and Δ₂ when built from [`RamanDetunings`].
    pub raw_detunings: Option<(f64, f64)>,
    /// |Δ| ≥ 10·max(|Ω_ai|, |Ω_bi|).
    pub adiabatic: bool,
    pub convention: EliminationConvention,
}

impl EffectiveParams {
    /// Light shifts are real, so the effective Hamiltonian is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.ac_g.norm().max(self.ac_e.norm()).max(1.0);
        self.ac_g.im.abs() <= 1e-12 * scale && self.ac_e.im.abs() <= 1e-12 * scale
    }

    pub fn omega_r(&self, delta: f64) -> f64 {
        self.omega_eff.norm().hypot(delta - self.delta_ac.re)
    }
}

pub fn effective_params(
    lasers: &LaserPair,
    big_delta: f64,
    convention: EliminationConvention,
) -> Result<EffectiveParams> {
    if big_delta == 0.0 || !big_delta.is_finite() {
        return Err(Error::EliminationSingularity);
    }
    let (gi, ei) = (lasers.rabi_gi, lasers.rabi_ei);
    let (omega_eff, ac_g, ac_e) = match convention {
        EliminationConvention::Standard => (
            gi * ei.conj() / (2.0 * big_delta),
            Complex64::new(gi.norm_sqr() / (4.0 * big_delta), 0.0),
            Complex64::new(ei.norm_sqr() / (4.0 * big_delta), 0.0),
        ),
        EliminationConvention::Literal => (
            gi * ei.conj() / (4.0 * big_delta),
            ei * gi.conj() / (4.0 * big_delta),
            gi * ei.conj() / (4.0 * big_delta),
        ),
    };
    let adiabatic = big_delta.abs() >= 10.0 * gi.norm().max(ei.norm());
    if !adiabatic {
        log::warn!(
            "single-photon detuning {big_delta:.3e} rad/s is not large against the couplings; \
             adiabatic elimination is inaccurate"
        );
    }
    Ok(EffectiveParams {
        omega_eff,
        ac_g,
        ac_e,
        delta_ac: ac_e - ac_g,
        phi_eff: lasers.phi2 - lasers.phi1,
        big_delta,
        raw_detunings: None,
        adiabatic,
        convention,
    })
}

/// Effective parameters with Δ = (Δ₁ + Δ₂)/2, keeping both raw values.
pub fn effective_params_from_detunings(
    lasers: &LaserPair,
    det: &RamanDetunings,
    convention: EliminationConvention,
) -> Result<EffectiveParams> {
    let mut params = effective_params(lasers, det.mean(), convention)?;
    params.raw_detunings = Some((det.delta1, det.delta2));
    Ok(params)
}

/// Effective two-level state of a Raman-coupled atom. The ground amplitude
/// carries momentum `p`, the excited amplitude `p + ħk_eff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanState {
    pub c_g: Complex64,
    pub c_e: Complex64,
    pub p: f64,
}

impl RamanState {
    pub fn ground(p: f64) -> Self {
        Self {
            c_g: Complex64::new(1.0, 0.0),
            c_e: Complex64::new(0.0, 0.0),
            p,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_g.norm_sqr() + self.c_e.norm_sqr()
    }

    pub fn momentum(&self, level: Level, hbar_k_eff: f64) -> f64 {
        match level {
            Level::Ground => self.p,
            Level::Excited => self.p + hbar_k_eff,
        }
    }
}

/// Apply one square Raman pulse using the effective Hamiltonian.
pub fn raman_pulse(
    state: &RamanState,
    params: &EffectiveParams,
    delta: f64,
    t0: f64,
    duration: f64,
) -> Result<RamanState> {
    if !params.is_hermitian() {
        return Err(Error::InvalidParameter(
            "complex light shifts make the effective Hamiltonian non-Hermitian".into(),
        ));
    }
    if duration == 0.0 {
        return Ok(*state);
    }
    let u = shifted_propagator(
        params.omega_eff,
        delta,
        params.delta_ac.re,
        params.phi_eff,
        t0,
        duration,
    );
    let common = cis(-0.5 * (params.ac_e.re + params.ac_g.re) * duration);
    let (b, a) = (state.c_e, state.c_g);
    Ok(RamanState {
        c_e: common * (u[(0, 0)] * b + u[(0, 1)] * a),
        c_g: common * (u[(1, 0)] * b + u[(1, 1)] * a),
        p: state.p,
    })
}

/// Fringe law of the three-pulse Raman interferometer; the same function as
/// the two-level one.
pub fn raman_sequence_probability(delta: f64, tau_p: f64, dphi_laser: f64) -> f64 {
    mach_zehnder_probability(delta, tau_p, dphi_laser)
}

/// Largest step accepted by [`three_level_ode_oracle`].
pub fn max_three_level_step(lasers: &LaserPair, det: &RamanDetunings) -> f64 {
    let fastest = det
        .delta1
        .abs()
        .max(det.delta2.abs())
        .max(lasers.rabi_gi.norm())
        .max(lasers.rabi_ei.norm());
    if fastest == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / (100.0 * fastest)
    }
}

/// RK4 integration of the three coupled amplitude equations before
/// elimination, from `t0` over `duration`.
pub fn three_level_ode_oracle(
    state: &ThreeLevelState,
    lasers: &LaserPair,
    det: &RamanDetunings,
    t0: f64,
    duration: f64,
    dt: f64,
) -> Result<ThreeLevelState> {
    let max_dt = max_three_level_step(lasers, det);
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, max_dt });
    }
    let (gi, ei) = (lasers.rabi_gi, lasers.rabi_ei);
    let (d1, d2) = (det.delta1, det.delta2);
    let (p1, p2) = (lasers.phi1, lasers.phi2);
    let rhs = |t: f64, y: &[Complex64; 3]| {
        let [g, i, e] = *y;
        let e1 = cis(d1 * t - p1);
        let e2 = cis(d2 * t - p2);
        [
            -I * 0.5 * gi.conj() * e1 * i,
            -I * (0.5 * gi * e1.conj() * g + 0.5 * ei * e2.conj() * e),
            -I * 0.5 * ei.conj() * e2 * i,
        ]
    };
    let y = rk4_integrate(rhs, t0, [state.c_g, state.c_i, state.c_e], duration, dt);
    Ok(ThreeLevelState {
        c_g: y[0],
        c_i: y[1],
        c_e: y[2],
        p: state.p,
    })
}

/// One interferometer arm: internal level and momentum after each pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPath {
    /// Level before the first pulse and after each of the three pulses.
    pub levels: [Level; 4],
    /// Net photon recoils in units of ħk_eff.
    pub recoils: [i32; 4],
    pub momenta: [f64; 4],
}

/// Enumerate the four arms of an ideal π/2–π–π/2 sequence starting in
/// `|a, p⟩`. Each transition changes momentum by ±ħk_eff; the π pulse always
/// transfers.
pub fn mach_zehnder_paths(p: f64, hbar_k_eff: f64) -> Vec<ArmPath> {
    let mut out = Vec::new();
    for first in [false, true] {
        for last in [false, true] {
            let mut levels = [Level::Ground; 4];
            let mut recoils = [0; 4];
            for (k, jump) in [first, true, last].into_iter().enumerate() {
                let (level, n) = match (levels[k], jump) {
                    (l, false) => (l, recoils[k]),
                    (Level::Ground, true) => (Level::Excited, recoils[k] + 1),
                    (Level::Excited, true) => (Level::Ground, recoils[k] - 1),
                };
                levels[k + 1] = level;
                recoils[k + 1] = n;
            }
            let momenta = recoils.map(|n| p + n as f64 * hbar_k_eff);
            out.push(ArmPath {
                levels,
                recoils,
                momenta,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{HBAR, RB87_MASS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rb() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn pair(omega1: f64, omega2: f64, gi: f64, ei: f64) -> LaserPair {
        let k1 = 8.05e6;
        LaserPair {
            k1,
            k2: -k1,
            omega1,
            omega2,
            phi1: 0.0,
            phi2: 0.0,
            rabi_gi: c(gi),
            rabi_ei: c(ei),
        }
    }

    #[test]
    fn optical_resonance_leaves_recoil() {
        let levels = LevelFrequencies {
            omega_a: 0.0,
            omega_i: 2.4e15,
            omega_b: 4.3e10,
        };
        let l = pair(levels.omega_i - levels.omega_a, 1.0, 1.0, 1.0);
        let d = detunings(&l, 0.0, &rb(), &levels);
        let recoil = HBAR * l.k1 * l.k1 / (2.0 * RB87_MASS);
        assert!(d.delta1 < 0.0);
        assert!((d.delta1 + recoil).abs() < 1e-9 * recoil + 1e-3);
    }

    fn closed_form_delta(l: &LaserPair, p: f64, levels: &LevelFrequencies) -> f64 {
        let k = l.k_eff();
        let omega_ba = levels.omega_b - levels.omega_a;
        l.omega1 - l.omega2 - (omega_ba + p * k / RB87_MASS + HBAR * k * k / (2.0 * RB87_MASS))
    }

    #[test]
    fn two_photon_detuning_cases() {
        let levels = LevelFrequencies {
            omega_a: 0.0,
            omega_i: 1.0e6,
            omega_b: 4.0e4,
        };
        let omega_ba = levels.omega_b - levels.omega_a;
        let l = pair(2.0e6, 2.0e6 - omega_ba, 1.0, 1.0);
        let k = l.k_eff();
        let recoil = HBAR * k * k / (2.0 * RB87_MASS);
        // ω₁ − ω₂ = ω_ba at rest: only the two-photon recoil shift remains.
        let d = detunings(&l, 0.0, &rb(), &levels);
        assert!((d.delta_two_photon + recoil).abs() < 1e-9 * recoil);
        // p = −ħk_eff/2: Doppler and recoil cancel.
        let d = detunings(&l, -0.5 * HBAR * k, &rb(), &levels);
        assert!((d.delta_two_photon - (l.omega1 - l.omega2 - omega_ba)).abs() < 1e-8);
    }

    #[test]
    fn two_photon_detuning_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let levels = LevelFrequencies {
                omega_a: rng.random_range(-1e5..1e5),
                omega_i: rng.random_range(1e6..2e6),
                omega_b: rng.random_range(1e4..5e4),
            };
            let l = pair(
                rng.random_range(1e6..3e6),
                rng.random_range(1e6..3e6),
                1.0,
                1.0,
            );
            let p = rng.random_range(-1e-26..1e-26);
            let d = detunings(&l, p, &rb(), &levels);
            let expect = closed_form_delta(&l, p, &levels);
            let scale = l.omega1.abs() + l.omega2.abs() + levels.omega_b.abs() + levels.omega_a.abs();
            assert!((d.delta_two_photon - expect).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn geometry_check() {
        let l = pair(1.0, 1.0, 1.0, 1.0);
        assert!(l.check_geometry(1e-9).is_ok());
        assert!((l.k_eff() - 2.0 * l.k1).abs() < 1e-6);
        let mut co = l;
        co.k2 = l.k1;
        assert!(co.check_geometry(1e-3).is_err());
    }

    #[test]
    fn symmetric_couplings_cancel_light_shift() {
        let l = pair(0.0, 0.0, 2.0 * PI * 1e6, 2.0 * PI * 1e6);
        for conv in [EliminationConvention::Standard, EliminationConvention::Literal] {
            let e = effective_params(&l, 2.0 * PI * 1e9, conv).unwrap();
            assert_eq!(e.ac_g, e.ac_e);
            assert_eq!(e.delta_ac, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn effective_rabi_arithmetic() {
        let w = 2.0 * PI * 1e6;
        let big = 2.0 * PI * 1e9;
        let l = pair(0.0, 0.0, w, w);
        let lit = effective_params(&l, big, EliminationConvention::Literal).unwrap();
        assert!((lit.omega_eff.norm() - w * w / (4.0 * big)).abs() < 1e-9);
        assert!((lit.omega_eff.norm() - 2.0 * PI * 250.0).abs() < 1e-9);
        let std = effective_params(&l, big, EliminationConvention::Standard).unwrap();
        assert!((std.omega_eff.norm() - w * w / (2.0 * big)).abs() < 1e-9);
        assert!((std.ac_g.re - w * w / (4.0 * big)).abs() < 1e-9);
    }

    #[test]
    fn doubling_detuning_halves_everything() {
        let l = LaserPair {
            rabi_gi: Complex64::from_polar(3e6, 0.3),
            rabi_ei: Complex64::from_polar(5e6, -1.1),
            ..pair(0.0, 0.0, 0.0, 0.0)
        };
        let a = effective_params(&l, 1e9, EliminationConvention::Standard).unwrap();
        let b = effective_params(&l, 2e9, EliminationConvention::Standard).unwrap();
        assert!((a.omega_eff - 2.0 * b.omega_eff).norm() < 1e-12 * a.omega_eff.norm());
        assert!((a.ac_g - 2.0 * b.ac_g).norm() < 1e-12 * a.ac_g.norm());
        assert!((a.ac_e - 2.0 * b.ac_e).norm() < 1e-12 * a.ac_e.norm());
        assert_eq!(a.delta_ac, a.ac_e - a.ac_g);
    }

    #[test]
    fn zero_detuning_is_singular() {
        let l = pair(0.0, 0.0, 1.0, 1.0);
        assert_eq!(
            effective_params(&l, 0.0, EliminationConvention::Standard),
            Err(Error::EliminationSingularity)
        );
    }

    #[test]
    fn adiabatic_flag() {
        let l = pair(0.0, 0.0, 1e6, 1e6);
        assert!(effective_params(&l, 1e7, EliminationConvention::Standard).unwrap().adiabatic);
        assert!(!effective_params(&l, 5e6, EliminationConvention::Standard).unwrap().adiabatic);
    }

    #[test]
    fn literal_form_is_non_hermitian_for_complex_couplings() {
        let l = LaserPair {
            rabi_gi: Complex64::from_polar(1e6, 0.4),
            rabi_ei: Complex64::from_polar(1e6, -0.2),
            ..pair(0.0, 0.0, 0.0, 0.0)
        };
        let e = effective_params(&l, 1e9, EliminationConvention::Literal).unwrap();
        assert!(!e.is_hermitian());
        assert!(raman_pulse(&RamanState::ground(0.0), &e, 0.0, 0.0, 1e-3).is_err());
        let s = effective_params(&l, 1e9, EliminationConvention::Standard).unwrap();
        assert!(s.is_hermitian());
    }

    fn shifted_params() -> EffectiveParams {
        let l = LaserPair {
            rabi_gi: c(3e6),
            rabi_ei: c(2e6),
            phi1: 0.3,
            phi2: 1.1,
            ..pair(0.0, 0.0, 0.0, 0.0)
        };
        effective_params(&l, 1e9, EliminationConvention::Standard).unwrap()
    }

    #[test]
    fn raman_zero_duration_identity() {
        let e = shifted_params();
        let s = RamanState::ground(1e-27);
        assert_eq!(raman_pulse(&s, &e, 10.0, 0.2, 0.0).unwrap(), s);
    }

    #[test]
    fn raman_pi_pulse_phase() {
        let e = shifted_params();
        // Choose δ = δ^AC so the drive is resonant with the shifted transition.
        let delta = e.delta_ac.re;
        let tau = PI / e.omega_r(delta);
        let t0 = 1.7e-3;
        let out = raman_pulse(&RamanState::ground(0.0), &e, delta, t0, tau).unwrap();
        let expect = -I
            * cis(-0.5 * (e.ac_e.re + e.ac_g.re) * tau)
            * cis(-0.5 * delta * tau)
            * cis(-(delta * t0 + e.phi_eff));
        assert!((out.c_e - expect).norm() < 1e-12);
        assert!(out.c_g.norm() < 1e-12);
    }

    #[test]
    fn raman_half_pi_balance() {
        let e = shifted_params();
        let delta = e.delta_ac.re;
        let tau = 0.5 * PI / e.omega_r(delta);
        let out = raman_pulse(&RamanState::ground(0.0), &e, delta, 0.0, tau).unwrap();
        assert!((out.c_e.norm_sqr() - 0.5).abs() < 1e-12);
        assert!((out.c_g.norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn balanced_light_shift_reduces_to_bare_two_level() {
        use crate::twolevel::evolve_pulse;
        use crate::types::{PulseParams, TwoLevelState};
        let l = pair(0.0, 0.0, 2e6, 2e6);
        let e = effective_params(&l, 4e8, EliminationConvention::Standard).unwrap();
        let (delta, t0, tau) = (37.0, 0.011, 2.3e-3);
        let start = RamanState {
            c_g: c(0.6),
            c_e: Complex64::new(0.0, 0.8),
            p: 0.0,
        };
        let r = raman_pulse(&start, &e, delta, t0, tau).unwrap();
        let bare = evolve_pulse(
            &TwoLevelState::new(start.c_g, start.c_e),
            &PulseParams::new(e.omega_eff.re, delta, e.phi_eff, t0, tau),
        );
        // Same dynamics up to the common light-shift phase.
        let common = cis(-0.5 * (e.ac_e.re + e.ac_g.re) * tau);
        assert!((r.c_g - common * bare.c_a).norm() < 1e-12);
        assert!((r.c_e - common * bare.c_b).norm() < 1e-12);
    }

    #[test]
    fn raman_chain_matches_fringe_law_at_resonance() {
        let delta = 0.0;
        let mut l = pair(0.0, 0.0, 3e6, 3e6);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let phases: [f64; 3] = [
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
            ];
            let mut state = RamanState::ground(0.0);
            let base = effective_params(&l, 1e9, EliminationConvention::Standard).unwrap();
            let tau_p = PI / base.omega_r(delta);
            let t = 0.02;
            let starts = [0.0, t + 0.5 * tau_p, 2.0 * t + 1.5 * tau_p];
            let durs = [0.5 * tau_p, tau_p, 0.5 * tau_p];
            for k in 0..3 {
                l.phi1 = 0.0;
                l.phi2 = phases[k];
                let p = effective_params(&l, 1e9, EliminationConvention::Standard).unwrap();
                state = raman_pulse(&state, &p, delta, starts[k], durs[k]).unwrap();
            }
            let dphi = phases[0] - 2.0 * phases[1] + phases[2];
            let expect = raman_sequence_probability(delta, tau_p, dphi);
            assert!((state.c_e.norm_sqr() - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn three_level_zero_coupling_identity() {
        let l = pair(0.0, 0.0, 0.0, 0.0);
        let det = RamanDetunings {
            delta1: 1e6,
            delta2: 1e6,
            delta_two_photon: 0.0,
        };
        let s = ThreeLevelState::ground(0.0);
        let out = three_level_ode_oracle(&s, &l, &det, 0.0, 1e-4, 1e-9).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn three_level_rejects_coarse_step() {
        let l = pair(0.0, 0.0, 1e3, 1e3);
        let det = RamanDetunings {
            delta1: 1e6,
            delta2: 1e6,
            delta_two_photon: 0.0,
        };
        assert!(matches!(
            three_level_ode_oracle(&ThreeLevelState::ground(0.0), &l, &det, 0.0, 1e-4, 1e-6),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn far_detuned_intermediate_population_stays_small() {
        let w = 1.0e5;
        let big = 100.0 * w;
        let l = pair(0.0, 0.0, w, w);
        let det = RamanDetunings {
            delta1: big,
            delta2: big,
            delta_two_photon: 0.0,
        };
        let e = effective_params(&l, big, EliminationConvention::Standard).unwrap();
        let tau = 0.5 * PI / e.omega_r(0.0);
        let dt = max_three_level_step(&l, &det);
        let n = 40;
        let mut s = ThreeLevelState::ground(0.0);
        let mut max_i: f64 = 0.0;
        for k in 0..n {
            let t0 = k as f64 * tau / n as f64;
            s = three_level_ode_oracle(&s, &l, &det, t0, tau / n as f64, dt).unwrap();
            max_i = max_i.max(s.c_i.norm_sqr());
        }
        let bound = 4.0 * (w / (2.0 * big)).powi(2);
        assert!(max_i < bound, "{max_i} vs {bound}");
        assert!((s.norm_sqr() - 1.0).abs() < 1e-8);
        // Effective-model fidelity after a π/2 pulse.
        let eff = raman_pulse(&RamanState::ground(0.0), &e, 0.0, 0.0, tau).unwrap();
        let overlap = (eff.c_g.conj() * s.c_g + eff.c_e.conj() * s.c_e).norm_sqr();
        assert!(overlap > 1.0 - 10.0 * (w / big).powi(2), "overlap {overlap}");
    }

    #[test]
    fn closed_sequence_recombines_momenta() {
        let hk = HBAR * 1.61e7;
        let p0 = 3e-27;
        let paths = mach_zehnder_paths(p0, hk);
        assert_eq!(paths.len(), 4);
        for level in [Level::Ground, Level::Excited] {
            let ends: Vec<_> = paths.iter().filter(|a| a.levels[3] == level).collect();
            assert_eq!(ends.len(), 2);
            assert_eq!(ends[0].momenta[3], ends[1].momenta[3]);
            let expect = match level {
                Level::Ground => p0,
                Level::Excited => p0 + hk,
            };
            assert_eq!(ends[0].momenta[3], expect);
        }
        for arm in &paths {
            for k in 0..3 {
                let dn = arm.recoils[k + 1] - arm.recoils[k];
                assert_eq!(dn.abs(), i32::from(arm.levels[k + 1] != arm.levels[k]));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn raman_and_two_level_fringe_laws_identical(
                delta in -1e6..1e6f64, tau in 0.0..1e-3f64, dphi in -10.0..10.0f64
            ) {
                prop_assert_eq!(
                    raman_sequence_probability(delta, tau, dphi).to_bits(),
                    mach_zehnder_probability(delta, tau, dphi).to_bits()
                );
            }
        }
    }
}
