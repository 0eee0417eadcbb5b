//! Shared physical constants, pulse/sequence records and state vectors.
//!
//! Conventions used throughout the crate:
//!
//! * Strict SI. Every frequency is an angular frequency in rad/s.
//! * Free evolution carries the factor `exp(-i E t / ħ)`; a level with energy
//!   `ħω` picks up `exp(-iωt)`.
//! * Two-level column vectors are ordered `(C_b, C_a)ᵀ`, excited state first.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s, CODATA 2018 exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Mass of a ⁸⁷Rb atom (kg).
pub const RB87_MASS: f64 = 1.443e-25;
/// Effective two-photon wave vector of a typical Rb Raman gravimeter (rad/m).
pub const DEFAULT_K_EFF: f64 = 1.610e7;
/// Conventional standard gravity used as default (m/s²).
pub const DEFAULT_G: f64 = 9.81;

/// Physical constants that parameterize a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub default_g: f64,
    pub atom_mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            default_g: DEFAULT_G,
            atom_mass: RB87_MASS,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, default_g: f64, atom_mass: f64) -> Result<Self> {
        let c = Self {
            hbar,
            default_g,
            atom_mass,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("default_g", self.default_g),
            ("atom_mass", self.atom_mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Recoil velocity ħk/m for a given wave vector.
    pub fn recoil_velocity(&self, k_eff: f64) -> f64 {
        self.hbar * k_eff / self.atom_mass
    }
}

/// One square light pulse.
///
/// The complex Rabi frequency is stored as modulus and argument. Only the
/// combination `laser_phase - rabi_arg` enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub rabi_mod: f64,
    pub rabi_arg: f64,
    pub detuning: f64,
    pub laser_phase: f64,
    pub start_time: f64,
    pub duration: f64,
}

impl PulseParams {
    /// Pulse with a real, non-negative Rabi frequency.
    pub fn new(rabi: f64, detuning: f64, laser_phase: f64, start_time: f64, duration: f64) -> Self {
        Self {
            rabi_mod: rabi.abs(),
            rabi_arg: if rabi < 0.0 { std::f64::consts::PI } else { 0.0 },
            detuning,
            laser_phase,
            start_time,
            duration,
        }
    }

    pub fn with_complex_rabi(mut self, rabi: Complex64) -> Self {
        self.rabi_mod = rabi.norm();
        self.rabi_arg = if self.rabi_mod > 0.0 { rabi.arg() } else { 0.0 };
        self
    }

    pub fn rabi(&self) -> Complex64 {
        Complex64::from_polar(self.rabi_mod, self.rabi_arg)
    }

    /// Generalized Rabi frequency √(|Ω|² + δ²).
    pub fn omega_r(&self) -> f64 {
        self.rabi_mod.hypot(self.detuning)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse duration must be non-negative, got {}",
                self.duration
            )));
        }
        if !(self.rabi_mod >= 0.0) {
            return Err(Error::InvalidParameter(
                "Rabi modulus must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters of one full Mach–Zehnder run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceParams {
    /// Dark interrogation time between pulses (s).
    pub interrogation_time: f64,
    /// Duration of the π pulse (s); the π/2 pulses last half of this.
    pub tau_p: f64,
    pub phases: [f64; 3],
    pub k_eff: f64,
    /// Chirp rate of the Raman frequency difference (rad/s²).
    pub beta: f64,
}

impl SequenceParams {
    /// φ₁ − 2φ₂ + φ₃.
    pub fn laser_phase_combination(&self) -> f64 {
        laser_phase_combination(self.phases)
    }
}

/// φ₁ − 2φ₂ + φ₃.
pub fn laser_phase_combination(phases: [f64; 3]) -> f64 {
    phases[0] - 2.0 * phases[1] + phases[2]
}

/// Internal level selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Ground,
    Excited,
}

/// Maximum norm deviation accepted by [`state_probability`].
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Amplitudes of a two-level atom: `c_a` ground, `c_b` excited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub c_a: Complex64,
    pub c_b: Complex64,
}

impl TwoLevelState {
    pub fn new(c_a: Complex64, c_b: Complex64) -> Self {
        Self { c_a, c_b }
    }

    pub fn ground() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn excited() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Column vector in `(C_b, C_a)` order.
    pub fn to_column(self) -> [Complex64; 2] {
        [self.c_b, self.c_a]
    }

    pub fn from_column(v: [Complex64; 2]) -> Self {
        Self { c_b: v[0], c_a: v[1] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_a.norm_sqr() + self.c_b.norm_sqr()
    }

    /// |⟨self|other⟩|, insensitive to global phase.
    pub fn overlap(&self, other: &Self) -> f64 {
        (self.c_a.conj() * other.c_a + self.c_b.conj() * other.c_b).norm()
    }

    pub fn amplitude(&self, which: Level) -> Complex64 {
        match which {
            Level::Ground => self.c_a,
            Level::Excited => self.c_b,
        }
    }
}

/// Probability |⟨i|ψ⟩|² of finding the atom in `which`.
pub fn state_probability(state: &TwoLevelState, which: Level) -> Result<f64> {
    let deviation = (state.norm_sqr() - 1.0).abs();
    if !(deviation <= NORM_TOLERANCE) {
        return Err(Error::InvalidState { deviation });
    }
    Ok(state.amplitude(which).norm_sqr())
}

/// Amplitudes of the three momentum-labelled states coupled by a Raman pair:
/// `|a, p⟩`, `|i, p + ħk₁⟩` and `|b, p + ħk_eff⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelState {
    pub c_g: Complex64,
    pub c_i: Complex64,
    pub c_e: Complex64,
    /// Momentum label of the ground component (kg·m/s).
    pub p: f64,
}

impl ThreeLevelState {
    pub fn ground(p: f64) -> Self {
        Self {
            c_g: Complex64::new(1.0, 0.0),
            c_i: Complex64::new(0.0, 0.0),
            c_e: Complex64::new(0.0, 0.0),
            p,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_g.norm_sqr() + self.c_i.norm_sqr() + self.c_e.norm_sqr()
    }
}
