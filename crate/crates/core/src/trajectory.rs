//! Classical free fall, action integrals and interferometer geometry.
//!
//! `z` points up and gravity enters the Lagrangian as `−mgz` with `g > 0`.
//! Pulses are instantaneous: the first at `t = 0`, the mirror at `T`, the
//! recombination at `2T`.

use crate::error::{Error, Result};
use crate::numeric::simpson;
use crate::types::laser_phase_combination;

/// Ballistic trajectory fixed by its state at `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFallTrajectory {
    pub z1: f64,
    pub v1: f64,
    pub t1: f64,
    pub g: f64,
}

impl FreeFallTrajectory {
    pub fn position(&self, t: f64) -> f64 {
        let s = t - self.t1;
        self.z1 + self.v1 * s - 0.5 * self.g * s * s
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.v1 - self.g * (t - self.t1)
    }

    /// The unique trajectory through `(t1, z1)` and `(t2, z2)`.
    pub fn connecting(z1: f64, t1: f64, z2: f64, t2: f64, g: f64) -> Result<Self> {
        if !(t2 > t1) {
            return Err(Error::TimeOrder { t1, t2 });
        }
        let dt = t2 - t1;
        Ok(Self {
            z1,
            v1: (z2 - z1) / dt + 0.5 * g * dt,
            t1,
            g,
        })
    }

    /// L = m ż²/2 − m g z.
    pub fn lagrangian(&self, t: f64, mass: f64) -> f64 {
        let v = self.velocity(t);
        0.5 * mass * v * v - mass * self.g * self.position(t)
    }
}

/// Closed-form classical action between two space-time points.
pub fn classical_action(z1: f64, t1: f64, z2: f64, t2: f64, mass: f64, g: f64) -> Result<f64> {
    if !(t2 > t1) {
        return Err(Error::TimeOrder { t1, t2 });
    }
    let dt = t2 - t1;
    let dz = z2 - z1;
    Ok(mass * dz * dz / (2.0 * dt) - mass * g * dt * (z2 + z1) / 2.0
        - mass * g * g * dt * dt * dt / 24.0)
}

/// Magnitude scale of the three terms of [`classical_action`], useful as the
/// denominator of a relative error when the terms cancel.
pub fn action_scale(z1: f64, t1: f64, z2: f64, t2: f64, mass: f64, g: f64) -> f64 {
    let dt = t2 - t1;
    let dz = z2 - z1;
    (mass * dz * dz / (2.0 * dt)).abs()
        + (mass * g * dt * (z2 + z1) / 2.0).abs()
        + (mass * g * g * dt.powi(3) / 24.0).abs()
}

/// Minimum number of Simpson intervals accepted by the quadrature oracle.
pub const MIN_QUADRATURE_STEPS: usize = 1000;

/// Action by Simpson quadrature of the Lagrangian along the connecting path.
pub fn action_quadrature_oracle(
    z1: f64,
    t1: f64,
    z2: f64,
    t2: f64,
    mass: f64,
    g: f64,
    n_steps: usize,
) -> Result<f64> {
    if n_steps < MIN_QUADRATURE_STEPS {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs at least {MIN_QUADRATURE_STEPS} steps, got {n_steps}"
        )));
    }
    let path = FreeFallTrajectory::connecting(z1, t1, z2, t2, g)?;
    Ok(simpson(|t| path.lagrangian(t, mass), t1, t2, n_steps))
}

/// Heights at the four pulse events, with and without gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryVertices {
    pub z_a: f64,
    pub z_b: f64,
    pub z_c: f64,
    pub z_d: f64,
    pub z_a0: f64,
    pub z_b0: f64,
    pub z_c0: f64,
    pub z_d0: f64,
}

impl TrajectoryVertices {
    /// z_C + z_D − z_A − z_B.
    pub fn closure(&self) -> f64 {
        self.z_c + self.z_d - self.z_a - self.z_b
    }

    pub fn closure_free(&self) -> f64 {
        self.z_c0 + self.z_d0 - self.z_a0 - self.z_b0
    }
}

fn vertex_heights(z0: f64, v0: f64, t: f64, recoil: f64, g: f64) -> [f64; 4] {
    let fall = 0.5 * g * t * t;
    let z_a = z0;
    let z_c = z0 + (v0 + recoil) * t - fall;
    let z_d = z0 + v0 * t - fall;
    // Both arms reach B with the same velocity v0 + recoil − gT after the mirror.
    let v_after = v0 + recoil - g * t;
    let z_b_upper = z_c + (v_after - recoil) * t - fall;
    let z_b_lower = z_d + v_after * t - fall;
    [z_a, 0.5 * (z_b_upper + z_b_lower), z_c, z_d]
}

/// Vertices of the Mach–Zehnder diamond. The upper arm receives the kick
/// `ħk_eff/m` at the first pulse.
pub fn build_vertices(
    z0: f64,
    v0: f64,
    interrogation_time: f64,
    k_eff: f64,
    g: f64,
    mass: f64,
    hbar: f64,
) -> Result<TrajectoryVertices> {
    if !(interrogation_time > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "interrogation time must be positive, got {interrogation_time}"
        )));
    }
    let recoil = hbar * k_eff / mass;
    let [z_a, z_b, z_c, z_d] = vertex_heights(z0, v0, interrogation_time, recoil, g);
    let [z_a0, z_b0, z_c0, z_d0] = vertex_heights(z0, v0, interrogation_time, recoil, 0.0);
    Ok(TrajectoryVertices {
        z_a,
        z_b,
        z_c,
        z_d,
        z_a0,
        z_b0,
        z_c0,
        z_d0,
    })
}

/// Propagation phase difference between the arms,
/// (m/Tħ)(z_C − z_D)[z_C + z_D − z_A − z_B − gT²].
pub fn path_phase(v: &TrajectoryVertices, interrogation_time: f64, mass: f64, g: f64, hbar: f64) -> f64 {
    let t = interrogation_time;
    mass / (t * hbar) * (v.z_c - v.z_d) * (v.closure() - g * t * t)
}

/// Same quantity as [`path_phase`], computed directly as the difference of
/// the four segment actions (upper minus lower arm) divided by ħ.
pub fn path_phase_from_actions(
    v: &TrajectoryVertices,
    interrogation_time: f64,
    mass: f64,
    g: f64,
    hbar: f64,
) -> Result<f64> {
    let t = interrogation_time;
    let upper = classical_action(v.z_a, 0.0, v.z_c, t, mass, g)?
        + classical_action(v.z_c, t, v.z_b, 2.0 * t, mass, g)?;
    let lower = classical_action(v.z_a, 0.0, v.z_d, t, mass, g)?
        + classical_action(v.z_d, t, v.z_b, 2.0 * t, mass, g)?;
    Ok((upper - lower) / hbar)
}

/// Upper-arm minus lower-arm laser phase: k_eff(z_C − z_B − z_A + z_D) + φ₁ − 2φ₂ + φ₃.
pub fn laser_phase_sum(v: &TrajectoryVertices, phases: [f64; 3], k_eff: f64) -> f64 {
    k_eff * (v.z_c - v.z_b - v.z_a + v.z_d) + laser_phase_combination(phases)
}

/// k_eff g T² + φ₁ − 2φ₂ + φ₃.
pub fn total_phase(interrogation_time: f64, k_eff: f64, g: f64, phases: [f64; 3]) -> f64 {
    let t = interrogation_time;
    k_eff * g * t * t + laser_phase_combination(phases)
}

/// (β − k_eff g)T² + Δφ_laser, for a frequency chirp `β` in rad/s².
///
/// A linear ramp `βt` of the Raman frequency difference adds the phase
/// `βt²/2` at each pulse, so the pulses at 0, T, 2T contribute βT².
pub fn chirped_phase(beta: f64, k_eff: f64, g: f64, interrogation_time: f64, dphi_laser: f64) -> f64 {
    let t = interrogation_time;
    (beta - k_eff * g) * t * t + dphi_laser
}

/// Laser phases at the three pulses (t = 0, T, 2T) produced by a chirp.
pub fn chirp_phases(beta: f64, interrogation_time: f64) -> [f64; 3] {
    let t = interrogation_time;
    [0.0, 0.5 * beta * t * t, 2.0 * beta * t * t]
}
