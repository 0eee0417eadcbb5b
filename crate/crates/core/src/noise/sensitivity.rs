//! Sensitivity function of the three-pulse sequence, its acceleration
//! kernel and its Fourier transform.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::simpson_complex;

/// Which piecewise definition of g_s to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SensitivityForm {
    /// Odd about the π-pulse centre: −1 between pulses 1 and 2, +1 between
    /// pulses 2 and 3, sinusoidal ramps inside the pulses.
    #[default]
    Odd,
    /// Piecewise values: sin(Ω_R t) on (0, T/2), 1 on
    /// (T/2, 3T/2), sin(Ω_R(t − T)) on (3T/2, 2T). Kept for inspection; it
    /// has a DC component.
    Piecewise,
}

/// Timing of a π/2–π–π/2 sequence with square pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityProfile {
    pub interrogation_time: f64,
    pub tau_p: f64,
    pub omega_r: f64,
    pub form: SensitivityForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Const(f64),
    /// amp · sin(w t + shift)
    Sine { amp: f64, w: f64, shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    start: f64,
    end: f64,
    shape: Shape,
}

impl Segment {
    fn value(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Const(c) => c,
            Shape::Sine { amp, w, shift } => amp * (w * t + shift).sin(),
        }
    }

    /// ∫_start^t of the segment value.
    fn integral_to(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Const(c) => c * (t - self.start),
            Shape::Sine { amp, w, shift } => {
                -amp / w * ((w * t + shift).cos() - (w * self.start + shift).cos())
            }
        }
    }

    /// ∫ value(t) e^{−iωt} dt over the segment.
    fn fourier(&self, omega: f64) -> Complex64 {
        match self.shape {
            Shape::Const(c) => c * exp_integral(-omega, self.start, self.end),
            Shape::Sine { amp, w, shift } => {
                let up = Complex64::from_polar(1.0, shift) * exp_integral(w - omega, self.start, self.end);
                let down =
                    Complex64::from_polar(1.0, -shift) * exp_integral(-w - omega, self.start, self.end);
                amp * (up - down) / Complex64::new(0.0, 2.0)
            }
        }
    }
}

/// ∫_a^b e^{iνt} dt in a form that stays accurate as ν → 0.
fn exp_integral(nu: f64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let x = 0.5 * nu * len;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Complex64::from_polar(len * sinc, 0.5 * nu * (a + b))
}

impl SensitivityProfile {
    /// Profile whose π pulse lasts `tau_p`, so Ω_R = π/τ_p.
    pub fn new(interrogation_time: f64, tau_p: f64) -> Result<Self> {
        let p = Self {
            interrogation_time,
            tau_p,
            omega_r: PI / tau_p,
            form: SensitivityForm::Odd,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_form(mut self, form: SensitivityForm) -> Self {
        self.form = form;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0.0 && self.interrogation_time > self.tau_p) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tau_p < T (tau_p = {}, T = {})",
                self.tau_p, self.interrogation_time
            )));
        }
        if ((self.omega_r * self.tau_p - PI) / PI).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "Omega_R * tau_p = {} must equal pi",
                self.omega_r * self.tau_p
            )));
        }
        Ok(())
    }

    /// Total length of the sequence, 2T + 2τ_p.
    pub fn duration(&self) -> f64 {
        2.0 * self.interrogation_time + 2.0 * self.tau_p
    }

    /// Centre of the π pulse, T + τ_p.
    pub fn mirror_center(&self) -> f64 {
        self.interrogation_time + self.tau_p
    }

    fn segments(&self) -> Vec<Segment> {
        let (t, tau, w) = (self.interrogation_time, self.tau_p, self.omega_r);
        let seg = |start, end, shape| Segment { start, end, shape };
        match self.form {
            SensitivityForm::Odd => {
                let tm = self.mirror_center();
                let end = self.duration();
                vec![
                    seg(0.0, 0.5 * tau, Shape::Sine { amp: -1.0, w, shift: 0.0 }),
                    seg(0.5 * tau, 0.5 * tau + t, Shape::Const(-1.0)),
                    seg(0.5 * tau + t, 1.5 * tau + t, Shape::Sine { amp: 1.0, w, shift: -w * tm }),
                    seg(1.5 * tau + t, 1.5 * tau + 2.0 * t, Shape::Const(1.0)),
                    seg(1.5 * tau + 2.0 * t, end, Shape::Sine { amp: 1.0, w: -w, shift: w * end }),
                ]
            }
            SensitivityForm::Piecewise => vec![
                seg(0.0, 0.5 * t, Shape::Sine { amp: 1.0, w, shift: 0.0 }),
                seg(0.5 * t, 1.5 * t, Shape::Const(1.0)),
                seg(1.5 * t, 2.0 * t, Shape::Sine { amp: 1.0, w, shift: -w * t }),
            ],
        }
    }

    /// Support of g_s: [0, end].
    pub fn support_end(&self) -> f64 {
        match self.form {
            SensitivityForm::Odd => self.duration(),
            SensitivityForm::Piecewise => 2.0 * self.interrogation_time,
        }
    }

    /// Boundaries of the piecewise definition, for segment-aware quadrature.
    pub fn breakpoints(&self) -> Vec<f64> {
        let segs = self.segments();
        let mut out: Vec<f64> = segs.iter().map(|s| s.start).collect();
        out.push(segs.last().map_or(0.0, |s| s.end));
        out
    }
}

/// g_s(t); zero outside the sequence.
pub fn sensitivity_g(t: f64, profile: &SensitivityProfile) -> f64 {
    profile
        .segments()
        .iter()
        .find(|s| t >= s.start && t < s.end)
        .map_or(0.0, |s| s.value(t))
}

/// K(t) = −∫₀ᵗ g_s. A velocity change δv(t) = ∫₀ᵗ δa shifts the phase by
/// k_eff ∫ g_s δv dt = k_eff ∫ K δa dt, the double integral of g_s.
pub fn acceleration_kernel(t: f64, profile: &SensitivityProfile) -> f64 {
    let mut acc = 0.0;
    for s in profile.segments() {
        if t <= s.start {
            break;
        }
        acc += s.integral_to(t.min(s.end));
    }
    -acc
}

/// Acceleration weight k_eff·K(t): δΦ = ∫ sensitivity_a(t) δa(t) dt.
pub fn sensitivity_a(t: f64, profile: &SensitivityProfile, k_eff: f64) -> f64 {
    k_eff * acceleration_kernel(t, profile)
}

/// δΦ = k_eff ∫ K(t) δa(t) dt with the closed-form kernel, by composite
/// Simpson on every piece of g_s with `n_per_segment` intervals.
pub fn acceleration_phase<F: Fn(f64) -> f64>(
    accel: F,
    profile: &SensitivityProfile,
    k_eff: f64,
    n_per_segment: usize,
) -> f64 {
    let bp = profile.breakpoints();
    let mut total = 0.0;
    for w in bp.windows(2) {
        total += crate::numeric::simpson(
            |t| acceleration_kernel(t, profile) * accel(t),
            w[0],
            w[1],
            n_per_segment,
        );
    }
    k_eff * total
}

/// δΦ = k_eff ∫ g_s(t) δv(t) dt with δv(t) = ∫₀ᵗ δa evaluated by a nested
/// quadrature. Slow; meant as a check on [`acceleration_phase`].
pub fn acceleration_phase_nested<F: Fn(f64) -> f64>(
    accel: F,
    profile: &SensitivityProfile,
    k_eff: f64,
    n_per_segment: usize,
) -> f64 {
    let bp = profile.breakpoints();
    let velocity = |t: f64| -> f64 {
        let mut v = 0.0;
        for w in bp.windows(2) {
            if t <= w[0] {
                break;
            }
            v += crate::numeric::simpson(&accel, w[0], t.min(w[1]), n_per_segment);
        }
        v
    };
    let mut total = 0.0;
    for s in profile.segments() {
        total += crate::numeric::simpson(
            |t| s.value(t) * velocity(t),
            s.start,
            s.end,
            n_per_segment,
        );
    }
    k_eff * total
}

/// G(ω) = ∫ g_s(t) e^{−iωt} dt in closed form.
pub fn transfer_function_exact(omega: f64, profile: &SensitivityProfile) -> Complex64 {
    profile.segments().iter().map(|s| s.fourier(omega)).sum()
}

/// |G(ω)| by Simpson quadrature on each piece with at least `n_min`
/// intervals and at least 64 per oscillation period.
pub fn transfer_function_with(omega: f64, profile: &SensitivityProfile, n_min: usize) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for s in profile.segments() {
        let rate = match s.shape {
            Shape::Const(_) => omega.abs(),
            Shape::Sine { w, .. } => omega.abs().max(w.abs()),
        };
        let cycles = rate * (s.end - s.start) / (2.0 * PI);
        let n = n_min.max((64.0 * cycles).ceil() as usize);
        acc += simpson_complex(
            |t| s.value(t) * Complex64::from_polar(1.0, -omega * t),
            s.start,
            s.end,
            n,
        );
    }
    acc.norm()
}

/// |G(ω)| by numerical quadrature.
pub fn transfer_function(omega: f64, profile: &SensitivityProfile) -> f64 {
    transfer_function_with(omega, profile, 512)
}

/// |G(ω)| of the square profile (τ_p → 0): (4/ω) sin²(ωT/2).
pub fn square_transfer(omega: f64, interrogation_time: f64) -> f64 {
    4.0 / omega * (0.5 * omega * interrogation_time).sin().powi(2)
}
