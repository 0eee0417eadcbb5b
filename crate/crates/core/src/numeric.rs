//! Small numerical kernels: fixed-step RK4 for complex amplitude vectors and
//! composite Simpson quadrature.

use num_complex::Complex64;

/// One classical fourth-order Runge–Kutta step of `dy/dt = f(t, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[Complex64; N], dt: f64) -> [Complex64; N]
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let axpy = |y: &[Complex64; N], k: &[Complex64; N], h: f64| {
        let mut out = *y;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += ki * h;
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(y, &k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, &axpy(y, &k2, 0.5 * dt));
    let k4 = f(t + dt, &axpy(y, &k3, dt));
    let mut out = *y;
    for i in 0..N {
        out[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
    }
    out
}

/// Integrate from `t0` over `duration` with steps no longer than `max_dt`.
///
/// The step is shrunk so that an integer number of steps lands exactly on
/// `t0 + duration`.
pub fn rk4_integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [Complex64; N],
    duration: f64,
    max_dt: f64,
) -> [Complex64; N]
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    if duration <= 0.0 {
        return y0;
    }
    let steps = (duration / max_dt).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        y = rk4_step(&f, t0 + n as f64 * dt, &y, dt);
    }
    y
}

/// Composite Simpson rule on `[a, b]` with `n` subintervals (`n` rounded up to
/// even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    (f(a) + f(b) + 4.0 * odd + 2.0 * even) * h / 3.0
}

/// Complex-valued composite Simpson rule.
pub fn simpson_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Pairwise (cascade) summation; the result does not depend on how the input
/// was produced, only on its order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
