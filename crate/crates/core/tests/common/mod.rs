//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use diracspec::clifford::CliffordRep;
use diracspec::{CMat, Cplx, Real};
use rand::Rng;

/// J_n(x) for integer n from (1/π)∫_0^π cos(nθ − x sin θ)dθ by the
/// trapezoid rule, which converges geometrically for this periodic integrand.
pub fn bessel_j_trapezoid(n: i32, x: Real) -> Real {
    let steps = 64 + 2 * x.abs().ceil() as usize;
    let h = PI / steps as Real;
    let f = |t: Real| (n as Real * t - x * t.sin()).cos();
    let inner: Real = (1..steps).map(|k| f(k as Real * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// Richardson table for values at η, η/2, η/4, … with error η + η² + ….
pub fn richardson_halving(values: &[Real]) -> Real {
    let mut row = values.to_vec();
    let mut factor = 2.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 2.0;
    }
    row[0]
}

/// Composite Gauss–Legendre on [0, upper] with unit panels.
fn integrate_panels<F: Fn(Real) -> Real>(f: F, upper: Real) -> Real {
    const X: [Real; 8] = [
        -0.9602898564975363,
        -0.7966664774136267,
        -0.5255324099163290,
        -0.1834346424956498,
        0.1834346424956498,
        0.5255324099163290,
        0.7966664774136267,
        0.9602898564975363,
    ];
    const W: [Real; 8] = [
        0.1012285362903763,
        0.2223810344533745,
        0.3137066458778873,
        0.3626837833783620,
        0.3626837833783620,
        0.3137066458778873,
        0.2223810344533745,
        0.1012285362903763,
    ];
    let panels = (upper / 0.5).ceil() as usize;
    let h = upper / panels as Real;
    let mut s = 0.0;
    for k in 0..panels {
        let c = (k as Real + 0.5) * h;
        for (x, w) in X.iter().zip(&W) {
            s += f(c + 0.5 * h * x) * w * 0.5 * h;
        }
    }
    s
}

/// Two-dimensional kernel at z = iκ by radial Fourier inversion of
/// (α·p + z)/(p² − z²), damped by e^{−ηp²} and extrapolated to η → 0.
pub fn fourier_green_2d(rep: &CliffordRep, kappa: Real, x: &[Real], y: &[Real]) -> CMat {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let etas = [0.02, 0.01, 0.005, 0.0025];
    let mut a_vals = Vec::new();
    let mut b_vals = Vec::new();
    for eta in etas {
        let upper = (40.0 / eta as Real).sqrt();
        let a = integrate_panels(|p| bessel_j_trapezoid(0, p * r) * p / (p * p + kappa * kappa) * (-eta * p * p).exp(), upper);
        let b = integrate_panels(
            |p| bessel_j_trapezoid(1, p * r) * p * p / (p * p + kappa * kappa) * (-eta * p * p).exp(),
            upper,
        );
        a_vals.push(a);
        b_vals.push(b);
    }
    let z = Cplx::new(0.0, kappa);
    let a = z * (richardson_halving(&a_vals) / (2.0 * PI));
    let b = Cplx::new(0.0, richardson_halving(&b_vals) / (2.0 * PI));
    let unit = [d[0] / r, d[1] / r];
    CMat::identity(rep.size, rep.size) * a + rep.alpha_dot(&unit) * b
}

/// Uniform point on the unit sphere in ℝⁿ.
pub fn random_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<Real> {
    loop {
        let v: Vec<Real> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|t| t * t).sum::<Real>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.iter().map(|t| t / norm).collect();
        }
    }
}

pub fn rel(a: Cplx, b: Cplx) -> Real {
    (a - b).norm() / b.norm().max(Real::MIN_POSITIVE)
}
