//! Log-power series Σ c ζ^p [ln(ζ/2)]^ℓ, ℓ ∈ {0, 1}, for the small-argument
//! kernel, differentiated term by term.

use crate::specfun::{digamma_int, gamma_half_int};
use crate::{Cplx, Real};

const TERMS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub power: i32,
    pub coef: Cplx,
    pub log: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LogPowerSeries {
    pub terms: Vec<Term>,
}

fn factorial(k: u32) -> Real {
    (1..=k).map(|m| m as Real).product()
}

/// Falling factorial p(p−1)…(p−r+1).
fn falling(p: i32, r: usize) -> Real {
    (0..r as i32).map(|j| (p - j) as Real).product()
}

fn binom(r: usize, j: usize) -> Real {
    (0..j).map(|i| (r - i) as Real / (i + 1) as Real).product()
}

impl LogPowerSeries {
    fn push(&mut self, power: i32, coef: Cplx, log: bool) {
        self.terms.push(Term { power, coef, log });
    }

    /// ζ^ν H⁽¹⁾_ν(ζ) for 2ν ≥ 0 integer.
    pub fn f_nu(two_nu: i64) -> Self {
        assert!(two_nu >= 0);
        let mut s = Self::default();
        let i = Cplx::i();
        if two_nu % 2 == 1 {
            // ζ^ν J_ν − i(−1)^j ζ^ν J_{−ν}, ν = j + 1/2
            let nu = two_nu as Real / 2.0;
            let j = (two_nu - 1) / 2;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for k in 0..TERMS as i64 {
                let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
                let kf = k as Real;
                let plus = alt / (2f64.powf(2.0 * kf + nu) * factorial(k as u32) * gamma_half_int::<Real>(two_nu + 2 * k + 2));
                s.push((2 * k + two_nu) as i32, Cplx::new(plus, 0.0), false);
                let minus = alt / (2f64.powf(2.0 * kf - nu) * factorial(k as u32) * gamma_half_int::<Real>(2 * k - two_nu + 2));
                s.push(2 * k as i32, -i * sign * minus, false);
            }
        } else {
            let nu = (two_nu / 2) as u32;
            let pi = std::f64::consts::PI;
            // ζ^ν J_ν and the logarithmic part of ζ^ν Y_ν
            for k in 0..TERMS as u32 {
                let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
                let c = alt / (2f64.powi((2 * k + nu) as i32) * factorial(k) * factorial(nu + k));
                let p = (2 * k + 2 * nu) as i32;
                s.push(p, Cplx::new(c, 0.0), false);
                s.push(p, i * (2.0 / pi) * c, true);
                let psi = digamma_int(k as i64 + 1).unwrap() + digamma_int((nu + k) as i64 + 1).unwrap();
                s.push(p, -i * (psi / pi) * c, false);
            }
            for k in 0..nu {
                let c = -(2f64.powi(nu as i32) / pi) * factorial(nu - k - 1) / factorial(k) / 4f64.powi(k as i32);
                s.push(2 * k as i32, i * c, false);
            }
        }
        s
    }

    /// ζ f_{n/2−1}(ζ), the identity part of the kernel.
    pub fn kernel_a(n: usize) -> Self {
        let mut s = Self::f_nu(n as i64 - 2);
        for t in &mut s.terms {
            t.power += 1;
        }
        s
    }

    /// f_{n/2}(ζ), the α·ω̂ part of the kernel.
    pub fn kernel_b(n: usize) -> Self {
        Self::f_nu(n as i64)
    }

    pub fn eval(&self, zeta: Cplx) -> Cplx {
        self.derivative_at(0, zeta)
    }

    /// r-th derivative at ζ; d^j ln ζ = (−1)^{j−1}(j−1)! ζ^{−j} drives the
    /// Leibniz expansion of the logarithmic terms.
    pub fn derivative_at(&self, r: usize, zeta: Cplx) -> Cplx {
        let lg = (zeta * 0.5).ln();
        let mut sum = Cplx::new(0.0, 0.0);
        for t in &self.terms {
            let base = zeta.powi(t.power - r as i32);
            if !t.log {
                let f = falling(t.power, r);
                if f != 0.0 {
                    sum += t.coef * f * base;
                }
            } else {
                let mut acc = Cplx::new(falling(t.power, r), 0.0) * lg;
                for j in 1..=r {
                    let dj = if j % 2 == 1 { 1.0 } else { -1.0 } * factorial(j as u32 - 1);
                    acc += binom(r, j) * falling(t.power, r - j) * dj;
                }
                sum += t.coef * acc * base;
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::hankel1;

    #[test]
    fn reproduces_hankel() {
        for two_nu in 0..7i64 {
            let s = LogPowerSeries::f_nu(two_nu);
            for z in [Cplx::new(0.3, 0.1), Cplx::new(-0.8, 0.5), Cplx::new(0.0, 1.2)] {
                let nu = two_nu as Real / 2.0;
                let want = (z.ln() * nu).exp() * hankel1(nu, z).unwrap();
                let got = s.eval(z);
                assert!((got - want).norm() <= 1e-13 * want.norm(), "2ν={two_nu} z={z}");
            }
        }
    }

    #[test]
    fn derivative_of_log_term() {
        // d²/dζ² [ζ³ ln(ζ/2)] = 6ζ ln(ζ/2) + 5ζ
        let s = LogPowerSeries { terms: vec![Term { power: 3, coef: Cplx::new(1.0, 0.0), log: true }] };
        let z = Cplx::new(0.7, 0.2);
        let want = z * 6.0 * (z * 0.5).ln() + z * 5.0;
        assert!((s.derivative_at(2, z) - want).norm() < 1e-14);
    }
}
