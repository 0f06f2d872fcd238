//! Power series for J_ν and Y_n, generic over the float type so the same code
//! runs in f64 and in double-double.

use num_complex::Complex;
use num_traits::{Float, FloatConst};

use super::{SERIES_CAP, SERIES_TOL};
use crate::Cplx;

fn real<T: Float>(x: f64) -> T {
    T::from(x).unwrap()
}

/// 1/x refined by one Newton step; exact to working precision even when the
/// float type's own division is not.
fn recip<T: Float>(x: T) -> T {
    let r = T::one() / x;
    r + r * (T::one() - x * r)
}

fn rdiv<T: Float>(a: T, b: T) -> T {
    a * recip(b)
}

fn cdiv<T: Float>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let s = recip(b.re * b.re + b.im * b.im);
    a * b.conj() * s
}

fn cscale<T: Float>(a: Complex<T>, s: T) -> Complex<T> {
    Complex::new(a.re * s, a.im * s)
}

fn cpowi<T: Float>(z: Complex<T>, m: i32) -> Complex<T> {
    let mut p = Complex::new(T::one(), T::zero());
    for _ in 0..m.unsigned_abs() {
        p = p * z;
    }
    if m < 0 {
        cdiv(Complex::new(T::one(), T::zero()), p)
    } else {
        p
    }
}

/// Principal square root computed algebraically, which keeps full precision
/// for extended float types whose transcendental functions are weaker.
pub fn sqrt_principal<T: Float>(z: Complex<T>) -> Complex<T> {
    let zero = T::zero();
    if z.re == zero && z.im == zero {
        return z;
    }
    let two = real::<T>(2.0);
    let half = real::<T>(0.5);
    let r = (z.re * z.re + z.im * z.im).sqrt();
    if z.re >= zero {
        let a = ((r + z.re) * half).sqrt();
        Complex::new(a, rdiv(z.im, two * a))
    } else {
        let mut b = ((r - z.re) * half).sqrt();
        if z.im < zero {
            b = -b;
        }
        Complex::new(rdiv(z.im, two * b), b)
    }
}

/// Γ(x) for x = two_x/2 a positive integer or any half-integer.
pub fn gamma_half_int<T: Float + FloatConst>(two_x: i64) -> T {
    assert!(two_x > 0 || two_x % 2 != 0, "Γ has a pole at {}", two_x as f64 / 2.0);
    let (mut g, mut t) = if two_x % 2 == 0 { (T::one(), 2i64) } else { (T::PI().sqrt(), 1i64) };
    while t < two_x {
        g = g * real::<T>(t as f64 / 2.0);
        t += 2;
    }
    while t > two_x {
        t -= 2;
        g = rdiv(g, real::<T>(t as f64 / 2.0));
    }
    g
}

/// (ζ/2)^ν for 2ν integer on the principal branch.
fn half_power<T: Float>(h: Complex<T>, two_nu: i64) -> Complex<T> {
    let m = two_nu.div_euclid(2) as i32;
    let mut p = cpowi(h, m);
    if two_nu.rem_euclid(2) == 1 {
        p = p * sqrt_principal(h);
    }
    p
}

/// Truncation tolerance: the series floor or the type's epsilon, whichever is finer.
fn working_tol<T: Float>() -> T {
    real::<T>(SERIES_TOL).min(T::epsilon())
}

/// Σ_k (−ζ²/4)^k Γ(ν+1)/(k!Γ(ν+k+1)), together with the number of terms.
pub fn j_sum<T: Float>(two_nu: i64, z: Complex<T>) -> (Complex<T>, usize) {
    let nu = real::<T>(two_nu as f64 / 2.0);
    let w = cscale(-(z * z), real::<T>(0.25));
    let wn = w.norm();
    let mut t = Complex::new(T::one(), T::zero());
    let mut sum = t;
    let tol = working_tol::<T>();
    for k in 1..=SERIES_CAP {
        let kf = real::<T>(k as f64);
        let den = kf * (nu + kf);
        t = cscale(t * w, recip(den));
        sum = sum + t;
        if t.norm() < tol * sum.norm() && wn < den.abs() {
            return (sum, k + 1);
        }
    }
    (sum, SERIES_CAP + 1)
}

/// J_ν(ζ) for 2ν integer, ν not a negative integer.
pub fn bessel_j<T: Float + FloatConst>(two_nu: i64, z: Complex<T>) -> Complex<T> {
    let h = cscale(z, real::<T>(0.5));
    let (s, _) = j_sum(two_nu, z);
    cscale(half_power(h, two_nu) * s, recip(gamma_half_int::<T>(two_nu + 2)))
}

const EULER_GAMMA_HI: f64 = 0.5772156649015329;
const EULER_GAMMA_LO: f64 = -4.942915152430645e-18;

/// J_n and Y_n for integer n ≥ 0. `log_half` is ln(ζ/2) on the principal branch.
pub fn bessel_jy_int<T: Float + FloatConst>(
    n: u32,
    z: Complex<T>,
    log_half: Cplx,
) -> (Complex<T>, Complex<T>) {
    let h = cscale(z, real::<T>(0.5));
    let w = -(h * h);
    let wn = w.norm();
    let nf = real::<T>(n as f64);
    let tol = working_tol::<T>();

    // harmonic numbers H_k and H_{n+k}
    let mut hk = T::zero();
    let mut hnk = (1..=n).fold(T::zero(), |s, m| s + recip(real::<T>(m as f64)));
    let mut u = Complex::new(T::one(), T::zero());
    let mut jsum = u;
    let mut hsum = u * (hk + hnk);
    for k in 1..=SERIES_CAP {
        let kf = real::<T>(k as f64);
        let den = kf * (nf + kf);
        u = cscale(u * w, recip(den));
        hk = hk + recip(kf);
        hnk = hnk + recip(nf + kf);
        let ht = u * (hk + hnk);
        jsum = jsum + u;
        hsum = hsum + ht;
        if wn < den.abs() && u.norm() < tol * jsum.norm() && ht.norm() < tol * hsum.norm() {
            break;
        }
    }

    let fact = (1..=n).fold(T::one(), |s, m| s * real::<T>(m as f64));
    let hn = cpowi(h, n as i32);
    let j = cscale(hn * jsum, recip(fact));

    // finite part Σ_{k<n} (n−k−1)!/k! (ζ²/4)^k
    let q = h * h;
    let mut finite = Complex::new(T::zero(), T::zero());
    let mut qk = Complex::new(T::one(), T::zero());
    for k in 0..n {
        let num = (1..n - k).fold(T::one(), |s, m| s * real::<T>(m as f64));
        let den = (1..=k).fold(T::one(), |s, m| s * real::<T>(m as f64));
        finite = finite + cscale(qk, rdiv(num, den));
        qk = qk * q;
    }

    let pi = T::PI();
    let gamma = real::<T>(EULER_GAMMA_HI) + real::<T>(EULER_GAMMA_LO);
    let lg = Complex::new(real::<T>(log_half.re) + gamma, real::<T>(log_half.im));
    let two = real::<T>(2.0);
    let y = cscale(-cdiv(finite, hn), recip(pi)) + cscale(lg * j, rdiv(two, pi))
        - cscale(hn * hsum, recip(pi * fact));
    (j, y)
}
