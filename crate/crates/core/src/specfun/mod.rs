//! Bessel and Hankel functions on the closed upper half-plane.
//!
//! Power series are summed in double-double precision so that the
//! cancellation at moderately large |ζ| does not eat the f64 result. Orders are
//! restricted to integers and half-integers, which is all the kernels need.

mod series;

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::error::{invalid, Error, Result};
use crate::{Cplx, Real};

pub use series::{gamma_half_int, sqrt_principal};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: Real = 0.577215664901532861;

/// |ζ| at which `hankel1` leaves the series for the asymptotic expansion.
pub const SWITCHOVER: Real = 25.0;
/// Smallest |ζ| accepted by `hankel1_asymptotic`.
pub const ASYMPTOTIC_FLOOR: Real = 10.0;
/// Largest |ζ| for which the power series is used.
pub const SERIES_RADIUS: Real = 50.0;
/// Relative stopping threshold for all power series.
pub const SERIES_TOL: Real = 1e-16;
pub const SERIES_CAP: usize = 200;

type Dd = Complex<TwoFloat>;

/// A nonzero point of the closed upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter(Cplx);

impl SpectralParameter {
    pub fn new(zeta: Cplx) -> Result<Self> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return invalid("spectral parameter must be finite");
        }
        if zeta.im < 0.0 {
            return Err(Error::Domain(format!("Im ζ < 0 is outside the closed upper half-plane: {zeta}")));
        }
        if zeta == Cplx::new(0.0, 0.0) {
            return Err(Error::Domain("ζ = 0 is excluded".into()));
        }
        Ok(Self(zeta))
    }

    pub fn value(self) -> Cplx {
        self.0
    }
}

/// Order ν encoded as the integer 2ν.
fn twice_order(nu: Real) -> Result<i64> {
    let t = 2.0 * nu;
    if !t.is_finite() || (t - t.round()).abs() > 1e-12 {
        return invalid(format!("order {nu} is not an integer or half-integer"));
    }
    Ok(t.round() as i64)
}

fn lift(z: Cplx) -> Dd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

fn lower(z: Dd) -> Cplx {
    Cplx::new(f64::from(z.re), f64::from(z.im))
}

/// ψ(k) = −γ + Σ_{m<k} 1/m.
pub fn digamma_int(k: i64) -> Result<Real> {
    if k <= 0 {
        return invalid(format!("digamma_int needs k >= 1, got {k}"));
    }
    Ok(-EULER_GAMMA + (1..k).map(|m| 1.0 / m as Real).sum::<Real>())
}

/// Bessel function of the first kind J_ν(ζ).
pub fn bessel_j(nu: Real, zeta: Cplx) -> Result<Cplx> {
    let two_nu = twice_order(nu)?;
    if zeta.im.abs() > 700.0 {
        return Err(Error::Overflow(format!("J_ν overflows for Im ζ = {}", zeta.im)));
    }
    if zeta == Cplx::new(0.0, 0.0) {
        return match two_nu {
            0 => Ok(Cplx::new(1.0, 0.0)),
            t if t > 0 => Ok(Cplx::new(0.0, 0.0)),
            _ => Err(Error::Domain("J_ν(0) is singular for ν < 0".into())),
        };
    }
    if two_nu < 0 && two_nu % 2 == 0 {
        let n = (-two_nu / 2) as i32;
        let j = bessel_j(-nu, zeta)?;
        return Ok(if n % 2 == 0 { j } else { -j });
    }
    if zeta.norm() > SERIES_RADIUS {
        if zeta.im < 0.0 {
            return Err(Error::Domain("asymptotic J_ν needs Im ζ >= 0".into()));
        }
        let (h1, _) = asymptotic_sum(nu, zeta, 1.0, None);
        let (h2, _) = asymptotic_sum(nu, zeta, -1.0, None);
        return Ok((h1 + h2) * 0.5);
    }
    Ok(lower(series::bessel_j(two_nu, lift(zeta))))
}

/// Bessel function of the second kind Y_n(ζ) for integer n ≥ 0.
pub fn bessel_y(n: u32, zeta: Cplx) -> Result<Cplx> {
    let z = SpectralParameter::new(zeta)?.value();
    if z.norm() > SERIES_RADIUS {
        let h = hankel1(n as Real, z)?;
        let j = bessel_j(n as Real, z)?;
        return Ok((h - j) * Cplx::new(0.0, -1.0));
    }
    let (_, y) = series::bessel_jy_int(n, lift(z), z.ln() - std::f64::consts::LN_2);
    Ok(lower(y))
}

/// H⁽¹⁾_ν(ζ) through the power series only (J + iY for integer ν, the
/// J_ν/J_{−ν} combination for half-integer ν).
pub fn hankel1_series(nu: Real, zeta: Cplx) -> Result<Cplx> {
    let z = SpectralParameter::new(zeta)?.value();
    if z.norm() > SERIES_RADIUS {
        return Err(Error::Domain(format!("|ζ| = {} beyond series radius", z.norm())));
    }
    let two_nu = twice_order(nu)?;
    if two_nu < 0 {
        return Ok(reflection(nu) * hankel1_series(-nu, z)?);
    }
    if z.norm() < F64_RADIUS {
        return Ok(series_route(two_nu, z, z));
    }
    Ok(lower(series_route(two_nu, lift(z), z)))
}

/// Below this radius the plain f64 series loses less than two digits.
const F64_RADIUS: Real = 4.0;

fn series_route<T: num_traits::Float + num_traits::FloatConst>(
    two_nu: i64,
    zd: Complex<T>,
    z: Cplx,
) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    if two_nu % 2 == 0 {
        let (j, y) = series::bessel_jy_int((two_nu / 2) as u32, zd, z.ln() - std::f64::consts::LN_2);
        j + y * i
    } else {
        // H_{j+1/2} = J_{j+1/2} − i(−1)^j J_{−j−1/2}
        let jp = series::bessel_j(two_nu, zd);
        let jm = series::bessel_j(-two_nu, zd);
        if (two_nu / 2) % 2 == 0 {
            jp - jm * i
        } else {
            jp + jm * i
        }
    }
}

/// Finite closed form of H⁽¹⁾_{j+1/2}.
pub fn hankel1_half_closed(nu: Real, zeta: Cplx) -> Result<Cplx> {
    let z = SpectralParameter::new(zeta)?.value();
    let two_nu = twice_order(nu)?;
    if two_nu % 2 == 0 {
        return invalid(format!("order {nu} is not a half-integer"));
    }
    if two_nu < 0 {
        return Ok(reflection(nu) * hankel1_half_closed(-nu, z)?);
    }
    let j = ((two_nu - 1) / 2) as i32;
    let mut sum = Cplx::new(0.0, 0.0);
    let inv = Cplx::new(0.0, -2.0) * z;
    let mut coef = 1.0;
    let mut pow = Cplx::new(1.0, 0.0);
    for k in 0..=j {
        if k > 0 {
            // (j+k)!/(k!(j−k)!) from its predecessor
            coef *= ((j + k) * (j - k + 1)) as Real / k as Real;
            pow /= inv;
        }
        sum += pow * coef;
    }
    let phase = Cplx::new(0.0, 1.0).powi(-(j + 1));
    let h = phase / z * (Cplx::new(0.0, 1.0) * z).exp() * sum;
    Ok(sqrt_principal(z * (2.0 / std::f64::consts::PI)) * h)
}

/// e^{iνπ}, so that H⁽¹⁾_{−ν} = e^{iνπ}H⁽¹⁾_ν.
fn reflection(nu: Real) -> Cplx {
    let a = nu.abs() * std::f64::consts::PI;
    Cplx::new(a.cos(), a.sin())
}

/// Partial sum of the large-argument expansion with p terms. `kind = 1.0`
/// gives H⁽¹⁾, `kind = −1.0` gives H⁽²⁾. With `p = None` terms are added
/// until they stop decreasing or drop below the series tolerance.
fn asymptotic_sum(nu: Real, z: Cplx, kind: Real, p: Option<usize>) -> (Cplx, Real) {
    let i = Cplx::new(0.0, kind);
    let phase = i * (z - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4);
    let pref = sqrt_principal(2.0 / (std::f64::consts::PI * z)) * phase.exp();
    let d = i * z * 2.0;
    let mut term = Cplx::new(1.0, 0.0);
    let mut sum = Cplx::new(0.0, 0.0);
    let limit = p.unwrap_or(SERIES_CAP);
    let mut m = 0usize;
    loop {
        if m >= limit {
            break;
        }
        sum += term;
        let mf = m as Real;
        let next = term * ((0.5 - nu + mf) * (0.5 + nu + mf) / (mf + 1.0)) / d;
        m += 1;
        if p.is_none() && (next.norm() < SERIES_TOL * sum.norm() || next.norm() > term.norm()) {
            term = next;
            break;
        }
        term = next;
    }
    (pref * sum, pref.norm() * term.norm())
}

/// Large-argument expansion of H⁽¹⁾_ν with p terms and the size of the first
/// omitted term as remainder proxy.
pub fn hankel1_asymptotic(nu: Real, zeta: Cplx, p: usize) -> Result<(Cplx, Real)> {
    let z = SpectralParameter::new(zeta)?.value();
    twice_order(nu)?;
    if p == 0 {
        return invalid("asymptotic expansion needs p >= 1");
    }
    if z.norm() < ASYMPTOTIC_FLOOR {
        return Err(Error::Domain(format!(
            "|ζ| = {} below asymptotic floor {ASYMPTOTIC_FLOOR}",
            z.norm()
        )));
    }
    Ok(asymptotic_sum(nu, z, 1.0, Some(p)))
}

/// H⁽¹⁾_ν(ζ) on the closed upper half-plane.
pub fn hankel1(nu: Real, zeta: Cplx) -> Result<Cplx> {
    let z = SpectralParameter::new(zeta)?.value();
    let two_nu = twice_order(nu)?;
    if two_nu % 2 != 0 {
        return hankel1_half_closed(nu, z);
    }
    if two_nu < 0 {
        return Ok(reflection(nu) * hankel1(-nu, z)?);
    }
    if z.norm() >= SWITCHOVER {
        return Ok(asymptotic_sum(nu, z, 1.0, None).0);
    }
    hankel1_series(nu, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: Real, im: Real) -> Cplx {
        Cplx::new(re, im)
    }

    fn rel(a: Cplx, b: Cplx) -> Real {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn digamma_values() {
        assert!((digamma_int(1).unwrap() + 0.5772156649015329).abs() < 1e-15);
        assert!((digamma_int(2).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-15);
        assert!((digamma_int(4).unwrap() - digamma_int(3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(digamma_int(0).is_err());
    }

    #[test]
    fn j_small_and_half() {
        assert!((bessel_j(0.0, c(1e-12, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(rel(bessel_j(0.5, c(PI / 2.0, 0.0)).unwrap(), c(2.0 / PI, 0.0)) < 1e-14);
        // J₁(1) reference value
        assert!(rel(bessel_j(1.0, c(1.0, 0.0)).unwrap(), c(0.44005058574493352, 0.0)) < 1e-14);
    }

    #[test]
    fn j_reference_values() {
        // J₀(40), Y₀(40) from an arbitrary-precision reference
        assert!(rel(bessel_j(0.0, c(40.0, 0.0)).unwrap(), c(0.0073668905842372896, 0.0)) < 1e-11);
        assert!(rel(bessel_y(0, c(40.0, 0.0)).unwrap(), c(0.12593641705826093, 0.0)) < 1e-11);
    }

    #[test]
    fn half_integer_examples() {
        assert!(rel(hankel1(0.5, c(PI / 2.0, 0.0)).unwrap(), c(2.0 / PI, 0.0)) < 1e-14);
        let want = -(2.0 / PI).sqrt() * c(0.0, 1.0).exp() * c(1.0, 1.0);
        assert!(rel(hankel1(1.5, c(1.0, 0.0)).unwrap(), want) < 1e-14);
    }

    #[test]
    fn h0_small_argument() {
        // H₀(ζ) − (2i/π)ln ζ tends to the constant 1 + (2i/π)(γ − ln 2)
        let c0 = c(1.0, 0.0) + c(0.0, 2.0 / PI) * (EULER_GAMMA - std::f64::consts::LN_2);
        for z in [c(1e-3, 1e-3), c(1e-5, 0.0), c(0.0, 1e-7)] {
            let h = hankel1(0.0, z).unwrap();
            let lead = c(0.0, 2.0 / PI) * z.ln();
            assert!((h - lead - c0).norm() <= 2.0 * z.norm_sqr() * z.norm().ln().abs());
        }
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(hankel1(0.0, c(0.0, 0.0)).is_err());
        assert!(hankel1(0.0, c(1.0, -0.1)).is_err());
        assert!(hankel1(0.3, c(1.0, 0.0)).is_err());
        assert!(hankel1_asymptotic(0.0, c(5.0, 0.0), 3).is_err());
    }

    #[test]
    fn asymptotic_terminates_for_half() {
        let z = c(12.0, 3.0);
        let (v, r) = hankel1_asymptotic(0.5, z, 1).unwrap();
        assert_eq!(r, 0.0);
        assert!(rel(v, hankel1_half_closed(0.5, z).unwrap()) < 1e-14);
    }

    #[test]
    fn remainder_decreases() {
        let z = c(30.0, 5.0);
        let mut last = Real::INFINITY;
        for p in 1..=6 {
            let (_, r) = hankel1_asymptotic(1.0, z, p).unwrap();
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn overlap_nu0_at_40() {
        let z = c(40.0, 0.0);
        let (a, _) = hankel1_asymptotic(0.0, z, 20).unwrap();
        assert!(rel(a, hankel1_series(0.0, z).unwrap()) < 1e-6);
    }

    #[test]
    fn reflection_identity() {
        let z = c(3.0, 1.0);
        for nu in [1.0, 2.0, 0.5, 1.5] {
            let lhs = hankel1(-nu, z).unwrap();
            let rhs = reflection(nu) * hankel1(nu, z).unwrap();
            assert!(rel(lhs, rhs) < 1e-12);
        }
        // integer order: H_{−n} = (−1)^n H_n
        let h2 = hankel1(2.0, z).unwrap();
        assert!(rel(hankel1(-2.0, z).unwrap(), h2) < 1e-12);
        let h1 = hankel1(1.0, z).unwrap();
        assert!(rel(hankel1(-1.0, z).unwrap(), -h1) < 1e-12);
    }

    #[test]
    fn wronskian() {
        for z in [c(0.3, 0.1), c(2.0, 0.0), c(7.0, 3.0), c(15.0, 1.0)] {
            for n in 0..4u32 {
                let j0 = bessel_j(n as Real, z).unwrap();
                let j1 = bessel_j(n as Real + 1.0, z).unwrap();
                let y0 = bessel_y(n, z).unwrap();
                let y1 = bessel_y(n + 1, z).unwrap();
                let w = j1 * y0 - j0 * y1;
                assert!(rel(w, 2.0 / (PI * z)) < 1e-10, "n={n} z={z}");
            }
        }
    }
}
