//! Free massless Dirac Green's kernel G₀(z; x, y) and its z-derivatives.
//!
//! With r = |x − y|, ζ = zr and ω̂ = (x − y)/r the kernel reads
//! G₀ = r^{1−n}[c_a ζ f_{n/2−1}(ζ) I + c_b f_{n/2}(ζ) α·ω̂], f_ν(ζ) = ζ^ν H⁽¹⁾_ν(ζ).

mod bounds;
mod odd;
mod series;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::specfun::{self, gamma_half_int};
use crate::{CMat, Cplx, Real};

pub use bounds::{kernel_bound_report, BoundFit, BoundReport};
pub use odd::{odd_dim_coeffs, OddDimCoeffs};
pub use series::LogPowerSeries;

/// Evaluation regime of a derivative kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Series,
    Asymptotic,
}

impl Regime {
    pub fn for_argument(zr: Real) -> Self {
        if zr <= 1.0 {
            Regime::Series
        } else {
            Regime::Asymptotic
        }
    }
}

/// Value of G₀ or one of its derivatives at a point pair.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub value: CMat,
    pub n: usize,
    pub size: usize,
    /// `None` marks the z → 0 limit.
    pub z: Option<Cplx>,
}

#[derive(Debug, Clone)]
pub struct DerivativeKernel {
    pub order: usize,
    pub value: CMat,
    pub regime: Regime,
}

/// c_a = i 2^{−1−n/2} π^{1−n/2}, c_b = −2^{−1−n/2} π^{1−n/2}.
fn constants(n: usize) -> (Cplx, Cplx) {
    let h = n as Real / 2.0;
    let c = 2f64.powf(-1.0 - h) * PI.powf(1.0 - h);
    (Cplx::new(0.0, c), Cplx::new(-c, 0.0))
}

pub(crate) fn separation(rep: &CliffordRep, x: &[Real], y: &[Real]) -> Result<(Vec<Real>, Real)> {
    if x.len() != rep.n || y.len() != rep.n {
        return Err(Error::DimensionMismatch { expected: rep.n, got: x.len().min(y.len()) });
    }
    let d: Vec<Real> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let r = d.iter().map(|v| v * v).sum::<Real>().sqrt();
    if r == 0.0 {
        return invalid("kernel is singular at x = y");
    }
    Ok((d, r))
}

fn check_z(z: Cplx) -> Result<()> {
    if z.im < 0.0 {
        return Err(Error::Domain(format!("Im z < 0: {z}")));
    }
    if z == Cplx::new(0.0, 0.0) {
        return invalid("z = 0: use green0_limit0");
    }
    Ok(())
}

/// f_ν(ζ) = ζ^ν H⁽¹⁾_ν(ζ) for 2ν integer.
fn f_nu(two_nu: i64, zeta: Cplx) -> Result<Cplx> {
    let nu = two_nu as Real / 2.0;
    let h = specfun::hankel1(nu, zeta)?;
    Ok((zeta.ln() * nu).exp() * h)
}

/// Scalar coefficients (a, b) with G₀ = a I + b α·ω̂.
pub fn green0_coeffs(n: usize, z: Cplx, r: Real) -> Result<(Cplx, Cplx)> {
    check_z(z)?;
    let zeta = z * r;
    let (ca, cb) = constants(n);
    let scale = r.powi(1 - n as i32);
    if n == 3 {
        // elementary closed form
        let e = (Cplx::i() * zeta).exp() / (4.0 * PI * r);
        return Ok((z * e, e * (z + Cplx::i() / r)));
    }
    let nn = n as i64;
    let fa = zeta * f_nu(nn - 2, zeta)?;
    let fb = f_nu(nn, zeta)?;
    Ok((ca * fa * scale, cb * fb * scale))
}

/// Generic Hankel route, also for n = 3.
pub fn green0_coeffs_generic(n: usize, z: Cplx, r: Real) -> Result<(Cplx, Cplx)> {
    check_z(z)?;
    let zeta = z * r;
    let (ca, cb) = constants(n);
    let scale = r.powi(1 - n as i32);
    let nn = n as i64;
    Ok((ca * zeta * f_nu(nn - 2, zeta)? * scale, cb * f_nu(nn, zeta)? * scale))
}

fn assemble(rep: &CliffordRep, d: &[Real], r: Real, a: Cplx, b: Cplx) -> CMat {
    let unit: Vec<Real> = d.iter().map(|v| v / r).collect();
    CMat::identity(rep.size, rep.size) * a + rep.alpha_dot(&unit) * b
}

/// G₀(z; x, y) for z in the closed upper half-plane, z ≠ 0.
pub fn green0(rep: &CliffordRep, z: Cplx, x: &[Real], y: &[Real]) -> Result<KernelMatrix> {
    let (d, r) = separation(rep, x, y)?;
    let (a, b) = green0_coeffs(rep.n, z, r)?;
    Ok(KernelMatrix { value: assemble(rep, &d, r, a, b), n: rep.n, size: rep.size, z: Some(z) })
}

/// Same as [`green0`] but always through the Hankel functions.
pub fn green0_generic(rep: &CliffordRep, z: Cplx, x: &[Real], y: &[Real]) -> Result<KernelMatrix> {
    let (d, r) = separation(rep, x, y)?;
    let (a, b) = green0_coeffs_generic(rep.n, z, r)?;
    Ok(KernelMatrix { value: assemble(rep, &d, r, a, b), n: rep.n, size: rep.size, z: Some(z) })
}

/// i 2^{−1} π^{−n/2} Γ(n/2).
pub fn limit0_coefficient(n: usize) -> Real {
    0.5 * PI.powf(-(n as Real) / 2.0) * gamma_half_int::<Real>(n as i64)
}

/// z → 0 limit i 2^{−1}π^{−n/2}Γ(n/2) α·(x−y)/|x−y|ⁿ.
pub fn green0_limit0(rep: &CliffordRep, x: &[Real], y: &[Real]) -> Result<KernelMatrix> {
    let (d, r) = separation(rep, x, y)?;
    let b = Cplx::new(0.0, limit0_coefficient(rep.n) * r.powi(1 - rep.n as i32));
    Ok(KernelMatrix {
        value: assemble(rep, &d, r, Cplx::new(0.0, 0.0), b),
        n: rep.n,
        size: rep.size,
        z: None,
    })
}

/// Kernel at z, with z = 0 mapped to the limit kernel.
pub fn green0_or_limit(rep: &CliffordRep, z: Cplx, x: &[Real], y: &[Real]) -> Result<CMat> {
    if z == Cplx::new(0.0, 0.0) {
        Ok(green0_limit0(rep, x, y)?.value)
    } else {
        Ok(green0(rep, z, x, y)?.value)
    }
}

/// Coefficients (a, b) at z, with `None` or z = 0 giving the limit kernel.
pub fn kernel_coeffs(n: usize, z: Option<Cplx>, r: Real) -> Result<(Cplx, Cplx)> {
    match z {
        Some(z) if z != Cplx::new(0.0, 0.0) => green0_coeffs(n, z, r),
        _ => Ok((Cplx::new(0.0, 0.0), Cplx::new(0.0, limit0_coefficient(n) * r.powi(1 - n as i32)))),
    }
}

/// a I + b α·(x − y)/r for a precomputed separation.
pub(crate) fn kernel_from_coeffs(rep: &CliffordRep, d: &[Real], r: Real, a: Cplx, b: Cplx) -> CMat {
    assemble(rep, d, r, a, b)
}

/// r-th ζ-derivative of Σ c ζ^p f_ν through f_ν′ = ζ f_{ν−1}.
fn recurrence_derivative(start: (i32, i64), order: usize, zeta: Cplx) -> Result<Cplx> {
    let mut terms: BTreeMap<(i32, i64), Real> = BTreeMap::new();
    terms.insert(start, 1.0);
    for _ in 0..order {
        let mut next = BTreeMap::new();
        for (&(p, tn), &c) in &terms {
            if p != 0 {
                *next.entry((p - 1, tn)).or_insert(0.0) += c * p as Real;
            }
            *next.entry((p + 1, tn - 2)).or_insert(0.0) += c;
        }
        terms = next;
    }
    let mut sum = Cplx::new(0.0, 0.0);
    for ((p, tn), c) in terms {
        if c != 0.0 {
            sum += f_nu(tn, zeta)? * zeta.powi(p) * c;
        }
    }
    Ok(sum)
}

/// Scalar coefficients of ∂ʳ_z G₀ in a chosen regime.
pub fn green0_deriv_coeffs(n: usize, order: usize, z: Cplx, r: Real, regime: Regime) -> Result<(Cplx, Cplx)> {
    check_z(z)?;
    let zeta = z * r;
    let (ca, cb) = constants(n);
    let scale = r.powi(1 - n as i32) * r.powi(order as i32);
    let nn = n as i64;
    let (da, db) = match regime {
        Regime::Series => {
            let sa = LogPowerSeries::kernel_a(n);
            let sb = LogPowerSeries::kernel_b(n);
            (sa.derivative_at(order, zeta), sb.derivative_at(order, zeta))
        }
        Regime::Asymptotic => (
            recurrence_derivative((1, nn - 2), order, zeta)?,
            recurrence_derivative((0, nn), order, zeta)?,
        ),
    };
    Ok((ca * da * scale, cb * db * scale))
}

/// ∂ʳ_z G₀(z; x, y), series for |z||x−y| ≤ 1 and Hankel closed forms beyond.
pub fn green0_deriv(rep: &CliffordRep, order: usize, z: Cplx, x: &[Real], y: &[Real]) -> Result<DerivativeKernel> {
    let (_, r) = separation(rep, x, y)?;
    let regime = Regime::for_argument(z.norm() * r);
    green0_deriv_in(rep, order, z, x, y, regime)
}

pub fn green0_deriv_in(
    rep: &CliffordRep,
    order: usize,
    z: Cplx,
    x: &[Real],
    y: &[Real],
    regime: Regime,
) -> Result<DerivativeKernel> {
    if order > rep.n {
        return invalid(format!("derivative order {order} exceeds n = {}", rep.n));
    }
    let (d, r) = separation(rep, x, y)?;
    let (a, b) = green0_deriv_coeffs(rep.n, order, z, r, regime)?;
    Ok(DerivativeKernel { order, value: assemble(rep, &d, r, a, b), regime })
}

/// k = (z² − m²)^{1/2} with Im k > 0.
pub fn massive_momentum(m: Real, z: Cplx) -> Result<Cplx> {
    let mut k = (z * z - m * m).sqrt();
    if k.im < 0.0 {
        k = -k;
    }
    if k.im <= 0.0 {
        return Err(Error::Domain(format!("Im (z² − m²)^{{1/2}} must be positive, z = {z}, m = {m}")));
    }
    Ok(k)
}

/// Green's kernel of the massive free operator H₀ + mβ.
pub fn green0_massive(rep: &CliffordRep, m: Real, z: Cplx, x: &[Real], y: &[Real]) -> Result<KernelMatrix> {
    if m <= 0.0 {
        return invalid("mass must be positive");
    }
    let (d, r) = separation(rep, x, y)?;
    let k = massive_momentum(m, z)?;
    let n = rep.n as i64;
    let kr = k * r;
    let c = 0.25 * (2.0 * PI).powf((2.0 - n as Real) / 2.0);
    let first = Cplx::new(0.0, c) * r.powi(2 - n as i32) * f_nu(n - 2, kr)?;
    let second = -c * r.powi(1 - n as i32) * f_nu(n, kr)?;
    let unit: Vec<Real> = d.iter().map(|v| v / r).collect();
    let id = CMat::identity(rep.size, rep.size);
    let value = (rep.beta().scale(m) + id * z) * first + rep.alpha_dot(&unit) * second;
    Ok(KernelMatrix { value, n: rep.n, size: rep.size, z: Some(z) })
}

/// Rows of kernel entries for CSV scans: x…, y…, row, col, re, im.
pub fn csv_rows(x: &[Real], y: &[Real], m: &CMat) -> Vec<String> {
    let mut rows = Vec::new();
    let pre: Vec<String> = x.iter().chain(y).map(|v| format!("{v}")).collect();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            rows.push(format!("{},{},{},{},{}", pre.join(","), i, j, m[(i, j)].re, m[(i, j)].im));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::linalg::max_abs;

    fn c(re: Real, im: Real) -> Cplx {
        Cplx::new(re, im)
    }

    #[test]
    fn three_dim_example() {
        let rep = build_clifford(3).unwrap();
        let g = green0(&rep, c(0.0, 1.0), &[1.0, 0.0, 0.0], &[0.0; 3]).unwrap();
        let id = CMat::identity(4, 4);
        let want = (id + rep.alphas[0].scale(2.0)) * c(0.0, (-1f64).exp() / (4.0 * PI));
        assert!(max_abs(&(g.value - want)) < 1e-15);
    }

    #[test]
    fn three_dim_generic_matches_closed() {
        let rep = build_clifford(3).unwrap();
        for z in [c(0.3, 0.2), c(-2.0, 0.5), c(5.0, 0.0), c(0.0, 3.0)] {
            let x = [0.4, -0.3, 1.1];
            let y = [0.1, 0.2, -0.5];
            let a = green0(&rep, z, &x, &y).unwrap().value;
            let b = green0_generic(&rep, z, &x, &y).unwrap().value;
            assert!(max_abs(&(&a - &b)) <= 1e-12 * max_abs(&a));
        }
    }

    #[test]
    fn limit_coefficients() {
        assert!((limit0_coefficient(3) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((limit0_coefficient(2) - 1.0 / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn limit_is_odd() {
        let rep = build_clifford(2).unwrap();
        let a = green0_limit0(&rep, &[1.0, 0.5], &[0.2, -0.1]).unwrap().value;
        let b = green0_limit0(&rep, &[0.2, -0.1], &[1.0, 0.5]).unwrap().value;
        assert!(max_abs(&(a + b)) < 1e-16);
    }

    #[test]
    fn two_dim_small_z() {
        let rep = build_clifford(2).unwrap();
        let lim = green0_limit0(&rep, &[1.0, 0.0], &[0.0, 0.0]).unwrap().value;
        let g = green0(&rep, c(0.0, 1e-7), &[1.0, 0.0], &[0.0, 0.0]).unwrap().value;
        assert!(max_abs(&(g - &lim)) < 1e-5);
        let want = rep.alphas[0].clone() * c(0.0, 1.0 / (2.0 * PI));
        assert!(max_abs(&(lim - want)) < 1e-16);
    }

    #[test]
    fn translation_invariance() {
        let rep = build_clifford(4).unwrap();
        let z = c(0.7, 0.4);
        let x = [0.3, 0.1, -0.2, 0.9];
        let y = [-0.5, 0.4, 0.0, 0.2];
        let s = [1.5, -2.0, 0.25, 3.0];
        let xs: Vec<Real> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
        let ys: Vec<Real> = y.iter().zip(&s).map(|(a, b)| a + b).collect();
        let a = green0(&rep, z, &x, &y).unwrap().value;
        let b = green0(&rep, z, &xs, &ys).unwrap().value;
        assert!(max_abs(&(&a - &b)) <= 1e-14 * max_abs(&a).max(1.0));
    }

    #[test]
    fn rejects_bad_input() {
        let rep = build_clifford(2).unwrap();
        assert!(green0(&rep, c(1.0, 1.0), &[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(green0(&rep, c(1.0, -1.0), &[1.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(green0_deriv(&rep, 3, c(1.0, 1.0), &[1.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(green0_massive(&rep, 1.0, c(2.0, 0.0), &[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn regimes_agree_in_band() {
        for n in 2..=5 {
            let rep = build_clifford(n).unwrap();
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            let y = vec![0.0; n];
            for zr in [0.8, 0.9, 1.0, 1.1, 1.25] {
                let z = Cplx::from_polar(zr, 0.9);
                for order in 0..=n {
                    let s = green0_deriv_in(&rep, order, z, &x, &y, Regime::Series).unwrap().value;
                    let a = green0_deriv_in(&rep, order, z, &x, &y, Regime::Asymptotic).unwrap().value;
                    assert!(max_abs(&(&s - &a)) <= 1e-10 * max_abs(&a), "n={n} r={order} zr={zr}");
                }
            }
        }
    }

    #[test]
    fn order_zero_is_kernel() {
        let rep = build_clifford(3).unwrap();
        let z = c(0.4, 0.3);
        let x = [0.5, 0.2, 0.1];
        let y = [0.0; 3];
        let g = green0(&rep, z, &x, &y).unwrap().value;
        let d = green0_deriv(&rep, 0, z, &x, &y).unwrap();
        assert_eq!(d.regime, Regime::Series);
        assert!(max_abs(&(g - d.value)) < 1e-13);
    }

    #[test]
    fn first_derivative_fd() {
        for n in [2, 3, 4] {
            let rep = build_clifford(n).unwrap();
            let mut x = vec![0.2; n];
            x[0] = 0.9;
            let y = vec![0.0; n];
            for z in [c(0.5, 0.4), c(2.0, 1.0)] {
                let h = 1e-4;
                let gp = green0(&rep, z + h, &x, &y).unwrap().value;
                let gm = green0(&rep, z - h, &x, &y).unwrap().value;
                let fd = (gp - gm) / Cplx::new(2.0 * h, 0.0);
                let d = green0_deriv(&rep, 1, z, &x, &y).unwrap().value;
                assert!(max_abs(&(fd - &d)) <= 1e-6 * max_abs(&d), "n={n} z={z}");
            }
        }
    }

    #[test]
    fn two_dim_second_derivative_pole() {
        let rep = build_clifford(2).unwrap();
        let z = c(0.0, 1e-6);
        let d = green0_deriv(&rep, 2, z, &[0.6, 0.0], &[0.0, 0.0]).unwrap().value;
        let lead = d[(0, 0)] * z;
        assert!((lead - c(-1.0 / (2.0 * PI), 0.0)).norm() < 1e-3);
    }

    #[test]
    fn massive_tends_to_massless() {
        let rep = build_clifford(3).unwrap();
        let z = c(0.8, 0.6);
        let x = [0.3, 0.4, 0.0];
        let y = [0.0; 3];
        let g = green0(&rep, z, &x, &y).unwrap().value;
        let mut last = Real::INFINITY;
        for m in [1e-2, 1e-4, 1e-6] {
            let gm = green0_massive(&rep, m, z, &x, &y).unwrap().value;
            let gap = max_abs(&(&g - &gm)) / max_abs(&g);
            assert!(gap <= m && gap < last);
            last = gap;
        }
    }

    #[test]
    fn massive_three_dim_threshold_limit() {
        let rep = build_clifford(3).unwrap();
        let m = 1.0;
        let x = [0.5, 0.0, 0.0];
        let y = [0.0; 3];
        let r: Real = 0.5;
        let id = CMat::identity(4, 4);
        let limit = (rep.beta().scale(m) + id.scale(m)) * c(0.25 * PI.powf(-1.5) * gamma_half_int::<Real>(1) / r, 0.0)
            + rep.alphas[0].clone() * c(0.0, limit0_coefficient(3) / (r * r));
        let g = green0_massive(&rep, m, c(1.0, 1e-10), &x, &y).unwrap().value;
        assert!(max_abs(&(&g - &limit)) <= 1e-4 * max_abs(&limit));
    }

    #[test]
    fn massive_two_dim_log_blowup() {
        // slope of the (β + I) block against ln(z² − m²)
        let rep = build_clifford(2).unwrap();
        let m = 1.0;
        let x = [0.7, 0.0];
        let y = [0.0, 0.0];
        let entry = |eps: Real| {
            let z = c(1.0, eps);
            let g = green0_massive(&rep, m, z, &x, &y).unwrap().value;
            (g[(0, 0)], (z * z - m * m).ln())
        };
        let (g1, l1) = entry(1e-6);
        let (g2, l2) = entry(1e-9);
        let slope = (g1 - g2) / (l1 - l2);
        // β = diag(1, −1): the (0,0) entry of m(β + I) is 2m
        assert!((slope - c(-2.0 * m / (4.0 * PI), 0.0)).norm() < 1e-3);
    }
}
