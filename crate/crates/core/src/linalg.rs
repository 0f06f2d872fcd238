//! Small dense linear-algebra helpers shared by the spectral modules.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{CMat, Cplx, Real};

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues<T: RealField + Copy>(a: &DMatrix<Complex<T>>) -> Result<Vec<Complex<T>>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let eps = T::default_epsilon();
    let schur = a.clone().try_schur(eps, 0).ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Real eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMat) -> (Vec<Real>, CMat) {
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..a.nrows()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(a: &CMat) -> Vec<Real> {
    let h = (a + a.adjoint()).scale(0.5);
    let mut v: Vec<Real> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

pub fn inverse<T: RealField + Copy>(a: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    a.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("LU inverse failed".into()))
}

pub fn solve<T: RealField + Copy>(
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

pub fn identity<T: RealField + Copy>(n: usize) -> DMatrix<Complex<T>> {
    DMatrix::identity(n, n)
}

pub fn trace<T: RealField + Copy>(a: &DMatrix<Complex<T>>) -> Complex<T> {
    a.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |s, &x| s + x)
}

pub fn fro_norm<T: RealField + Copy>(a: &DMatrix<Complex<T>>) -> T {
    a.iter().fold(T::zero(), |s, x| s + x.norm_sqr()).sqrt()
}

pub fn max_abs<T: RealField + Copy>(a: &DMatrix<Complex<T>>) -> T {
    a.iter().fold(T::zero(), |m, x| {
        let v = x.modulus();
        if v > m {
            v
        } else {
            m
        }
    })
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> Real {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn hermiticity_residual(a: &CMat) -> Real {
    fro_norm(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &CMat, tol: Real) -> bool {
    a.is_square() && hermiticity_residual(a) <= tol * (1.0 + fro_norm(a))
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn spectral_radius(a: &CMat) -> Result<Real> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, Real::max))
}

/// Standard complex normal sample.
pub fn cnormal<R: Rng + ?Sized>(rng: &mut R) -> Cplx {
    let re: Real = rng.sample(StandardNormal);
    let im: Real = rng.sample(StandardNormal);
    Cplx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix rescaled to the given spectral radius.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: Real) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| cnormal(rng));
    let rho = spectral_radius(&g).unwrap_or(0.0);
    if rho > 0.0 {
        g.scale(radius / rho)
    } else {
        g
    }
}

/// Complex Ginibre matrix rescaled to the given operator norm.
pub fn ginibre_normed<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, norm: Real) -> CMat {
    let g = CMat::from_fn(rows, cols, |_, _| cnormal(rng));
    let s = op_norm(&g);
    if s > 0.0 {
        g.scale(norm / s)
    } else {
        g
    }
}

/// Random Hermitian matrix (GUE-like), entries of order `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: Real) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| cnormal(rng));
    (&g + g.adjoint()).scale(0.5 * scale)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| cnormal(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Cplx::new(1.0, 0.0)
        }
    });
    CMat::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}
