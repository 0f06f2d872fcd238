//! Hermitian alpha matrices satisfying the Clifford relations in any dimension.
//!
//! Generators are built by a fixed tensor recursion starting from the Pauli
//! matrices, so the same `n` always yields the same integer-valued matrices.

use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{NumAssign, One, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg;
use crate::{CMat, Cplx, Real};

/// Scalars that can carry the integer-valued generators exactly.
pub trait CliffordScalar: NumAssign + Neg<Output = Self> + Copy + Debug + 'static {}
impl<T: NumAssign + Neg<Output = T> + Copy + Debug + 'static> CliffordScalar for T {}

/// Gaussian-integer matrices used for the exact relation checks.
pub type ExactMat = DMatrix<Complex<i64>>;

fn pauli<T: CliffordScalar>() -> [DMatrix<Complex<T>>; 3] {
    let o = Complex::<T>::zero();
    let l = Complex::<T>::one();
    let i = Complex::new(T::zero(), T::one());
    [
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// Generators for even `n`: `n + 1` matrices of size `2^{n/2}`.
fn even_generators<T: CliffordScalar>(n: usize) -> Vec<DMatrix<Complex<T>>> {
    let [s1, s2, s3] = pauli::<T>();
    let mut gens = vec![s1.clone(), s2.clone(), s3.clone()];
    let mut m = 2;
    while m < n {
        let size = gens[0].nrows();
        let id = DMatrix::<Complex<T>>::identity(size, size);
        let mut next: Vec<_> = gens.iter().map(|g| s1.kronecker(g)).collect();
        next.push(s2.kronecker(&id));
        next.push(s3.kronecker(&id));
        gens = next;
        m += 2;
    }
    gens
}

/// The `n + 1` generators α₁…α_{n+1} over any exact or floating scalar.
pub fn generators<T: CliffordScalar>(n: usize) -> Result<Vec<DMatrix<Complex<T>>>> {
    if n < 2 {
        return invalid(format!("Clifford dimension must be >= 2, got {n}"));
    }
    if n % 2 == 0 {
        return Ok(even_generators(n));
    }
    let mut gens = even_generators::<T>(n + 1);
    let beta = gens.pop().unwrap();
    gens.truncate(n);
    gens.push(beta);
    Ok(gens)
}

pub fn matrix_size(n: usize) -> usize {
    1 << ((n + 1) / 2)
}

/// Result of checking αⱼα_k + α_kαⱼ = 2δⱼₖ I and αⱼ* = αⱼ exactly.
#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub n: usize,
    pub size: usize,
    pub hermitian: bool,
    pub anticommute: bool,
    pub failures: Vec<(usize, usize)>,
}

impl RelationReport {
    pub fn ok(&self) -> bool {
        self.hermitian && self.anticommute
    }
}

pub fn check_relations_exact(n: usize) -> Result<RelationReport> {
    let gens = generators::<i64>(n)?;
    let size = gens[0].nrows();
    let id = ExactMat::identity(size, size);
    let two = Complex::new(2i64, 0);
    let hermitian = gens.iter().all(|g| g.transpose().map(|x| x.conj()) == *g);
    let mut failures = Vec::new();
    for j in 0..gens.len() {
        for k in j..gens.len() {
            let ac = &gens[j] * &gens[k] + &gens[k] * &gens[j];
            let expect = if j == k { id.map(|x| x * two) } else { ExactMat::zeros(size, size) };
            if ac != expect {
                failures.push((j + 1, k + 1));
            }
        }
    }
    Ok(RelationReport { n, size, hermitian, anticommute: failures.is_empty(), failures })
}

/// Floating-point Clifford representation with the diagonalizing unitary of β.
#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub n: usize,
    pub size: usize,
    /// α₁…α_n followed by β = α_{n+1}.
    pub alphas: Vec<CMat>,
    /// Unitary with β = U diag(−I, I) U*.
    pub u: CMat,
}

impl CliffordRep {
    pub fn new(n: usize) -> Result<Self> {
        let alphas = generators::<Real>(n)?;
        Ok(Self::from_alphas(n, alphas))
    }

    fn from_alphas(n: usize, alphas: Vec<CMat>) -> Self {
        let size = alphas[0].nrows();
        let u = beta_diagonalizer(&alphas[n]);
        Self { n, size, alphas, u }
    }

    /// The representation W αⱼ W* for a unitary W.
    pub fn conjugated(&self, w: &CMat) -> Self {
        let alphas = self.alphas.iter().map(|a| w * a * w.adjoint()).collect();
        Self::from_alphas(self.n, alphas)
    }

    pub fn beta(&self) -> &CMat {
        &self.alphas[self.n]
    }

    /// α·v for a real n-vector.
    pub fn alpha_dot(&self, v: &[Real]) -> CMat {
        let mut m = CMat::zeros(self.size, self.size);
        for (a, &x) in self.alphas.iter().zip(v) {
            if x != 0.0 {
                m += a.scale(x);
            }
        }
        m
    }
}

pub fn build_clifford(n: usize) -> Result<CliffordRep> {
    CliffordRep::new(n)
}

/// Momentum symbol α·p.
pub fn dirac_symbol(rep: &CliffordRep, p: &[Real]) -> Result<CMat> {
    if p.len() != rep.n {
        return invalid(format!("momentum has length {}, expected {}", p.len(), rep.n));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return invalid("momentum must be finite");
    }
    Ok(rep.alpha_dot(p))
}

fn beta_diagonalizer(beta: &CMat) -> CMat {
    let n = beta.nrows();
    let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || beta[(i, j)] == Cplx::zero()));
    if is_diag {
        // permutation putting the −1 entries first
        let mut order: Vec<usize> = (0..n).filter(|&i| beta[(i, i)].re < 0.0).collect();
        order.extend((0..n).filter(|&i| beta[(i, i)].re > 0.0));
        let mut u = CMat::zeros(n, n);
        for (col, &row) in order.iter().enumerate() {
            u[(row, col)] = Cplx::one();
        }
        u
    } else {
        linalg::hermitian_eigen(beta).1
    }
}

/// Unit vector in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<Real>);

impl Direction {
    pub fn new(omega: Vec<Real>) -> Result<Self> {
        let norm = omega.iter().map(|x| x * x).sum::<Real>().sqrt();
        if (norm - 1.0).abs() > 1e-14 {
            return invalid(format!("direction must have unit norm, got {norm}"));
        }
        Ok(Self(omega))
    }

    pub fn normalized(v: &[Real]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<Real>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero vector");
        }
        Ok(Self(v.iter().map(|x| x / norm).collect()))
    }

    pub fn as_slice(&self) -> &[Real] {
        &self.0
    }
}

/// T̃(ω) = 2^{−1/2}(β + α·ω) U, which takes α·ω to diag(−I, I).
pub fn diagonalizer(rep: &CliffordRep, omega: &Direction) -> Result<CMat> {
    if omega.0.len() != rep.n {
        return invalid(format!("direction has length {}, expected {}", omega.0.len(), rep.n));
    }
    let t = (rep.beta() + rep.alpha_dot(&omega.0)).scale(std::f64::consts::FRAC_1_SQRT_2);
    Ok(t * &rep.u)
}

/// ‖T̃*(α·ω)T̃ − diag(−I, I)‖_max and ‖T̃T̃* − I‖_max.
pub fn diagonalizer_residuals(rep: &CliffordRep, omega: &Direction) -> Result<(Real, Real)> {
    let t = diagonalizer(rep, omega)?;
    let half = rep.size / 2;
    let target = CMat::from_fn(rep.size, rep.size, |i, j| match (i == j, i < half) {
        (true, true) => -Cplx::one(),
        (true, false) => Cplx::one(),
        _ => Cplx::zero(),
    });
    let conj = t.adjoint() * rep.alpha_dot(omega.as_slice()) * &t;
    let unit = &t * t.adjoint() - CMat::identity(rep.size, rep.size);
    Ok((linalg::max_abs(&(conj - target)), linalg::max_abs(&unit)))
}

/// Rows of N×N matrices as `[re, im]` pairs, for JSON output.
pub fn matrix_to_pairs(m: &CMat) -> Vec<Vec<[Real; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        for (n, size) in [(2, 2), (3, 4), (4, 4), (5, 8), (6, 8), (7, 16), (8, 16)] {
            let rep = build_clifford(n).unwrap();
            assert_eq!(rep.size, size);
            assert_eq!(rep.size, matrix_size(n));
            assert_eq!(rep.alphas.len(), n + 1);
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(build_clifford(1).is_err());
        assert!(build_clifford(0).is_err());
    }

    #[test]
    fn exact_relations() {
        for n in 2..=8 {
            assert!(check_relations_exact(n).unwrap().ok(), "n = {n}");
        }
    }

    #[test]
    fn pauli_start() {
        let rep = build_clifford(2).unwrap();
        let [s1, s2, s3] = pauli::<Real>();
        assert_eq!(rep.alphas, vec![s1, s2, s3]);
    }

    #[test]
    fn symbol_spectrum() {
        let rep = build_clifford(3).unwrap();
        let ev = linalg::hermitian_eigenvalues(&dirac_symbol(&rep, &[3.0, 4.0, 0.0]).unwrap());
        for (v, e) in ev.iter().zip([-5.0, -5.0, 5.0, 5.0]) {
            assert!((v - e).abs() < 1e-10);
        }
        let zero = dirac_symbol(&rep, &[0.0; 3]).unwrap();
        assert_eq!(linalg::max_abs(&zero), 0.0);
        assert!(dirac_symbol(&rep, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn two_dim_diagonalizer() {
        let rep = build_clifford(2).unwrap();
        let w = Direction::new(vec![0.0, 1.0]).unwrap();
        let (conj, unit) = diagonalizer_residuals(&rep, &w).unwrap();
        assert!(conj <= 1e-13 && unit <= 1e-13);
    }

    #[test]
    fn rejects_non_unit() {
        assert!(Direction::new(vec![1.0, 1.0]).is_err());
        let rep = build_clifford(3).unwrap();
        let w = Direction::new(vec![1.0, 0.0]).unwrap();
        assert!(diagonalizer(&rep, &w).is_err());
    }

    #[test]
    fn beta_split() {
        for n in 2..=6 {
            let rep = build_clifford(n).unwrap();
            let d = rep.u.adjoint() * rep.beta() * &rep.u;
            let h = rep.size / 2;
            for i in 0..rep.size {
                let want = if i < h { -1.0 } else { 1.0 };
                assert!((d[(i, i)].re - want).abs() < 1e-15);
            }
        }
    }
}
