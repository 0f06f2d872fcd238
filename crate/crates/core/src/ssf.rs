//! Spectral shift functions for Hermitian matrix pairs and the resolvent
//! regularized Witten index.
//!
//! Boundary values are computed in two phases: principal arguments of the
//! perturbation determinant are evaluated at every grid point independently
//! (in parallel), then a sequential sweep over the sorted grid unwraps the
//! phase starting from an anchor left of the spectrum, bisecting any step
//! whose wrapped increment exceeds π/2.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::integrate_adaptive;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::{CMat, Cplx, Real};

/// Tolerance for the Hermitian check on pair inputs.
pub const HERMITIAN_TOL: Real = 1e-13;
/// Distance below which λ counts as an eigenvalue collision.
pub const COLLISION_TOL: Real = 1e-12;
/// Grid points closer than this to an eigenvalue are flagged.
pub const PROXIMITY: Real = 0.05;
/// Default ε schedule for boundary values.
pub const DEFAULT_EPS: [Real; 3] = [1e-2, 5e-3, 2.5e-3];

const MAX_BISECT: u32 = 30;

/// Hermitian pair (S0, V) with S = S0 + V.
#[derive(Debug, Clone)]
pub struct MatrixPair {
    pub s0: CMat,
    pub v: CMat,
}

impl MatrixPair {
    pub fn new(s0: CMat, v: CMat) -> Result<Self> {
        if !s0.is_square() {
            return invalid("S0 must be square");
        }
        if v.shape() != s0.shape() {
            return Err(Error::DimensionMismatch { expected: s0.nrows(), got: v.nrows() });
        }
        for (name, m) in [("S0", &s0), ("V", &v)] {
            if linalg::hermiticity_residual(m) > HERMITIAN_TOL * (1.0 + linalg::fro_norm(m)) {
                return invalid(format!("{name} is not Hermitian"));
            }
        }
        Ok(Self { s0, v })
    }

    /// Random pair with GUE-like S0 and V of the given entry scales.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, s0_scale: Real, v_scale: Real) -> Self {
        Self {
            s0: linalg::random_hermitian(rng, d, s0_scale),
            v: linalg::random_hermitian(rng, d, v_scale),
        }
    }

    pub fn dim(&self) -> usize {
        self.s0.nrows()
    }

    pub fn s(&self) -> CMat {
        &self.s0 + &self.v
    }

    pub fn eig_s0(&self) -> Vec<Real> {
        linalg::hermitian_eigenvalues(&self.s0)
    }

    pub fn eig_s(&self) -> Vec<Real> {
        linalg::hermitian_eigenvalues(&self.s())
    }

    /// Bound on the spectra of S0 and S.
    pub fn spectral_bound(&self) -> Real {
        linalg::fro_norm(&self.s0) + linalg::fro_norm(&self.v)
    }

    /// R0(z) = (S0 − z)⁻¹.
    pub fn resolvent0(&self, z: Cplx) -> Result<CMat> {
        linalg::inverse(&shift(&self.s0, z))
    }

    /// R(z) = (S − z)⁻¹.
    pub fn resolvent(&self, z: Cplx) -> Result<CMat> {
        linalg::inverse(&shift(&self.s(), z))
    }

    /// B(z) = V (S0 − z)⁻¹.
    pub fn b(&self, z: Cplx) -> Result<CMat> {
        Ok(&self.v * self.resolvent0(z)?)
    }
}

/// JSON form of a pair: matrices as rows of `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFile {
    pub s0: Vec<Vec<[Real; 2]>>,
    pub v: Vec<Vec<[Real; 2]>>,
}

impl PairFile {
    pub fn from_pair(pair: &MatrixPair) -> Self {
        Self {
            s0: crate::clifford::matrix_to_pairs(&pair.s0),
            v: crate::clifford::matrix_to_pairs(&pair.v),
        }
    }

    pub fn to_pair(&self) -> Result<MatrixPair> {
        MatrixPair::new(rows_to_matrix(&self.s0)?, rows_to_matrix(&self.v)?)
    }
}

fn rows_to_matrix(rows: &[Vec<[Real; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return invalid("matrix rows must form a square array");
    }
    Ok(CMat::from_fn(n, n, |i, j| Cplx::new(rows[i][j][0], rows[i][j][1])))
}

fn shift(a: &CMat, z: Cplx) -> CMat {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= z;
    }
    m
}

fn reject_real(z: Cplx) -> Result<()> {
    if z.im == 0.0 {
        return Err(Error::Domain("z must lie off the real axis".into()));
    }
    Ok(())
}

fn count_le(eigs: &[Real], lambda: Real) -> Result<i64> {
    if eigs.iter().any(|e| (e - lambda).abs() < COLLISION_TOL) {
        return Err(Error::Domain(format!("eigenvalue collision at λ = {lambda}")));
    }
    Ok(eigs.iter().filter(|&&e| e <= lambda).count() as i64)
}

/// ξ(λ) = #{eig S0 ≤ λ} − #{eig S ≤ λ}.
pub fn ssf_count_oracle(pair: &MatrixPair, lambda: Real) -> Result<i64> {
    Ok(count_le(&pair.eig_s0(), lambda)? - count_le(&pair.eig_s(), lambda)?)
}

/// Piecewise-constant ξ as sorted breakpoints and the values between them.
#[derive(Debug, Clone)]
pub struct StepSsf {
    pub breaks: Vec<Real>,
    pub values: Vec<i64>,
}

impl StepSsf {
    pub fn from_pair(pair: &MatrixPair) -> Self {
        let e0 = pair.eig_s0();
        let e1 = pair.eig_s();
        let mut breaks: Vec<Real> = e0.iter().chain(&e1).copied().collect();
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();
        let values = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let c0 = e0.iter().filter(|&&e| e <= mid).count() as i64;
                let c1 = e1.iter().filter(|&&e| e <= mid).count() as i64;
                c0 - c1
            })
            .collect();
        Self { breaks, values }
    }

    /// Σ over pieces of ξ·∫ f on that piece (adaptive quadrature).
    pub fn integrate<F: Fn(Real) -> Cplx>(&self, f: &F, tol: Real) -> Cplx {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .filter(|(_, &v)| v != 0)
            .map(|(w, &v)| integrate_adaptive(f, w[0], w[1], tol) * v as Real)
            .sum()
    }
}

/// F(z) = ln det_{m+1}(I + B(z)) on the principal branch of each eigenvalue
/// factor; the continuous branch is fixed by the caller's path.
pub fn perturbation_logdet(m: usize, z: Cplx, pair: &MatrixPair) -> Result<Cplx> {
    reject_real(z)?;
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let mu = linalg::eigenvalues(&pair.b(z)?)?;
    Ok(mu.iter().map(|&u| (Cplx::new(1.0, 0.0) + u).ln() + log_tail(u, m)).sum())
}

fn log_tail(u: Cplx, m: usize) -> Cplx {
    let mut s = Cplx::new(0.0, 0.0);
    let mut p = Cplx::new(1.0, 0.0);
    for k in 1..=m {
        p *= -u;
        s += p / k as Real;
    }
    s
}

/// G_m(z) = Σ_{j=1}^m (−1)^j tr(B^j)/j.
pub fn g_correction(m: usize, z: Cplx, pair: &MatrixPair) -> Result<Cplx> {
    reject_real(z)?;
    let b = pair.b(z)?;
    Ok(g_from_b(m, &b))
}

fn g_from_b(m: usize, b: &CMat) -> Cplx {
    let mut p = CMat::identity(b.nrows(), b.ncols());
    let mut s = Cplx::new(0.0, 0.0);
    for j in 1..=m {
        p = &p * b;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += linalg::trace(&p) * (sign / j as Real);
    }
    s
}

/// ln det₁(I + B(z)) with the principal argument.
pub fn logdet1(z: Cplx, pair: &MatrixPair) -> Result<Cplx> {
    reject_real(z)?;
    let d = pair.dim();
    let det = (CMat::identity(d, d) + pair.b(z)?).lu().determinant();
    if det == Cplx::new(0.0, 0.0) {
        return Err(Error::Singular("I + B(z) is singular".into()));
    }
    Ok(det.ln())
}

/// Letter of an operator word: V or a resolvent power R0^p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Factor {
    V,
    R(u32),
}

/// Rational combination of operator words.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorWord {
    pub terms: BTreeMap<Vec<Factor>, BigRational>,
}

impl OperatorWord {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: BigRational, factors: Vec<Factor>) -> Self {
        let mut w = Self::zero();
        w.add_term(factors, coeff);
        w
    }

    pub fn add_term(&mut self, factors: Vec<Factor>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(factors.clone()).or_insert_with(BigRational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&factors);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// d/dz with V constant and d/dz R0^p = p·R0^{p+1}.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (word, c) in &self.terms {
            for (i, f) in word.iter().enumerate() {
                if let Factor::R(p) = *f {
                    let mut w = word.clone();
                    w[i] = Factor::R(p + 1);
                    out.add_term(w, c * BigRational::from_integer(BigInt::from(p)));
                }
            }
        }
        out
    }

    fn max_power(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|w| w.iter())
            .filter_map(|f| if let Factor::R(p) = f { Some(*p) } else { None })
            .max()
            .unwrap_or(0)
    }

    /// Σ c·tr(word) evaluated at z.
    pub fn trace(&self, pair: &MatrixPair, z: Cplx) -> Result<Cplx> {
        reject_real(z)?;
        let d = pair.dim();
        let r0 = pair.resolvent0(z)?;
        let mut powers = vec![CMat::identity(d, d)];
        for p in 1..=self.max_power() as usize {
            let next = &powers[p - 1] * &r0;
            powers.push(next);
        }
        let mut total = Cplx::new(0.0, 0.0);
        for (word, c) in &self.terms {
            let mut acc = CMat::identity(d, d);
            for f in word {
                acc = match f {
                    Factor::V => acc * &pair.v,
                    Factor::R(p) => acc * &powers[*p as usize],
                };
            }
            total += linalg::trace(&acc) * c.to_f64().unwrap_or(Real::NAN);
        }
        Ok(total)
    }
}

/// Σ_{j=0}^{m−1} (−1)^{m−j} R0 B^{m−j} as words, with B = V R0.
pub fn g_deriv_seed(m: usize) -> OperatorWord {
    let mut out = OperatorWord::zero();
    for i in 1..=m {
        let mut word = vec![Factor::R(1)];
        for _ in 0..i {
            word.push(Factor::V);
            word.push(Factor::R(1));
        }
        let sign = if i % 2 == 0 { 1 } else { -1 };
        out.add_term(word, BigRational::from_integer(BigInt::from(sign)));
    }
    out
}

/// (m−1)-th derivative of the seed words.
pub fn g_deriv_words(m: usize) -> OperatorWord {
    let mut w = g_deriv_seed(m);
    for _ in 1..m {
        w = w.derivative();
    }
    w
}

/// d^m G/dz^m via symbolic differentiation of resolvent words.
pub fn g_deriv_symbolic(m: usize, z: Cplx, pair: &MatrixPair) -> Result<Cplx> {
    if m == 0 {
        return invalid("m must be at least 1");
    }
    reject_real(z)?;
    g_deriv_words(m).trace(pair, z)
}

/// dF/dz = (−1)^m tr((S − z)⁻¹ B^{m+1}).
pub fn logdet_derivative(m: usize, z: Cplx, pair: &MatrixPair) -> Result<Cplx> {
    reject_real(z)?;
    let b = pair.b(z)?;
    let mut acc = pair.resolvent(z)?;
    for _ in 0..=m {
        acc = &acc * &b;
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(linalg::trace(&acc) * sign)
}

/// m-th derivative of an analytic function by the trapezoid rule on a
/// circle of radius `r` around z.
pub fn contour_derivative<F: Fn(Cplx) -> Result<Cplx>>(f: F, z: Cplx, m: usize, r: Real, points: usize) -> Result<Cplx> {
    let mut s = Cplx::new(0.0, 0.0);
    for j in 0..points {
        let w = Cplx::from_polar(1.0, 2.0 * PI * j as Real / points as Real);
        s += f(z + w * r)? / w.powi(m as i32);
    }
    let fact: Real = (1..=m).map(|k| k as Real).product();
    Ok(s * (fact / (points as Real * r.powi(m as i32))))
}

/// Boundary-value extraction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SsfMethod {
    Counting,
    KreinBoundary,
    EqMain { m: usize },
}

/// Sampled spectral shift function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SSFTable {
    pub lambda: Vec<Real>,
    pub xi: Vec<Option<Real>>,
    pub method: SsfMethod,
    pub eps: Vec<Real>,
    pub flags: Vec<bool>,
    /// Unwrapped argument at the smallest ε, per grid point.
    #[serde(default)]
    pub branch: Vec<Option<Real>>,
}

impl SSFTable {
    /// Safe grid values rounded to integers.
    pub fn rounded(&self) -> Vec<Option<i64>> {
        self.xi.iter().map(|x| x.map(|v| v.round() as i64)).collect()
    }

    /// Largest distance of a safe value from the nearest integer.
    pub fn integrality_defect(&self) -> Real {
        self.xi.iter().flatten().map(|v| (v - v.round()).abs()).fold(0.0, Real::max)
    }
}

fn check_grid(lambdas: &[Real]) -> Result<()> {
    if lambdas.is_empty() {
        return invalid("empty λ grid");
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas.iter().any(|l| !l.is_finite()) {
        return invalid("λ grid must be finite and strictly increasing");
    }
    Ok(())
}

fn proximity_flags(pair: &MatrixPair, lambdas: &[Real]) -> Vec<bool> {
    let eigs: Vec<Real> = pair.eig_s0().into_iter().chain(pair.eig_s()).collect();
    lambdas.iter().map(|l| eigs.iter().any(|e| (e - l).abs() < PROXIMITY)).collect()
}

/// Counting-oracle table; flagged points carry no value.
pub fn ssf_counting_table(pair: &MatrixPair, lambdas: &[Real]) -> Result<SSFTable> {
    check_grid(lambdas)?;
    let flags = proximity_flags(pair, lambdas);
    let xi = lambdas
        .iter()
        .zip(&flags)
        .map(|(&l, &f)| if f { Ok(None) } else { ssf_count_oracle(pair, l).map(|v| Some(v as Real)) })
        .collect::<Result<Vec<_>>>()?;
    Ok(SSFTable {
        lambda: lambdas.to_vec(),
        branch: xi.iter().map(|x| x.map(|v| v * PI)).collect(),
        xi,
        method: SsfMethod::Counting,
        eps: Vec::new(),
        flags,
    })
}

fn wrap(x: Real) -> Real {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Principal Im ln of the boundary determinant at λ + iε.
fn principal_phase(pair: &MatrixPair, method: SsfMethod, lambda: Real, eps: Real) -> Result<Real> {
    let z = Cplx::new(lambda, eps);
    match method {
        SsfMethod::KreinBoundary => Ok(logdet1(z, pair)?.im),
        SsfMethod::EqMain { m } => {
            let b = pair.b(z)?;
            let mu = linalg::eigenvalues(&b)?;
            let f: Cplx = mu.iter().map(|&u| (Cplx::new(1.0, 0.0) + u).ln() + log_tail(u, m)).sum();
            Ok(wrap((f - g_from_b(m, &b)).im))
        }
        SsfMethod::Counting => invalid("counting has no boundary phase"),
    }
}

fn unwrap_step(
    phase: &dyn Fn(Real) -> Result<Real>,
    a: Real,
    pa: Real,
    b: Real,
    pb: Real,
    depth: u32,
) -> Result<Real> {
    let step = wrap(pb - pa);
    if step.abs() <= FRAC_PI_2 || depth == 0 {
        return Ok(step);
    }
    let mid = 0.5 * (a + b);
    let pm = phase(mid)?;
    Ok(unwrap_step(phase, a, pa, mid, pm, depth - 1)? + unwrap_step(phase, mid, pm, b, pb, depth - 1)?)
}

/// Least-squares intercept of f(ε) = L + Σ c_k ε^{p_k}.
pub fn richardson(eps: &[Real], values: &[Real], powers: &[i32]) -> Result<Real> {
    if eps.len() != values.len() || eps.is_empty() {
        return invalid("ε and value lists must be non-empty and equal length");
    }
    let cols = 1 + powers.len().min(eps.len() - 1);
    let a = DMatrix::from_fn(eps.len(), cols, |i, j| if j == 0 { 1.0 } else { eps[i].powi(powers[j - 1]) });
    let rhs = nalgebra::DVector::from_column_slice(values);
    let sol = a.svd(true, true).solve(&rhs, 1e-300).map_err(|e| Error::Singular(e.to_string()))?;
    Ok(sol[0])
}

/// ξ on a grid from boundary values of the perturbation determinant.
pub fn ssf_boundary(pair: &MatrixPair, lambdas: &[Real], eps_schedule: &[Real], method: SsfMethod) -> Result<SSFTable> {
    check_grid(lambdas)?;
    if matches!(method, SsfMethod::Counting) {
        return ssf_counting_table(pair, lambdas);
    }
    if let SsfMethod::EqMain { m: 0 } = method {
        return invalid("m must be at least 1");
    }
    if eps_schedule.is_empty() || eps_schedule.iter().any(|&e| e <= 0.0) {
        return invalid("ε schedule must be non-empty and positive");
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("ε schedule must be decreasing");
    }
    let anchor = (-pair.spectral_bound() - 1.0).min(lambdas[0] - 1.0);
    let mut points = Vec::with_capacity(lambdas.len() + 1);
    points.push(anchor);
    points.extend_from_slice(lambdas);

    let mut unwrapped = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let principal = points
            .par_iter()
            .map(|&l| principal_phase(pair, method, l, eps))
            .collect::<Result<Vec<_>>>()?;
        let phase = |l: Real| principal_phase(pair, method, l, eps);
        let mut acc = principal[0];
        let mut track = Vec::with_capacity(lambdas.len());
        for i in 1..points.len() {
            acc += unwrap_step(&phase, points[i - 1], principal[i - 1], points[i], principal[i], MAX_BISECT)?;
            track.push(acc);
        }
        unwrapped.push(track);
    }

    let powers: Vec<i32> = (0..eps_schedule.len()).map(|k| 2 * k as i32 + 1).collect();
    let flags = proximity_flags(pair, lambdas);
    let mut xi = Vec::with_capacity(lambdas.len());
    for (i, &flag) in flags.iter().enumerate() {
        let vals: Vec<Real> = unwrapped.iter().map(|t| t[i] / PI).collect();
        let extrapolated = richardson(eps_schedule, &vals, &powers)?;
        xi.push(if flag { None } else { Some(extrapolated) });
    }
    Ok(SSFTable {
        lambda: lambdas.to_vec(),
        xi,
        method,
        eps: eps_schedule.to_vec(),
        flags,
        branch: unwrapped.last().map(|t| t.iter().copied().map(Some).collect()).unwrap_or_default(),
    })
}

/// |tr((S−z)^{−m} − (S0−z)^{−m}) + m∫ξ(λ)(λ−z)^{−m−1}dλ| with ξ from the
/// counting oracle.
pub fn trace_formula_residual(m: usize, pair: &MatrixPair, z: Cplx) -> Result<Real> {
    reject_real(z)?;
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let (lhs, integral) = trace_formula_sides(m, pair, z)?;
    Ok((lhs + integral * m as Real).norm())
}

/// (tr((S−z)^{−m} − (S0−z)^{−m}), ∫ξ(λ)(λ−z)^{−m−1}dλ).
pub fn trace_formula_sides(m: usize, pair: &MatrixPair, z: Cplx) -> Result<(Cplx, Cplx)> {
    reject_real(z)?;
    let pow = |r: CMat| -> CMat {
        let mut acc = r.clone();
        for _ in 1..m {
            acc = &acc * &r;
        }
        acc
    };
    let lhs = linalg::trace(&pow(pair.resolvent(z)?)) - linalg::trace(&pow(pair.resolvent0(z)?));
    let step = StepSsf::from_pair(pair);
    let f = |l: Real| (Cplx::new(l, 0.0) - z).powi(-(m as i32) - 1);
    Ok((lhs, step.integrate(&f, 1e-13)))
}

/// (tr(f(S) − f(S0)), ∫ξ f′) for a real function f with derivative df.
pub fn krein_identity<F, D>(pair: &MatrixPair, f: F, df: D) -> (Real, Real)
where
    F: Fn(Real) -> Real,
    D: Fn(Real) -> Real,
{
    let lhs: Real = pair.eig_s().iter().map(|&e| f(e)).sum::<Real>() - pair.eig_s0().iter().map(|&e| f(e)).sum::<Real>();
    let g = |l: Real| Cplx::new(df(l), 0.0);
    let rhs = StepSsf::from_pair(pair).integrate(&g, 1e-13).re;
    (lhs, rhs)
}

/// (1/π)∫_{−√λ}^{√λ} ξ(ν)(λ−ν²)^{−1/2}dν via ν = √λ sin θ.
pub fn abel_transform<F: Fn(Real) -> Real>(xi: F, lambda: Real) -> Result<Real> {
    abel_transform_split(xi, lambda, &[])
}

/// Abel transform with known discontinuities of ξ as panel breakpoints.
pub fn abel_transform_split<F: Fn(Real) -> Real>(xi: F, lambda: Real, breaks: &[Real]) -> Result<Real> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain("λ must be positive".into()));
    }
    let root = lambda.sqrt();
    let mut cuts = vec![-FRAC_PI_2];
    cuts.extend(breaks.iter().filter(|b| b.abs() < root).map(|b| (b / root).asin()));
    cuts.push(FRAC_PI_2);
    cuts.sort_by(|a, b| a.total_cmp(b));
    let g = |t: Real| Cplx::new(xi(root * t.sin()), 0.0);
    let total: Real = cuts.windows(2).map(|w| integrate_adaptive(&g, w[0], w[1], 1e-13).re).sum();
    Ok(total / PI)
}

/// Zero limit of the Abel transform along a shrinking λ schedule.
#[derive(Debug, Clone, Serialize)]
pub struct AbelLimit {
    pub lambdas: Vec<Real>,
    pub values: Vec<Real>,
    pub limit: Real,
    pub converged: bool,
}

/// λ ↓ 0 limit of the Abel transform; `converged` is false when the last
/// values still move by more than `tol`.
pub fn abel_zero_limit<F: Fn(Real) -> Real>(xi: F, tol: Real) -> Result<AbelLimit> {
    let lambdas: Vec<Real> = (4..=12).map(|k| 10f64.powi(-k)).collect();
    let values = lambdas.iter().map(|&l| abel_transform(&xi, l)).collect::<Result<Vec<_>>>()?;
    let tail = &values[values.len() - 3..];
    let spread = tail.iter().fold(Real::NEG_INFINITY, |a, &b| a.max(b)) - tail.iter().fold(Real::INFINITY, |a, &b| a.min(b));
    Ok(AbelLimit { limit: *values.last().unwrap(), converged: spread <= tol, lambdas, values })
}

/// Scaled trace differences and the extrapolated Witten index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WittenResult {
    pub k: u32,
    pub lambda_schedule: Vec<Real>,
    pub scaled_traces: Vec<Real>,
    pub extrapolated: Real,
}

impl WittenResult {
    pub fn variance(&self) -> Real {
        let n = self.scaled_traces.len() as Real;
        let mean = self.scaled_traces.iter().sum::<Real>() / n;
        self.scaled_traces.iter().map(|t| (t - mean).powi(2)).sum::<Real>() / n
    }
}

/// Default λ schedule −10^{−1} … −10^{−6}.
pub fn default_witten_schedule() -> Vec<Real> {
    (1..=6).map(|j| -(10f64.powi(-j))).collect()
}

/// (−λ)^k tr((T*T − λ)^{−k} − (TT* − λ)^{−k}) on the schedule, extrapolated
/// to λ = 0 by a least-squares line.
pub fn witten_index(t: &CMat, k: u32, schedule: &[Real]) -> Result<WittenResult> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if schedule.is_empty() || schedule.iter().any(|&l| !(l < 0.0)) {
        return invalid("λ schedule must consist of negative reals");
    }
    let gram = |g: CMat| -> Vec<Real> {
        let e = linalg::hermitian_eigenvalues(&g);
        let cut = e.iter().fold(0.0, |m: Real, x| m.max(x.abs())) * g.nrows().max(1) as Real * Real::EPSILON;
        e.into_iter().map(|x| if x.abs() <= cut { 0.0 } else { x }).collect()
    };
    let a = gram(t.adjoint() * t);
    let b = gram(t * t.adjoint());
    let scaled = |l: Real| -> Real {
        let term = |mu: Real| ((-l) / (mu - l)).powi(k as i32);
        a.iter().map(|&m| term(m)).sum::<Real>() - b.iter().map(|&m| term(m)).sum::<Real>()
    };
    let scaled_traces: Vec<Real> = schedule.iter().map(|&l| scaled(l)).collect();
    let extrapolated = if schedule.len() == 1 {
        scaled_traces[0]
    } else {
        richardson(schedule, &scaled_traces, &[1])?
    };
    Ok(WittenResult { k, lambda_schedule: schedule.to_vec(), scaled_traces, extrapolated })
}
