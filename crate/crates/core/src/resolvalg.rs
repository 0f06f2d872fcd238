//! Finite-dimensional resolvent algebra: Riesz projections, the
//! Jensen–Nenciu reduction, the Feshbach block inverse, Birman–Schwinger
//! resolvent identities and zero-energy classification of discretized
//! Dirac operators.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::CliffordRep;
use crate::discretize::{assemble_bs_selfadjoint, build_grid, Grid};
use crate::error::{invalid, Error, Result};
use crate::green::green0_limit0;
use crate::linalg;
use crate::potential::MatrixPotential;
use crate::{CMat, CVec, Cplx, Real};

/// Idempotency target for contour projections.
pub const IDEMPOTENCY_TOL: Real = 1e-11;
/// Default threshold for the zero-energy classification.
pub const THRESHOLD_TOL: Real = 1e-3;

const RIESZ_START: usize = 64;
const RIESZ_MAX: usize = 1 << 14;

/// Contour-integral spectral projection.
#[derive(Debug, Clone)]
pub struct RieszProjection {
    pub p: CMat,
    pub lambda0: Cplx,
    pub radius: Real,
    pub rank: usize,
    pub nodes: usize,
    pub idempotency: Real,
    pub commutator: Real,
}

/// (2πi)⁻¹∮(z − A)⁻¹dz over |z − λ₀| = radius, trapezoid rule doubled
/// until P² = P.
pub fn riesz_projection(a: &CMat, lambda0: Cplx, radius: Real) -> Result<RieszProjection> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    if !(radius > 0.0) {
        return invalid("radius must be positive");
    }
    let eigs = linalg::eigenvalues(a)?;
    let scale = 1.0 + linalg::fro_norm(a);
    let gap = 1e-8 * scale.max(radius);
    if eigs.iter().any(|e| ((e - lambda0).norm() - radius).abs() < gap) {
        return Err(Error::Domain("contour passes through an eigenvalue".into()));
    }
    let inside = eigs.iter().filter(|e| (*e - lambda0).norm() < radius).count();
    let d = a.nrows();

    let mut nodes = RIESZ_START;
    loop {
        let terms = (0..nodes)
            .into_par_iter()
            .map(|j| {
                let w = Cplx::from_polar(1.0, 2.0 * PI * j as Real / nodes as Real);
                let z = lambda0 + w * radius;
                let mut m = -a.clone();
                for i in 0..d {
                    m[(i, i)] += z;
                }
                linalg::inverse(&m).map(|r| r * (w * radius / nodes as Real))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = terms.into_iter().fold(CMat::zeros(d, d), |acc, t| acc + t);
        let idempotency = linalg::max_abs(&(&p * &p - &p));
        if idempotency <= IDEMPOTENCY_TOL || nodes >= RIESZ_MAX {
            if idempotency > IDEMPOTENCY_TOL {
                return Err(Error::Domain(format!("contour quadrature did not converge ({idempotency:e})")));
            }
            let rank = linalg::trace(&p).re.round().max(0.0) as usize;
            if rank != inside {
                return Err(Error::Domain(format!("projection rank {rank} but {inside} enclosed eigenvalues")));
            }
            let commutator = linalg::max_abs(&(&p * a - a * &p));
            return Ok(RieszProjection { p, lambda0, radius, rank, nodes, idempotency, commutator });
        }
        nodes *= 2;
    }
}

/// Orthonormal basis of the range of a projection.
fn range_basis(p: &CMat) -> CMat {
    let svd = p.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let cols: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 0.5).collect();
    CMat::from_fn(p.nrows(), cols.len(), |r, c| u[(r, cols[c])])
}

fn min_singular(m: &CMat) -> Real {
    if m.is_empty() {
        return Real::INFINITY;
    }
    m.clone().singular_values().min()
}

/// Outcome of the Jensen–Nenciu reduction.
#[derive(Debug, Clone)]
pub struct JnResult {
    /// a = P − P(A+P)⁻¹P in an orthonormal basis of ran P.
    pub a_reduced: CMat,
    pub rank: usize,
    pub invertible: bool,
    pub inverse: Option<CMat>,
    pub residual: Option<Real>,
}

/// Invert A through a = P − P(A+P)⁻¹P on ran P.
pub fn jn_invert(a: &CMat, p: &CMat, tol: Real) -> Result<JnResult> {
    if a.shape() != p.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: p.nrows() });
    }
    let d = a.nrows();
    let x = linalg::inverse(&(a + p)).map_err(|_| Error::Singular("A + P is singular".into()))?;
    let q = range_basis(p);
    let rank = q.ncols();
    let a_full = p - p * &x * p;
    let a_reduced = q.adjoint() * &a_full * &q;
    let scale = 1.0 + linalg::op_norm(&a_full);
    if rank > 0 && min_singular(&a_reduced) <= tol * scale {
        return Ok(JnResult { a_reduced, rank, invertible: false, inverse: None, residual: None });
    }
    let inverse = if rank == 0 {
        x
    } else {
        let a_inv = &q * linalg::inverse(&a_reduced)? * q.adjoint();
        &x + &x * p * a_inv * p * &x
    };
    let residual = linalg::max_abs(&(a * &inverse - CMat::identity(d, d)));
    Ok(JnResult { a_reduced, rank, invertible: true, inverse: Some(inverse), residual: Some(residual) })
}

/// Block inverse through the Schur complement b = b11 − b12 b22⁻¹ b21.
#[derive(Debug, Clone)]
pub struct FeshbachResult {
    pub schur: CMat,
    pub invertible: bool,
    pub inverse: Option<CMat>,
}

pub fn feshbach_invert(b11: &CMat, b12: &CMat, b21: &CMat, b22: &CMat, tol: Real) -> Result<FeshbachResult> {
    let (p, q) = (b11.nrows(), b22.nrows());
    if !b11.is_square() || !b22.is_square() || b12.shape() != (p, q) || b21.shape() != (q, p) {
        return invalid("inconsistent block shapes");
    }
    if min_singular(b22) <= tol * (1.0 + linalg::op_norm(b22)) {
        return Err(Error::Singular("b22 is singular".into()));
    }
    let d22 = linalg::inverse(b22)?;
    let schur = b11 - b12 * &d22 * b21;
    if min_singular(&schur) <= tol * (1.0 + linalg::op_norm(&schur)) {
        return Ok(FeshbachResult { schur, invertible: false, inverse: None });
    }
    let s = linalg::inverse(&schur)?;
    let upper_right = -(&s * b12 * &d22);
    let lower_left = -(&d22 * b21 * &s);
    let lower_right = &d22 + &d22 * b21 * &s * b12 * &d22;
    let mut out = CMat::zeros(p + q, p + q);
    out.view_mut((0, 0), (p, p)).copy_from(&s);
    out.view_mut((0, p), (p, q)).copy_from(&upper_right);
    out.view_mut((p, 0), (q, p)).copy_from(&lower_left);
    out.view_mut((p, p), (q, q)).copy_from(&lower_right);
    Ok(FeshbachResult { schur, invertible: true, inverse: Some(out) })
}

/// Residuals of the Birman–Schwinger identities for S = S0 + V1*V2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BsResiduals {
    /// Resolvent formula against direct inversion of S − z.
    pub resolvent: Real,
    /// V2(S−z)⁻¹V1* = I − [I + V2(S0−z)⁻¹V1*]⁻¹.
    pub bs_identity: Real,
    /// V1(S−z)⁻¹V1* = V1(S0−z)⁻¹V1*[I + V2(S0−z)⁻¹V1*]⁻¹.
    pub product: Real,
}

impl BsResiduals {
    pub fn max(&self) -> Real {
        self.resolvent.max(self.bs_identity).max(self.product)
    }
}

pub fn bs_residuals(s0: &CMat, v1: &CMat, v2: &CMat, z: Cplx) -> Result<BsResiduals> {
    if z.im == 0.0 {
        return Err(Error::Domain("z must lie off the real axis".into()));
    }
    if v1.shape() != v2.shape() || v1.ncols() != s0.nrows() || !s0.is_square() {
        return invalid("factor shapes do not match S0");
    }
    let d = s0.nrows();
    let k = v1.nrows();
    let shifted = |m: &CMat, w: Cplx| {
        let mut out = m.clone();
        for i in 0..d {
            out[(i, i)] -= w;
        }
        out
    };
    let s = s0 + v1.adjoint() * v2;
    let r0 = linalg::inverse(&shifted(s0, z))?;
    let r0_bar = linalg::inverse(&shifted(s0, z.conj()))?;
    let r = linalg::inverse(&shifted(&s, z))?;
    let bs = v2 * &r0 * v1.adjoint();
    let ik = CMat::identity(k, k);
    let inv = linalg::inverse(&(&ik + &bs)).map_err(|_| Error::Singular("I + V2(S0−z)⁻¹V1* is singular".into()))?;

    let formula = &r0 - (v1 * &r0_bar).adjoint() * &inv * v2 * &r0;
    let resolvent = linalg::max_abs(&(formula - &r));
    let bs_identity = linalg::max_abs(&(v2 * &r * v1.adjoint() - (&ik - &inv)));
    let product = linalg::max_abs(&(v1 * &r * v1.adjoint() - v1 * &r0 * v1.adjoint() * &inv));
    Ok(BsResiduals { resolvent, bs_identity, product })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regular,
    Exceptional,
}

/// Near-zero mode of U_V + V1 G0(0) V1* with its reconstructed ψ0.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCandidate {
    pub eigenvalue: Real,
    /// Radii at which |ψ0| is sampled along the first axis.
    pub radii: Vec<Real>,
    pub psi_abs: Vec<Real>,
    /// Least-squares slope of ln|ψ0| against ln r.
    pub decay_exponent: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub classification: Classification,
    pub tol: Real,
    pub min_abs_eigenvalue: Real,
    /// Eigenvalues of smallest modulus, up to eight.
    pub near_zero: Vec<Real>,
    pub hermiticity_residual: Real,
    pub candidates: Vec<ThresholdCandidate>,
    pub dimension: usize,
    /// Set when a refined grid was compared.
    pub grid_too_coarse: Option<bool>,
}

/// Classify zero energy from the spectrum of U_V + V1 G0(0) V1* on a grid.
pub fn threshold_classify(rep: &CliffordRep, grid: &Grid, pot: &MatrixPotential, tol: Real) -> Result<ThresholdReport> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let op = assemble_bs_selfadjoint(rep, grid, pot)?;
    let hermiticity_residual = linalg::hermiticity_residual(&op.matrix);
    let (vals, vecs) = linalg::hermitian_eigen(&op.matrix);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].abs().total_cmp(&vals[j].abs()));
    let min_abs_eigenvalue = order.first().map_or(Real::INFINITY, |&i| vals[i].abs());
    let near_zero = order.iter().take(8).map(|&i| vals[i]).collect();
    let classification =
        if min_abs_eigenvalue < tol { Classification::Exceptional } else { Classification::Regular };
    let candidates = order
        .iter()
        .filter(|&&i| vals[i].abs() < tol)
        .map(|&i| candidate(rep, grid, pot, vals[i], &vecs.column(i).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdReport {
        classification,
        tol,
        min_abs_eigenvalue,
        near_zero,
        hermiticity_residual,
        candidates,
        dimension: op.matrix.nrows(),
        grid_too_coarse: None,
    })
}

/// Classification on m and 2m nodes per axis; flags a flip between them.
pub fn threshold_classify_refined(
    rep: &CliffordRep,
    pot: &MatrixPotential,
    half_width: Real,
    m: usize,
    tol: Real,
) -> Result<ThresholdReport> {
    let coarse = threshold_classify(rep, &build_grid(rep.n, half_width, m)?, pot, tol)?;
    let mut fine = threshold_classify(rep, &build_grid(rep.n, half_width, 2 * m)?, pot, tol)?;
    fine.grid_too_coarse = Some(coarse.classification != fine.classification);
    Ok(fine)
}

/// ψ0(x) = −Σ_j w_j G0(0; x, x_j) V1(x_j) φ0(x_j) from a weighted eigenvector.
fn candidate(rep: &CliffordRep, grid: &Grid, pot: &MatrixPotential, eigenvalue: Real, u: &CVec) -> Result<ThresholdCandidate> {
    let size = rep.size;
    let sources: Vec<(Vec<Real>, nalgebra::DVector<Cplx>)> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .enumerate()
        .map(|(j, (x, w))| {
            let f = pot.factors(x)?;
            let phi = u.rows(j * size, size).into_owned();
            Ok((x.clone(), (&f.v1 * phi) * Cplx::new(w.sqrt(), 0.0)))
        })
        .collect::<Result<_>>()?;
    let radii: Vec<Real> = (1..=5).map(|k| grid.half_width * 2f64.powi(k)).collect();
    let mut psi_abs = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut x = vec![0.0; rep.n];
        x[0] = r;
        let mut psi = nalgebra::DVector::<Cplx>::zeros(size);
        for (y, s) in &sources {
            psi -= green0_limit0(rep, &x, y)?.value * s;
        }
        psi_abs.push(psi.norm());
    }
    let pts: Vec<(Real, Real)> =
        radii.iter().zip(&psi_abs).filter(|(_, p)| **p > 0.0).map(|(r, p)| (r.ln(), p.ln())).collect();
    let decay_exponent = slope(&pts);
    Ok(ThresholdCandidate { eigenvalue, radii, psi_abs, decay_exponent })
}

fn slope(pts: &[(Real, Real)]) -> Real {
    if pts.len() < 2 {
        return Real::NAN;
    }
    let n = pts.len() as Real;
    let mx = pts.iter().map(|p| p.0).sum::<Real>() / n;
    let my = pts.iter().map(|p| p.1).sum::<Real>() / n;
    let sxy: Real = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: Real = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub amplitude: Real,
    pub min_abs_eigenvalue: Real,
}

/// Smallest |eigenvalue| of U_V + V1 G0(0) V1* for scaled copies of `pot`.
pub fn amplitude_sweep(rep: &CliffordRep, grid: &Grid, pot: &MatrixPotential, amplitudes: &[Real]) -> Result<Vec<SweepPoint>> {
    amplitudes
        .par_iter()
        .map(|&c| {
            let op = assemble_bs_selfadjoint(rep, grid, &pot.scaled(c))?;
            let m = linalg::hermitian_eigenvalues(&op.matrix).into_iter().map(Real::abs).fold(Real::INFINITY, Real::min);
            Ok(SweepPoint { amplitude: c, min_abs_eigenvalue: m })
        })
        .collect()
}

/// Interior local minima of a sweep.
pub fn sweep_dips(sweep: &[SweepPoint]) -> Vec<SweepPoint> {
    sweep
        .windows(3)
        .filter(|w| w[1].min_abs_eigenvalue < w[0].min_abs_eigenvalue && w[1].min_abs_eigenvalue < w[2].min_abs_eigenvalue)
        .map(|w| w[1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::potential::{polar_factorize, Family, MatrixSpec, PotentialParams, PotentialSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: Real, im: Real) -> Cplx {
        Cplx::new(re, im)
    }

    fn diag(v: &[Real]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    #[test]
    fn riesz_examples() {
        let p = riesz_projection(&diag(&[0.0, 5.0]), c(0.0, 0.0), 1.0).unwrap();
        assert!(linalg::max_abs(&(&p.p - diag(&[1.0, 0.0]))) < 1e-12);
        assert_eq!(p.rank, 1);

        let mut j = CMat::zeros(2, 2);
        j[(0, 1)] = c(1.0, 0.0);
        let p = riesz_projection(&j, c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(p.rank, 2);
        assert!(linalg::max_abs(&(&p.p - CMat::identity(2, 2))) < 1e-11);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = linalg::random_hermitian(&mut rng, 5, 1.0);
        let (vals, vecs) = linalg::hermitian_eigen(&h);
        let gap = (vals[2] - vals[1]).min(vals[3] - vals[2]);
        let p = riesz_projection(&h, c(vals[2], 0.0), 0.5 * gap).unwrap();
        let v = vecs.column(2).into_owned();
        assert!(linalg::max_abs(&(&p.p - &v * v.adjoint())) < 1e-10);
        assert!(linalg::hermiticity_residual(&p.p) < 1e-10);
        assert!(p.commutator < 1e-10);

        assert!(riesz_projection(&diag(&[0.0, 1.0]), c(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn riesz_ranks_cover_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = linalg::ginibre(&mut rng, 6, 3.0);
        let eigs = linalg::eigenvalues(&a).unwrap();
        let total: usize = eigs
            .iter()
            .map(|&e| {
                let r = eigs.iter().filter(|&&f| f != e).map(|f| (f - e).norm()).fold(Real::INFINITY, Real::min);
                riesz_projection(&a, e, 0.4 * r).unwrap().rank
            })
            .sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn jn_examples() {
        let mut p = CMat::zeros(2, 2);
        p[(0, 0)] = c(1.0, 0.0);
        let r = jn_invert(&diag(&[2.0, 3.0]), &p, 1e-12).unwrap();
        let inv = r.inverse.unwrap();
        assert!((inv[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!(r.residual.unwrap() < 1e-10);

        let r = jn_invert(&diag(&[2.0, 3.0]), &CMat::zeros(2, 2), 1e-12).unwrap();
        assert_eq!(r.rank, 0);
        assert!(r.invertible);

        let r = jn_invert(&diag(&[0.0, 3.0]), &p, 1e-12).unwrap();
        assert!(!r.invertible);
    }

    #[test]
    fn jn_equivalence_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in 0..200 {
            let d = 5;
            let mut a = linalg::ginibre(&mut rng, d, 2.0);
            let singular = t % 2 == 0;
            if singular {
                let k = CMat::from_fn(d, 1, |_, _| linalg::cnormal(&mut rng));
                let k = k.unscale(k.norm());
                a = &a - &a * &k * k.adjoint();
            }
            // projection onto the span of two columns, engineered to contain ker A when singular
            let basis = if singular {
                let svd = a.clone().svd(false, true);
                let vt = svd.v_t.unwrap();
                let idx = (0..d).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j])).unwrap();
                let kvec = vt.row(idx).adjoint();
                let other = CMat::from_fn(d, 1, |_, _| linalg::cnormal(&mut rng));
                CMat::from_columns(&[kvec.column(0).into_owned(), other.column(0).into_owned()])
            } else {
                CMat::from_fn(d, 2, |_, _| linalg::cnormal(&mut rng))
            };
            let q = basis.qr().q();
            let p = &q * q.adjoint();
            let r = jn_invert(&a, &p, 1e-9).unwrap();
            assert_eq!(r.invertible, !singular, "trial {t}");
            if let Some(res) = r.residual {
                assert!(res < 1e-9);
            }
        }
    }

    #[test]
    fn feshbach_examples() {
        let s = |x: Real| diag(&[x]);
        let r = feshbach_invert(&s(1.0), &s(2.0), &s(3.0), &s(4.0), 1e-12).unwrap();
        assert!((r.schur[(0, 0)] - c(-0.5, 0.0)).norm() < 1e-15);
        let full = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let direct = linalg::inverse(&full).unwrap();
        assert!(linalg::max_abs(&(r.inverse.unwrap() - direct)) < 1e-14);

        let r = feshbach_invert(&s(2.0), &s(0.0), &s(0.0), &s(4.0), 1e-12).unwrap();
        assert!(linalg::max_abs(&(r.inverse.unwrap() - diag(&[0.5, 0.25]))) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = linalg::ginibre(&mut rng, 6, 2.0);
        let b = |r, c, h, w| m.view((r, c), (h, w)).into_owned();
        let r = feshbach_invert(&b(0, 0, 2, 2), &b(0, 2, 2, 4), &b(2, 0, 4, 2), &b(2, 2, 4, 4), 1e-12).unwrap();
        let direct = linalg::inverse(&m).unwrap();
        assert!(linalg::max_abs(&(r.inverse.unwrap() - direct)) < 1e-10);

        assert!(feshbach_invert(&s(1.0), &s(1.0), &s(1.0), &s(0.0), 1e-12).is_err());
        assert!(!feshbach_invert(&s(1.0), &s(1.0), &s(1.0), &s(1.0), 1e-12).unwrap().invertible);
    }

    #[test]
    fn bs_identities() {
        let z = c(0.3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s0 = linalg::random_hermitian(&mut rng, 6, 1.0);
        let zero = CMat::zeros(6, 6);
        assert!(bs_residuals(&s0, &zero, &zero, z).unwrap().max() < 1e-14);

        let v = linalg::random_hermitian(&mut rng, 6, 0.7);
        let f = polar_factorize(&v).unwrap();
        assert!(bs_residuals(&s0, &f.v1, &f.v2, z).unwrap().max() < 1e-10);

        let s0 = diag(&[0.4]);
        let (v1, v2) = (diag(&[0.8]), diag(&[0.8]));
        let wz = c(0.64, 0.0) / (c(0.4, 0.0) - z);
        let lhs = c(1.0, 0.0) - c(1.0, 0.0) / (c(1.0, 0.0) + wz);
        assert!((lhs - wz / (c(1.0, 0.0) + wz)).norm() < 1e-15);
        assert!(bs_residuals(&s0, &v1, &v2, z).unwrap().max() < 1e-14);
        assert!(bs_residuals(&s0, &v1, &v2, c(0.3, 0.0)).is_err());
    }

    fn bump(n: usize, amplitude: Real) -> MatrixPotential {
        MatrixPotential::new(PotentialSpec {
            family: Family::Gaussian,
            params: PotentialParams {
                amplitude,
                width: 1.0,
                matrix: MatrixSpec::Named("identity".into()),
                ..Default::default()
            },
            n,
        })
        .unwrap()
    }

    #[test]
    fn threshold_regular_cases() {
        let rep = build_clifford(3).unwrap();
        let grid = build_grid(3, 2.0, 3).unwrap();
        let r = threshold_classify(&rep, &grid, &bump(3, 0.0), THRESHOLD_TOL).unwrap();
        assert_eq!(r.classification, Classification::Regular);
        assert!((r.min_abs_eigenvalue - 1.0).abs() < 1e-12);
        let r = threshold_classify(&rep, &grid, &bump(3, 0.01), THRESHOLD_TOL).unwrap();
        assert_eq!(r.classification, Classification::Regular);
        assert!(r.hermiticity_residual < 1e-10);
        assert!(r.min_abs_eigenvalue > 0.9);
    }

    #[test]
    fn threshold_sweep_finds_dip() {
        let rep = build_clifford(3).unwrap();
        let grid = build_grid(3, 2.0, 3).unwrap();
        let amps: Vec<Real> = (1..=60).map(|k| 0.25 * k as Real).collect();
        let sweep = amplitude_sweep(&rep, &grid, &bump(3, 1.0), &amps).unwrap();
        let dips = sweep_dips(&sweep);
        assert!(!dips.is_empty());
        let best = dips.iter().map(|d| d.min_abs_eigenvalue).fold(Real::INFINITY, Real::min);
        assert!(best < 0.1, "{best}");
        let at = dips.iter().min_by(|a, b| a.min_abs_eigenvalue.total_cmp(&b.min_abs_eigenvalue)).unwrap();
        let r = threshold_classify(&rep, &grid, &bump(3, at.amplitude), 0.2).unwrap();
        assert_eq!(r.classification, Classification::Exceptional);
        assert!(!r.candidates.is_empty());
        assert!(r.candidates[0].decay_exponent < 0.0);
    }
}
