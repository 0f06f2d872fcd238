//! Nyström discretizations of the weighted free resolvent and of
//! Birman–Schwinger operators on tensor Gauss–Legendre grids, together with
//! Schatten-norm diagnostics and a planar Riesz-potential quadrature.

use std::collections::HashMap;
use std::sync::OnceLock;
use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::clifford::{matrix_size, CliffordRep};
use crate::error::{invalid, Error, Result};
use crate::green::{kernel_coeffs, kernel_from_coeffs};
use crate::linalg;
use crate::potential::{japanese, MatrixPotential};
use crate::{CMat, Cplx, Real};

/// Default cap on the operator dimension (node count × block size).
pub const DEFAULT_MEMORY_CAP: usize = 4096;

/// Gauss–Legendre nodes (ascending) and weights on [−1, 1].
pub fn gauss_legendre(m: usize) -> Result<(Vec<Real>, Vec<Real>)> {
    if m == 1 {
        return Ok((vec![0.0], vec![2.0]));
    }
    let rule = GaussLegendre::new(m).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut pairs: Vec<(Real, Real)> = rule.into_node_weight_pairs();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(m: usize, a: Real, b: Real) -> Result<(Vec<Real>, Vec<Real>)> {
    let (x, w) = gauss_legendre(m)?;
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    Ok((x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect()))
}

/// Adaptive Gauss–Legendre integration of a complex integrand on [a, b].
///
/// Panels are bisected until the 10-point rule, its two-panel and its
/// four-panel refinements agree to `tol` (absolute, split across panels) or
/// the depth limit is hit.
pub fn integrate_adaptive<F: Fn(Real) -> Cplx>(f: &F, a: Real, b: Real, tol: Real) -> Cplx {
    static RULE: OnceLock<(Vec<Real>, Vec<Real>)> = OnceLock::new();
    let (x, w) = RULE.get_or_init(|| gauss_legendre(10).expect("fixed rule"));
    let panel = |lo: Real, hi: Real| -> Cplx {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        x.iter().zip(w).map(|(t, wt)| f(c + h * t) * (wt * h)).sum()
    };
    fn recurse<P: Fn(Real, Real) -> Cplx>(p: &P, lo: Real, hi: Real, whole: Cplx, tol: Real, depth: u32) -> Cplx {
        let mid = 0.5 * (lo + hi);
        let left = p(lo, mid);
        let right = p(mid, hi);
        let refined = left + right;
        if depth == 0 {
            return refined;
        }
        if (refined - whole).norm() <= tol {
            let (q1, q2) = (0.5 * (lo + mid), 0.5 * (mid + hi));
            let quarters = p(lo, q1) + p(q1, mid) + p(mid, q2) + p(q2, hi);
            if (quarters - refined).norm() <= tol {
                return quarters;
            }
        }
        recurse(p, lo, mid, left, 0.5 * tol, depth - 1) + recurse(p, mid, hi, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return Cplx::new(0.0, 0.0);
    }
    recurse(&panel, a, b, panel(a, b), tol, 48)
}

/// Tensor-product quadrature grid on [−R, R]ⁿ.
#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub n: usize,
    pub nodes: Vec<Vec<Real>>,
    pub weights: Vec<Real>,
    pub half_width: Real,
    pub per_axis: usize,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn build_grid(n: usize, half_width: Real, m: usize) -> Result<Grid> {
    build_grid_capped(n, half_width, m, DEFAULT_MEMORY_CAP)
}

/// Tensor grid with mⁿ·N ≤ `cap`.
pub fn build_grid_capped(n: usize, half_width: Real, m: usize, cap: usize) -> Result<Grid> {
    if n == 0 || m == 0 {
        return invalid("grid needs n >= 1 and m >= 1");
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return invalid("box half-width must be positive");
    }
    let block = if n >= 2 { matrix_size(n) } else { 1 };
    let count = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let needed = count.saturating_mul(block as u128);
    if needed > cap as u128 {
        return Err(Error::MemoryCap { needed: needed.min(usize::MAX as u128) as usize, cap });
    }
    let (x1, w1) = gauss_legendre_on(m, -half_width, half_width)?;
    let total = count as usize;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for idx in 0..total {
        let mut k = idx;
        let mut x = vec![0.0; n];
        let mut w = 1.0;
        for slot in x.iter_mut().rev() {
            *slot = x1[k % m];
            w *= w1[k % m];
            k /= m;
        }
        nodes.push(x);
        weights.push(w);
    }
    Ok(Grid { n, nodes, weights, half_width, per_axis: m })
}

/// Which continuum operator a matrix approximates.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelDescriptor {
    WeightedResolvent { z: Option<Cplx>, delta: Real, rule: DiagonalRule },
    BirmanSchwinger { z: Option<Cplx> },
    SelfAdjointThreshold,
}

#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub matrix: CMat,
    pub grid: Grid,
    pub block: usize,
    pub kernel: KernelDescriptor,
}

impl DiscretizedOperator {
    pub fn singular_values(&self) -> Vec<Real> {
        singular_values(&self.matrix)
    }

    pub fn schatten_norm(&self, p: Real) -> Result<Real> {
        schatten_norm(&self.matrix, p)
    }

    pub fn operator_norm(&self) -> Real {
        linalg::op_norm(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Cplx>> {
        linalg::eigenvalues(&self.matrix)
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<Real> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<Real> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// (Σ σ_k^p)^{1/p}; p = ∞ gives the operator norm.
pub fn schatten_norm(m: &CMat, p: Real) -> Result<Real> {
    if p.is_nan() || p < 1.0 {
        return invalid(format!("Schatten index must be >= 1, got {p}"));
    }
    Ok(schatten_from_singular(&singular_values(m), p))
}

pub fn schatten_from_singular(s: &[Real], p: Real) -> Real {
    let top = s.iter().copied().fold(0.0, Real::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    top * s.iter().map(|v| (v / top).powf(p)).sum::<Real>().powf(1.0 / p)
}

/// Factors sandwiching the kernel: block(i, j) = L_i G₀(x_i, x_j) R_j.
enum Side {
    Scalar(Vec<Real>),
    Matrix(Vec<CMat>),
}

impl Side {
    fn apply_left(&self, i: usize, k: CMat) -> CMat {
        match self {
            Side::Scalar(s) => k * Cplx::new(s[i], 0.0),
            Side::Matrix(m) => &m[i] * k,
        }
    }

    fn apply_right(&self, j: usize, k: CMat) -> CMat {
        match self {
            Side::Scalar(s) => k * Cplx::new(s[j], 0.0),
            Side::Matrix(m) => k * &m[j],
        }
    }

    fn is_zero(&self, i: usize) -> bool {
        match self {
            Side::Scalar(s) => s[i] == 0.0,
            Side::Matrix(m) => m[i].iter().all(|v| *v == Cplx::new(0.0, 0.0)),
        }
    }
}

fn check_rep_grid(rep: &CliffordRep, grid: &Grid) -> Result<()> {
    if rep.n != grid.n {
        return Err(Error::DimensionMismatch { expected: rep.n, got: grid.n });
    }
    Ok(())
}

/// Treatment of the singular diagonal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalRule {
    /// Zero diagonal blocks.
    #[default]
    Punctured,
    /// Mean of the even part a(r)I over a ball of the node's weight; the odd
    /// α·ω̂ part averages to zero.
    CellAverage,
}

/// (1/w)∫_{|y|<ρ} a(|y|) dy over the ball of volume w.
pub fn cell_average(n: usize, z: Option<Cplx>, w: Real) -> Result<Cplx> {
    let nn = n as Real;
    let unit_ball = PI.powf(nn / 2.0) / gamma(nn / 2.0 + 1.0);
    let rho = (w / unit_ball).powf(1.0 / nn);
    let (t, tw) = gauss_legendre_on(24, 0.0, 1.0)?;
    let mut acc = Cplx::new(0.0, 0.0);
    // substitution r = ρ t²
    for (ti, wi) in t.iter().zip(&tw) {
        let r = rho * ti * ti;
        let (a, _) = kernel_coeffs(n, z, r)?;
        acc += a * (r.powi(n as i32 - 1) * 2.0 * rho * ti * wi);
    }
    Ok(acc * (nn * unit_ball / w))
}

/// Nyström assembly; diagonal blocks follow `rule`.
fn assemble_kernel(
    rep: &CliffordRep,
    grid: &Grid,
    z: Option<Cplx>,
    left: &Side,
    right: &Side,
    rule: DiagonalRule,
) -> Result<CMat> {
    if let Some(z) = z {
        if z.im < 0.0 {
            return Err(Error::Domain(format!("Im z < 0: {z}")));
        }
    }
    let m = grid.len();
    let size = rep.size;

    // one Hankel evaluation per distinct distance
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut radii = Vec::new();
    let mut pair_slot = vec![usize::MAX; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let r = dist(&grid.nodes[i], &grid.nodes[j]);
            let slot = *index.entry(r.to_bits()).or_insert_with(|| {
                radii.push(r);
                radii.len() - 1
            });
            pair_slot[i * m + j] = slot;
            pair_slot[j * m + i] = slot;
        }
    }
    let coeffs: Vec<(Cplx, Cplx)> =
        radii.par_iter().map(|&r| kernel_coeffs(rep.n, z, r)).collect::<Result<_>>()?;

    let diagonal: Vec<Option<Cplx>> = match rule {
        DiagonalRule::Punctured => vec![None; m],
        DiagonalRule::CellAverage => grid
            .weights
            .par_iter()
            .map(|&w| cell_average(rep.n, z, w).map(Some))
            .collect::<Result<_>>()?,
    };
    let rows: Vec<CMat> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = CMat::zeros(size, size * m);
            if left.is_zero(i) {
                return row;
            }
            for j in 0..m {
                if right.is_zero(j) {
                    continue;
                }
                if i == j {
                    if let Some(avg) = diagonal[i] {
                        let k = CMat::identity(size, size) * avg;
                        let blk = right.apply_right(j, left.apply_left(i, k));
                        row.view_mut((0, j * size), (size, size)).copy_from(&blk);
                    }
                    continue;
                }
                let d: Vec<Real> = grid.nodes[i].iter().zip(&grid.nodes[j]).map(|(a, b)| a - b).collect();
                let r = d.iter().map(|v| v * v).sum::<Real>().sqrt();
                let (a, b) = coeffs[pair_slot[i * m + j]];
                let k = kernel_from_coeffs(rep, &d, r, a, b);
                let blk = right.apply_right(j, left.apply_left(i, k));
                row.view_mut((0, j * size), (size, size)).copy_from(&blk);
            }
            row
        })
        .collect();

    let mut out = CMat::zeros(size * m, size * m);
    for (i, row) in rows.into_iter().enumerate() {
        out.view_mut((i * size, 0), (size, size * m)).copy_from(&row);
    }
    Ok(out)
}

fn dist(x: &[Real], y: &[Real]) -> Real {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<Real>().sqrt()
}

/// Blocks w_i^{1/2}⟨x_i⟩^{−δ}G₀(z; x_i, x_j)⟨x_j⟩^{−δ}w_j^{1/2}; `None` or 0 means z → 0.
pub fn assemble_weighted_resolvent(
    rep: &CliffordRep,
    grid: &Grid,
    z: Option<Cplx>,
    delta: Real,
) -> Result<DiscretizedOperator> {
    assemble_weighted_resolvent_with(rep, grid, z, delta, DiagonalRule::default())
}

pub fn assemble_weighted_resolvent_with(
    rep: &CliffordRep,
    grid: &Grid,
    z: Option<Cplx>,
    delta: Real,
    rule: DiagonalRule,
) -> Result<DiscretizedOperator> {
    if !(delta > 0.0) {
        return invalid(format!("weight exponent must be positive, got {delta}"));
    }
    check_rep_grid(rep, grid)?;
    let s: Vec<Real> =
        grid.nodes.iter().zip(&grid.weights).map(|(x, w)| w.sqrt() * japanese(x).powf(-delta)).collect();
    let side = Side::Scalar(s);
    let matrix = assemble_kernel(rep, grid, z, &side, &side, rule)?;
    Ok(DiscretizedOperator {
        matrix,
        grid: grid.clone(),
        block: rep.size,
        kernel: KernelDescriptor::WeightedResolvent { z, delta, rule },
    })
}

fn check_potential(rep: &CliffordRep, grid: &Grid, pot: &MatrixPotential) -> Result<()> {
    check_rep_grid(rep, grid)?;
    if pot.n() != rep.n {
        return Err(Error::DimensionMismatch { expected: rep.n, got: pot.n() });
    }
    Ok(())
}

/// Blocks w_i^{1/2}V₂(x_i)G₀(z; x_i, x_j)V₁(x_j)*w_j^{1/2}.
pub fn assemble_bs(
    rep: &CliffordRep,
    grid: &Grid,
    z: Option<Cplx>,
    pot: &MatrixPotential,
) -> Result<DiscretizedOperator> {
    check_potential(rep, grid, pot)?;
    let mut left = Vec::with_capacity(grid.len());
    let mut right = Vec::with_capacity(grid.len());
    for (x, w) in grid.nodes.iter().zip(&grid.weights) {
        let f = pot.factors(x)?;
        let s = Cplx::new(w.sqrt(), 0.0);
        left.push(&f.v2 * s);
        right.push(f.v1.adjoint() * s);
    }
    let matrix = assemble_kernel(rep, grid, z, &Side::Matrix(left), &Side::Matrix(right), DiagonalRule::Punctured)?;
    Ok(DiscretizedOperator {
        matrix,
        grid: grid.clone(),
        block: rep.size,
        kernel: KernelDescriptor::BirmanSchwinger { z },
    })
}

/// U_V + V₁G₀(0)V₁*, Hermitian by construction.
pub fn assemble_bs_selfadjoint(rep: &CliffordRep, grid: &Grid, pot: &MatrixPotential) -> Result<DiscretizedOperator> {
    check_potential(rep, grid, pot)?;
    let mut side = Vec::with_capacity(grid.len());
    let mut signs = Vec::with_capacity(grid.len());
    for (x, w) in grid.nodes.iter().zip(&grid.weights) {
        let f = pot.factors(x)?;
        side.push(&f.v1 * Cplx::new(w.sqrt(), 0.0));
        signs.push(f.uv);
    }
    let right: Vec<CMat> = side.iter().map(|m| m.adjoint()).collect();
    let mut matrix =
        assemble_kernel(rep, grid, None, &Side::Matrix(side), &Side::Matrix(right), DiagonalRule::Punctured)?;
    let size = rep.size;
    for (i, u) in signs.iter().enumerate() {
        let mut blk = matrix.view_mut((i * size, i * size), (size, size));
        blk += u;
    }
    Ok(DiscretizedOperator {
        matrix,
        grid: grid.clone(),
        block: size,
        kernel: KernelDescriptor::SelfAdjointThreshold,
    })
}

/// γ(α, n) = π^{n/2} 2^α Γ(α/2)/Γ((n−α)/2).
pub fn riesz_gamma(alpha: Real, n: usize) -> Result<Real> {
    let nn = n as Real;
    if !(alpha > 0.0 && alpha < nn) {
        return invalid(format!("Riesz order must lie in (0, {n}), got {alpha}"));
    }
    Ok(PI.powf(nn / 2.0) * 2f64.powf(alpha) * gamma(alpha / 2.0) / gamma((nn - alpha) / 2.0))
}

/// γ(α, n)γ(β, n)/γ(α + β, n).
pub fn riesz_composition_constant(alpha: Real, beta: Real, n: usize) -> Result<Real> {
    Ok(riesz_gamma(alpha, n)? * riesz_gamma(beta, n)? / riesz_gamma(alpha + beta, n)?)
}

/// Accuracy knobs for [`riesz_convolution_2d`].
#[derive(Debug, Clone, Copy)]
pub struct RieszQuadrature {
    pub angles: usize,
    pub radial: usize,
    pub panels: usize,
}

impl Default for RieszQuadrature {
    fn default() -> Self {
        Self { angles: 256, radial: 24, panels: 12 }
    }
}

/// ∫_{ℝ²} |x₁ − y|^{α−2}|y − x₂|^{β−2} dy by a partition of unity and polar
/// coordinates around each singular point.
pub fn riesz_convolution_2d(alpha: Real, beta: Real, x1: [Real; 2], x2: [Real; 2], q: RieszQuadrature) -> Result<Real> {
    if !(alpha > 0.0 && beta > 0.0 && alpha + beta < 2.0) {
        return invalid("need 0 < α, β and α + β < 2");
    }
    let d = dist(&x1, &x2);
    if d == 0.0 {
        return invalid("points must be distinct");
    }
    let a = alpha - 2.0;
    let b = beta - 2.0;
    let f = |y: [Real; 2]| {
        let r1 = dist(&y, &x1);
        let r2 = dist(&y, &x2);
        let (p1, p2) = (r1.powi(4), r2.powi(4));
        (r1.powf(a) * r2.powf(b), p2 / (p1 + p2))
    };
    // half attached to x₁ uses χ₁, half attached to x₂ uses 1 − χ₁
    let piece = |centre: [Real; 2], own: Real, first: bool| -> Result<Real> {
        let (gx, gw) = gauss_legendre(q.radial)?;
        let radial_nodes = |lo: Real, hi: Real| -> Vec<(Real, Real)> {
            gx.iter().zip(&gw).map(|(t, w)| (0.5 * (lo + hi) + 0.5 * (hi - lo) * t, 0.5 * (hi - lo) * w)).collect()
        };
        let mut rs: Vec<(Real, Real)> = Vec::new();
        // ρ = (d/2) t^q near the centre
        let qexp = (4.0 / (own + 2.0)).ceil();
        for (t, w) in radial_nodes(0.0, 1.0) {
            let rho = 0.5 * d * t.powf(qexp);
            rs.push((rho, w * 0.5 * d * qexp * t.powf(qexp - 1.0)));
        }
        let (lo, hi) = (0.5 * d, 4.0 * d);
        let h = (hi - lo) / q.panels as Real;
        for p in 0..q.panels {
            rs.extend(radial_nodes(lo + p as Real * h, lo + (p + 1) as Real * h));
        }
        // ρ = 4d s^{−5/2} for the tail
        for (s, w) in radial_nodes(0.0, 1.0) {
            let rho = 4.0 * d * s.powf(-2.5);
            rs.push((rho, w * 4.0 * d * 2.5 * s.powf(-3.5)));
        }
        let mut total = 0.0;
        for k in 0..q.angles {
            let th = 2.0 * PI * (k as Real + 0.5) / q.angles as Real;
            let (st, ct) = th.sin_cos();
            for &(rho, w) in &rs {
                let y = [centre[0] + rho * ct, centre[1] + rho * st];
                let (v, chi) = f(y);
                let c = if first { chi } else { 1.0 - chi };
                if c > 0.0 && v.is_finite() {
                    total += v * c * rho * w;
                }
            }
        }
        Ok(total * 2.0 * PI / q.angles as Real)
    };
    Ok(piece(x1, a, true)? + piece(x2, b, false)?)
}
