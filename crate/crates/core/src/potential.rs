//! Matrix-valued potentials, their decay diagnostics and the pointwise polar
//! factorization V = V₁ U_V V₁.

use serde::{Deserialize, Serialize};

use crate::clifford::{build_clifford, matrix_size};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, hermitian_eigen};
use crate::{CMat, Cplx, Real};

/// Absolute threshold below which an eigenvalue counts as zero.
pub const ZERO_EIG: Real = 1e-13;

/// Pointwise polar factors with V₂ = U_V V₁.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub v1: CMat,
    pub uv: CMat,
    pub v2: CMat,
}

impl PolarFactors {
    pub fn reconstruct(&self) -> CMat {
        &self.v1 * &self.uv * &self.v1
    }
}

/// V₁ = |V|^{1/2}, U_V = sign(V) with sign(0) = +1.
pub fn polar_factorize(v: &CMat) -> Result<PolarFactors> {
    if !v.is_square() {
        return Err(Error::DimensionMismatch { expected: v.nrows(), got: v.ncols() });
    }
    if !linalg::is_hermitian(v, 1e-12) {
        return invalid("polar factorization needs a Hermitian matrix");
    }
    let (vals, q) = hermitian_eigen(v);
    let scale = vals.iter().fold(1.0 as Real, |m, x| m.max(x.abs()));
    let apply = |f: &dyn Fn(Real) -> Real| {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&l| Cplx::new(f(l), 0.0)),
        ));
        let m = &q * d * q.adjoint();
        (&m + m.adjoint()).scale(0.5)
    };
    let tiny = ZERO_EIG * scale;
    let v1 = apply(&|l| if l.abs() <= tiny { 0.0 } else { l.abs().sqrt() });
    let uv = apply(&|l| if l < -tiny { -1.0 } else { 1.0 });
    let v2 = &uv * &v1;
    Ok(PolarFactors { v1, uv, v2 })
}

/// Constant matrix profile attached to a scalar envelope.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MatrixSpec {
    /// `identity`, `beta`, `sigma1` or `alpha<j>` (1-based).
    Named(String),
    /// Rows of `[re, im]` pairs.
    Explicit(Vec<Vec<[Real; 2]>>),
}

impl Default for MatrixSpec {
    fn default() -> Self {
        MatrixSpec::Named("identity".into())
    }
}

impl MatrixSpec {
    pub fn build(&self, n: usize) -> Result<CMat> {
        let size = matrix_size(n);
        let m = match self {
            MatrixSpec::Explicit(rows) => {
                if rows.len() != size || rows.iter().any(|r| r.len() != size) {
                    return Err(Error::DimensionMismatch { expected: size, got: rows.len() });
                }
                CMat::from_fn(size, size, |i, j| Cplx::new(rows[i][j][0], rows[i][j][1]))
            }
            MatrixSpec::Named(name) => {
                let rep = build_clifford(n)?;
                match name.as_str() {
                    "identity" => CMat::identity(size, size),
                    "beta" => rep.beta().clone(),
                    "sigma1" => {
                        let s1 = CMat::from_row_slice(
                            2,
                            2,
                            &[Cplx::new(0.0, 0.0), Cplx::new(1.0, 0.0), Cplx::new(1.0, 0.0), Cplx::new(0.0, 0.0)],
                        );
                        linalg::kron(&s1, &CMat::identity(size / 2, size / 2))
                    }
                    s if s.starts_with("alpha") => {
                        let j: usize = s[5..]
                            .parse()
                            .map_err(|_| Error::InvalidArgument(format!("bad matrix name {s}")))?;
                        if j == 0 || j > n + 1 {
                            return invalid(format!("alpha index {j} out of range 1..={}", n + 1));
                        }
                        rep.alphas[j - 1].clone()
                    }
                    other => return invalid(format!("unknown matrix profile {other}")),
                }
            }
        };
        if !linalg::is_hermitian(&m, 1e-13) {
            return invalid("matrix profile must be Hermitian");
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// a·exp(−|x|²/w²)·M
    Gaussian,
    /// a·⟨x⟩^{−ρ}·M
    Power,
    /// a·exp(1 − 1/(1 − |x|²/R²))·M inside the ball of radius R
    Bump,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PotentialParams {
    #[serde(default = "one")]
    pub amplitude: Real,
    #[serde(default = "one")]
    pub width: Real,
    #[serde(default = "default_rho")]
    pub rho: Real,
    #[serde(default = "one")]
    pub radius: Real,
    #[serde(default)]
    pub matrix: MatrixSpec,
}

fn one() -> Real {
    1.0
}

fn default_rho() -> Real {
    4.0
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self { amplitude: 1.0, width: 1.0, rho: default_rho(), radius: 1.0, matrix: MatrixSpec::default() }
    }
}

/// Serializable description `{"family", "params", "n"}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PotentialSpec {
    pub family: Family,
    #[serde(default)]
    pub params: PotentialParams,
    pub n: usize,
}

/// A potential ready for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct MatrixPotential {
    pub spec: PotentialSpec,
    pub size: usize,
    profile: CMat,
    profile_max: Real,
}

/// ⟨x⟩ = (1 + |x|²)^{1/2}.
pub fn japanese(x: &[Real]) -> Real {
    (1.0 + x.iter().map(|v| v * v).sum::<Real>()).sqrt()
}

impl MatrixPotential {
    pub fn new(spec: PotentialSpec) -> Result<Self> {
        if spec.n < 2 {
            return invalid(format!("dimension must be >= 2, got {}", spec.n));
        }
        let p = &spec.params;
        if !p.amplitude.is_finite() {
            return invalid("amplitude must be finite");
        }
        match spec.family {
            Family::Gaussian if p.width <= 0.0 => return invalid("gaussian width must be positive"),
            Family::Power if p.rho <= 0.0 => return invalid("power exponent must be positive"),
            Family::Bump if p.radius <= 0.0 => return invalid("bump radius must be positive"),
            _ => {}
        }
        let profile = p.matrix.build(spec.n)?;
        let profile_max = linalg::max_abs(&profile);
        Ok(Self { size: matrix_size(spec.n), spec, profile, profile_max })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Scalar envelope multiplying the matrix profile.
    pub fn envelope(&self, x: &[Real]) -> Real {
        let p = &self.spec.params;
        let r2: Real = x.iter().map(|v| v * v).sum();
        p.amplitude
            * match self.spec.family {
                Family::Gaussian => (-r2 / (p.width * p.width)).exp(),
                Family::Power => (1.0 + r2).powf(-p.rho / 2.0),
                Family::Bump => {
                    let s = r2 / (p.radius * p.radius);
                    if s < 1.0 {
                        (1.0 - 1.0 / (1.0 - s)).exp()
                    } else {
                        0.0
                    }
                }
            }
    }

    pub fn eval(&self, x: &[Real]) -> Result<CMat> {
        if x.len() != self.spec.n {
            return Err(Error::DimensionMismatch { expected: self.spec.n, got: x.len() });
        }
        Ok(self.profile.scale(self.envelope(x)))
    }

    pub fn factors(&self, x: &[Real]) -> Result<PolarFactors> {
        polar_factorize(&self.eval(x)?)
    }

    /// Same potential with the amplitude multiplied by `c`.
    pub fn scaled(&self, c: Real) -> Self {
        let mut s = self.clone();
        s.spec.params.amplitude *= c;
        s
    }

    /// Smallest C with |V_{ℓm}(x)| ≤ C⟨x⟩^{−ρ}, or `None` if no finite C exists.
    pub fn decay_constant(&self, rho: Real) -> Option<Real> {
        let p = &self.spec.params;
        let base = p.amplitude.abs() * self.profile_max;
        match self.spec.family {
            Family::Power => (rho <= p.rho).then_some(base),
            Family::Gaussian => {
                // maximize −t/w² + (ρ/2) ln(1 + t) over t = |x|² ≥ 0
                let w2 = p.width * p.width;
                let t = (rho * w2 / 2.0 - 1.0).max(0.0);
                Some(base * (-t / w2 + rho / 2.0 * (1.0 + t).ln()).exp())
            }
            Family::Bump => {
                // one-dimensional scan of the compactly supported profile
                let steps = 2000;
                let mut best: Real = 0.0;
                for i in 0..steps {
                    let r = p.radius * i as Real / steps as Real;
                    let s = (r / p.radius).powi(2);
                    let v = (1.0 - 1.0 / (1.0 - s)).exp() * (1.0 + r * r).powf(rho / 2.0);
                    best = best.max(v);
                }
                Some(base * best * (1.0 + 1e-6))
            }
        }
    }

    /// Half-width R with C⟨R⟩^{−ρ} ≤ tol for the given exponent.
    pub fn box_radius(&self, tol: Real) -> Real {
        let p = &self.spec.params;
        match self.spec.family {
            Family::Bump => p.radius,
            Family::Gaussian => {
                let a = (p.amplitude.abs() * self.profile_max).max(tol);
                p.width * (a / tol).ln().sqrt()
            }
            Family::Power => {
                let a = (p.amplitude.abs() * self.profile_max).max(tol);
                ((a / tol).powf(2.0 / p.rho) - 1.0).max(0.0).sqrt()
            }
        }
    }
}

/// Decay hypotheses with their required exponents.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub enum Hypothesis {
    /// ρ > 1
    #[serde(rename = "3.1")]
    H3_1,
    /// ρ > n
    #[serde(rename = "7.1")]
    H7_1,
    /// ρ = n + ε
    #[serde(rename = "9.13")]
    H9_13,
    /// ρ = n + 1 + ε
    #[serde(rename = "12.1")]
    H12_1,
}

impl Hypothesis {
    pub fn required_rho(self, n: usize, eps: Real) -> Real {
        let n = n as Real;
        match self {
            Hypothesis::H3_1 => 1.0 + eps,
            Hypothesis::H7_1 | Hypothesis::H9_13 => n + eps,
            Hypothesis::H12_1 => n + 1.0 + eps,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub hypothesis: Hypothesis,
    pub required_rho: Real,
    pub constant: Option<Real>,
    pub worst_ratio: Real,
    pub worst_point: Vec<Real>,
    pub pass: bool,
}

/// Worst |V_{ℓm}(x)|⟨x⟩^{ρ}/C over the samples for the hypothesis' exponent.
pub fn decay_report(v: &MatrixPotential, hyp: Hypothesis, eps: Real, samples: &[Vec<Real>]) -> Result<DecayReport> {
    let rho = hyp.required_rho(v.n(), eps);
    let constant = v.decay_constant(rho);
    let c = constant
        .or_else(|| v.decay_constant(v.spec.params.rho))
        .unwrap_or(1.0)
        .max(Real::MIN_POSITIVE);
    let mut worst = 0.0;
    let mut worst_point = Vec::new();
    for x in samples {
        let ratio = linalg::max_abs(&v.eval(x)?) * japanese(x).powf(rho) / c;
        if ratio > worst || worst_point.is_empty() {
            worst = ratio;
            worst_point = x.clone();
        }
    }
    let pass = constant.is_some() && worst <= 1.0 + 1e-9;
    Ok(DecayReport { hypothesis: hyp, required_rho: rho, constant, worst_ratio: worst, worst_point, pass })
}

/// Sample points on rays at geometrically growing radii.
pub fn radial_samples(n: usize, rmax: Real, count: usize) -> Vec<Vec<Real>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let r = if i == 0 { 0.0 } else { rmax.powf(i as Real / (count - 1).max(1) as Real) };
        let mut x = vec![0.0; n];
        let axis = i % n;
        x[axis] = r * if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(x);
    }
    out
}
