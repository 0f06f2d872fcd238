//! Empirical fit of ‖∂ʳ_z G₀‖ against the envelopes of the kernel estimates.

use serde::Serialize;

use super::{green0_deriv, Regime};
use crate::clifford::CliffordRep;
use crate::linalg::op_norm;
use crate::{Cplx, Real};

#[derive(Debug, Clone, Serialize)]
pub struct BoundFit {
    pub order: usize,
    pub regime: Regime,
    pub samples: usize,
    /// Fitted constant: the largest observed norm/envelope ratio.
    pub max_ratio: Real,
    pub nonfinite: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub z: [Real; 2],
    pub delta: Real,
    pub fits: Vec<BoundFit>,
}

impl BoundReport {
    pub fn flagged(&self) -> bool {
        self.fits.iter().any(|f| f.nonfinite > 0)
    }
}

/// Envelope value for order r at separation d.
pub fn envelope(n: usize, order: usize, z: Cplx, d: Real, delta: Real) -> Real {
    let nz = z.norm();
    let nf = n as Real;
    let r = order as Real;
    if nz * d >= 1.0 {
        return nz.powf((nf - 1.0) / 2.0) * d.powf((2.0 * r + 1.0 - nf) / 2.0) * (-z.im * d).exp();
    }
    if n % 2 == 1 {
        d.powf(r + 1.0 - nf)
    } else if order != n {
        nz.powf(-delta) * d.powf(r + 1.0 - delta - nf)
    } else {
        nz.powf(-delta) * d.powf(1.0 - delta) + 1.0 / nz
    }
}

/// For each order r ≤ n and each regime, the largest ratio ‖∂ʳG₀‖/envelope.
pub fn kernel_bound_report(
    rep: &CliffordRep,
    z: Cplx,
    samples: &[(Vec<Real>, Vec<Real>)],
    delta: Real,
) -> BoundReport {
    let mut fits = Vec::new();
    for order in 0..=rep.n {
        for regime in [Regime::Series, Regime::Asymptotic] {
            let mut fit = BoundFit { order, regime, samples: 0, max_ratio: 0.0, nonfinite: 0 };
            for (x, y) in samples {
                let d: Real = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<Real>().sqrt();
                if d == 0.0 || Regime::for_argument(z.norm() * d) != regime {
                    continue;
                }
                fit.samples += 1;
                let ratio = match green0_deriv(rep, order, z, x, y) {
                    Ok(k) => op_norm(&k.value) / envelope(rep.n, order, z, d, delta),
                    Err(_) => Real::NAN,
                };
                if ratio.is_finite() {
                    fit.max_ratio = fit.max_ratio.max(ratio);
                } else {
                    fit.nonfinite += 1;
                }
            }
            fits.push(fit);
        }
    }
    BoundReport { n: rep.n, z: [z.re, z.im], delta, fits }
}
