//! Exact coefficients of the odd-dimensional power expansion of G₀.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OddDimCoeffs {
    pub n: usize,
    pub d: Vec<BigRational>,
    pub dprime: Vec<BigRational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingReport {
    pub n: usize,
    pub d_zero_odd: bool,
    pub dprime_zero_odd: bool,
}

fn fact(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, m| acc * BigInt::from(m))
}

/// c_j = Σ_{k ≥ m−j, k ≤ m} (m+k)!/(k!(m−k)!) (−2)^{−k} / (k+j−m)!.
pub fn c_coefficient(m: usize, j: usize) -> BigRational {
    let mut sum = BigRational::zero();
    for k in m.saturating_sub(j)..=m {
        let num = fact(m + k);
        let den = fact(k) * fact(m - k) * fact(k + j - m) * BigInt::from(2).pow(k as u32);
        let mut t = BigRational::new(num, den);
        if k % 2 == 1 {
            t = -t;
        }
        sum += t;
    }
    sum
}

/// dⱼ (m = (n−3)/2) and d′ⱼ (m = (n−1)/2) for j ≤ 2n.
pub fn odd_dim_coeffs(n: usize) -> Result<OddDimCoeffs> {
    if n % 2 == 0 || n < 3 {
        return invalid(format!("odd_dim_coeffs needs odd n >= 3, got {n}"));
    }
    if n > 13 {
        return invalid(format!("odd_dim_coeffs supports n <= 13, got {n}"));
    }
    let d = (0..=2 * n).map(|j| c_coefficient((n - 3) / 2, j)).collect();
    let dprime = (0..=2 * n).map(|j| c_coefficient((n - 1) / 2, j)).collect();
    Ok(OddDimCoeffs { n, d, dprime })
}

impl OddDimCoeffs {
    pub fn vanishing(&self) -> VanishingReport {
        let n = self.n;
        let odd_zero = |v: &[BigRational], upto: usize| (1..=upto).step_by(2).all(|j| v[j].is_zero());
        VanishingReport {
            n,
            d_zero_odd: n < 5 || odd_zero(&self.d, n - 4),
            dprime_zero_odd: odd_zero(&self.dprime, n - 2),
        }
    }

    pub fn to_f64(v: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        v.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn three_dim_is_exponential() {
        let c = odd_dim_coeffs(3).unwrap();
        for (j, d) in c.d.iter().enumerate() {
            assert_eq!(*d, BigRational::new(BigInt::one(), fact(j)));
        }
    }

    #[test]
    fn five_dim_d1() {
        let c = odd_dim_coeffs(5).unwrap();
        assert!(c.d[1].is_zero());
        assert_eq!(c.d[0], q(-1, 1));
    }

    #[test]
    fn seven_dim_dprime() {
        let c = odd_dim_coeffs(7).unwrap();
        for j in [1, 3, 5] {
            assert!(c.dprime[j].is_zero());
        }
        assert!(!c.dprime[7].is_zero());
    }

    #[test]
    fn rejects_even() {
        assert!(odd_dim_coeffs(4).is_err());
        assert!(odd_dim_coeffs(1).is_err());
    }
}
