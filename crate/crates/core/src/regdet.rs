//! Regularized Fredholm determinants and the product-formula correction X_k.
//!
//! Words over the two-letter alphabet {A, B} are kept with exact rational
//! coefficients and only turned into matrices at the very end.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{ComplexField, DMatrix, RealField};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Largest k supported by the combinatorial correction.
pub const MAX_XK: usize = 5;

fn czero<T: RealField + Copy>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cone<T: RealField + Copy>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

fn from_f64<T: RealField + Copy>(x: f64) -> T {
    nalgebra::convert(x)
}

/// det_k(I + A) from the eigenvalues of A.
pub fn regdet<T: RealField + Copy>(k: usize, a: &DMatrix<Complex<T>>) -> Result<Complex<T>> {
    if k == 0 {
        return invalid("regularization order k must be >= 1");
    }
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let mut det = cone::<T>();
    for lam in linalg::eigenvalues(a)? {
        let mut s = czero::<T>();
        let mut p = cone::<T>();
        for m in 1..k {
            p *= lam;
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            s += p * (sign / from_f64::<T>(m as f64));
        }
        det *= (cone::<T>() + lam) * ComplexField::exp(s);
    }
    Ok(det)
}

/// A letter of the free algebra on two generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    B,
}

pub type Word = Vec<Letter>;

/// Formal linear combination of words with rational coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordPoly {
    pub terms: BTreeMap<Word, BigRational>,
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl WordPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(word: Word, coef: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(word, coef);
        p
    }

    pub fn letter(l: Letter) -> Self {
        Self::monomial(vec![l], BigRational::one())
    }

    pub fn add_term(&mut self, word: Word, coef: BigRational) {
        let slot = self.terms.entry(word.clone()).or_insert_with(BigRational::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn add(&mut self, other: &WordPoly) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &BigRational) -> WordPoly {
        let mut out = WordPoly::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &WordPoly) -> WordPoly {
        let mut out = WordPoly::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                out.add_term(w, a * b);
            }
        }
        out
    }

    pub fn coefficient(&self, w: &[Letter]) -> BigRational {
        self.terms.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Shortest and longest word length, if nonzero.
    pub fn length_range(&self) -> Option<(usize, usize)> {
        let lo = self.terms.keys().map(Vec::len).min()?;
        let hi = self.terms.keys().map(Vec::len).max()?;
        Some((lo, hi))
    }

    /// Sum of coefficients over every cyclic rotation of `w`.
    pub fn cyclic_sum(&self, w: &[Letter]) -> BigRational {
        if w.is_empty() {
            return self.coefficient(w);
        }
        (0..w.len())
            .map(|m| {
                let mut r = w.to_vec();
                r.rotate_left(m);
                self.coefficient(&r)
            })
            .fold(BigRational::zero(), |s, c| s + c)
    }

    /// Substitute matrices for the two letters.
    pub fn eval<T: RealField + Copy>(
        &self,
        a: &DMatrix<Complex<T>>,
        b: &DMatrix<Complex<T>>,
    ) -> DMatrix<Complex<T>> {
        let n = a.nrows();
        let mut out = DMatrix::from_element(n, n, czero::<T>());
        for (w, c) in &self.terms {
            let mut prod = DMatrix::<Complex<T>>::identity(n, n);
            for l in w {
                prod = match l {
                    Letter::A => prod * a,
                    Letter::B => prod * b,
                };
            }
            let cf = Complex::new(from_f64::<T>(c.to_f64().unwrap_or(f64::NAN)), T::zero());
            out += prod * cf;
        }
        out
    }
}

impl fmt::Display for WordPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let sep = if i == 0 {
                if c.is_negative() { "-" } else { "" }
            } else if c.is_negative() {
                " - "
            } else {
                " + "
            };
            let word: String = w.iter().map(|l| if *l == Letter::A { 'A' } else { 'B' }).collect();
            write!(f, "{sep}({}){word}", c.abs())?;
        }
        Ok(())
    }
}

fn ab_pair() -> Word {
    vec![Letter::A, Letter::B]
}

/// Σ_{𝒜⊆{1..j}} (−1)^{|𝒜|} y_𝒜 restricted by a predicate on j + |𝒜|.
fn subset_sum(j: usize, keep: impl Fn(usize) -> bool) -> WordPoly {
    let sum_ab = {
        let mut p = WordPoly::letter(Letter::A);
        p.add(&WordPoly::letter(Letter::B));
        p
    };
    let ab = WordPoly::monomial(ab_pair(), BigRational::one());
    let mut out = WordPoly::zero();
    for mask in 0u32..(1 << j) {
        let size = mask.count_ones() as usize;
        if !keep(j + size) {
            continue;
        }
        let mut y = WordPoly::monomial(Vec::new(), BigRational::one());
        for m in 0..j {
            y = y.mul(if mask & (1 << m) != 0 { &ab } else { &sum_ab });
        }
        let sign = if size % 2 == 0 { 1 } else { -1 };
        out.add(&y.scale(&rat(sign, 1)));
    }
    out
}

/// The word expansion of X_k(A, B).
pub fn xk_words(k: usize) -> Result<WordPoly> {
    if k == 0 || k > MAX_XK {
        return invalid(format!("X_k is available for k in 1..={MAX_XK}, got {k}"));
    }
    let mut x = WordPoly::zero();
    for j in 1..k {
        x.add(&subset_sum(j, |len| len >= k).scale(&rat(1, j as i64)));
    }
    Ok(x)
}

/// The complementary low-degree part y_k.
pub fn yk_words(k: usize) -> Result<WordPoly> {
    if k == 0 || k > MAX_XK {
        return invalid(format!("y_k is available for k in 1..={MAX_XK}, got {k}"));
    }
    let mut y = WordPoly::zero();
    for j in 1..k {
        y.add(&subset_sum(j, |len| len < k).scale(&rat(1, j as i64)));
    }
    Ok(y)
}

/// z_{k₁,k₂} from three-block partitions of {1..j}.
pub fn z_partition(k1: usize, k2: usize) -> WordPoly {
    let mut out = WordPoly::zero();
    if k1 == 0 && k2 == 0 {
        return out;
    }
    if k2 == 0 {
        return WordPoly::monomial(vec![Letter::A; k1], rat(1, k1 as i64));
    }
    if k1 == 0 {
        return WordPoly::monomial(vec![Letter::B; k2], rat(1, k2 as i64));
    }
    for j in 1..=k1 + k2 {
        let total = 3usize.pow(j as u32);
        for code in 0..total {
            let mut c = code;
            let mut counts = [0usize; 3];
            let mut word = Word::new();
            for _ in 0..j {
                let cls = c % 3;
                c /= 3;
                counts[cls] += 1;
                match cls {
                    0 => word.push(Letter::A),
                    1 => word.push(Letter::B),
                    _ => word.extend(ab_pair()),
                }
            }
            if counts[0] + counts[2] != k1 || counts[1] + counts[2] != k2 {
                continue;
            }
            let sign = if counts[2] % 2 == 0 { 1 } else { -1 };
            out.add_term(word, rat(sign, j as i64));
        }
    }
    out
}

/// Number of adjacent `AB` pairs in a word.
pub fn ab_count(w: &[Letter]) -> usize {
    w.windows(2).filter(|p| p[0] == Letter::A && p[1] == Letter::B).count()
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// z_{k₁,k₂} through the closed coefficient Σ_ℓ (−1)^ℓ C(n(w), ℓ)/(k₁+k₂−ℓ).
pub fn z_closed(k1: usize, k2: usize) -> WordPoly {
    if k1 == 0 || k2 == 0 {
        return z_partition(k1, k2);
    }
    let len = k1 + k2;
    let mut out = WordPoly::zero();
    for mask in 0u64..(1 << len) {
        if mask.count_ones() as usize != k2 {
            continue;
        }
        let w: Word = (0..len).map(|i| if mask & (1 << i) != 0 { Letter::B } else { Letter::A }).collect();
        let nw = ab_count(&w);
        let mut c = BigRational::zero();
        for l in 0..=nw {
            let sign = if l % 2 == 0 { 1 } else { -1 };
            c += BigRational::new(binomial(nw, l) * BigInt::from(sign), BigInt::from(len - l));
        }
        out.add_term(w, c);
    }
    out
}

fn check_pair<T: RealField + Copy>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(())
}

/// X_k(A, B) assembled from the combinatorial word sum.
pub fn xk_correction<T: RealField + Copy>(
    k: usize,
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>> {
    check_pair(a, b)?;
    Ok(xk_words(k)?.eval(a, b))
}

/// Closed-form tr X_k(A, B) for k ≤ 4.
pub fn trace_xk<T: RealField + Copy>(
    k: usize,
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
) -> Result<Complex<T>> {
    check_pair(a, b)?;
    let tr = |m: DMatrix<Complex<T>>| linalg::trace(&m);
    let half = Complex::new(from_f64::<T>(0.5), T::zero());
    let third = Complex::new(from_f64::<T>(1.0 / 3.0), T::zero());
    let ab = a * b;
    match k {
        1 => Ok(czero()),
        2 => Ok(-tr(ab)),
        3 => Ok(-(tr(&ab * a) + tr(b * &ab) - tr(&ab * &ab) * half)),
        4 => {
            let ab2 = &ab * &ab;
            let s = tr(a * a * a * b) + tr(a * a * b * b) + tr(a * b * b * b) + tr(ab2.clone()) * half
                - tr(&ab2 * a)
                - tr(b * &ab2)
                + tr(&ab2 * &ab) * third;
            Ok(-s)
        }
        _ => invalid(format!("closed-form trace known for k in 1..=4, got {k}")),
    }
}

/// Relative residual of det_k((I−A)(I−B)) = det_k(I−A) det_k(I−B) exp(tr X_k).
pub fn product_residual<T: RealField + Copy>(
    k: usize,
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
) -> Result<T> {
    check_pair(a, b)?;
    let n = a.nrows();
    let id = DMatrix::<Complex<T>>::identity(n, n);
    let floor = from_f64::<T>(1e-12);
    let ia = &id - a;
    let ib = &id - b;
    for (name, m) in [("I - A", &ia), ("I - B", &ib)] {
        if ComplexField::modulus(m.determinant()) < floor {
            return Err(Error::Singular(format!("{name} is numerically singular")));
        }
    }
    let lhs = regdet(k, &(&ia * &ib - &id))?;
    let tx = linalg::trace(&xk_correction(k, a, b)?);
    let rhs = regdet(k, &(-a))? * regdet(k, &(-b))? * ComplexField::exp(tx);
    Ok(ComplexField::modulus(lhs - rhs) / ComplexField::modulus(lhs))
}
