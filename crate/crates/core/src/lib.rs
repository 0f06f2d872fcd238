//! Numerical toolkit for free massless Dirac operators in arbitrary dimension.
//!
//! The crate bundles Clifford representations, Hankel-type special functions,
//! free Green's kernels, Nyström discretizations, regularized Fredholm
//! determinants, spectral shift functions and a few finite-dimensional
//! resolvent-algebra utilities.

pub mod clifford;
pub mod discretize;
pub mod error;
pub mod green;
pub mod linalg;
pub mod potential;
pub mod regdet;
pub mod resolvalg;
pub mod specfun;
pub mod ssf;

pub use error::{Error, Result};

/// Working real type.
pub type Real = f64;
/// Working complex type.
pub type Cplx = num_complex::Complex<Real>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<Cplx>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<Cplx>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
