//! Cayley-Menger varieties of simplices and their algebraic matroids.
//!
//! The crate models the variety of squared face volumes of an n-simplex,
//! enumerates subsets of faces up to vertex relabelling, decides which
//! subsets are bases of the algebraic matroid, counts complex solutions of
//! the resulting square systems, and computes their monodromy groups.

pub mod bkk;
pub mod homotopy;
pub mod lab;
pub mod matroid;
pub mod orbits;
pub mod perm;
pub mod poly;
pub mod scalar;
pub mod simplex;

pub use num_bigint::BigInt;
pub use num_complex::Complex64;
pub use num_rational::BigRational;

/// Exact rational numbers.
pub type Rational = BigRational;
/// Double precision complex numbers.
pub type C64 = Complex64;
/// Polynomials with rational coefficients.
pub type QPoly = poly::MultiPoly<BigRational>;
/// Polynomials with integer coefficients.
pub type ZPoly = poly::MultiPoly<BigInt>;
