//! Scalar types shared by exact and floating evaluation.
//!
//! Everything that evaluates a polynomial (parametrization, Jacobians,
//! determinants at sample points) is written once against [`Scalar`] and
//! instantiated for exact rationals, a word-sized prime field, and real or
//! complex floats.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Ring elements a polynomial can be evaluated in.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(q: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// Scalars with exact division, used by elimination routines.
pub trait Field: Scalar + Div<Output = Self> {}

impl<T> Field for T where T: Scalar + Div<Output = T> {}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

impl Scalar for f64 {
    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for f32 {
    fn from_rational(q: &BigRational) -> Self {
        q.to_f32().unwrap_or(f32::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f32
    }
}

impl<T> Scalar for Complex<T>
where
    T: Scalar + num_traits::Num + Copy,
{
    fn from_rational(q: &BigRational) -> Self {
        Complex::new(T::from_rational(q), T::zero())
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(T::from_i64(v), T::zero())
    }
}

/// The prime field of order 2^61 - 1.
///
/// Reduction is a ring homomorphism from rationals whose denominators are
/// coprime to the modulus, so a nonzero value here certifies a nonzero
/// rational value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Fp(u64);

impl Fp {
    pub const MODULUS: u64 = (1u64 << 61) - 1;

    pub fn new(v: u64) -> Self {
        Fp(v % Self::MODULUS)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn reduce128(v: u128) -> u64 {
        let p = Self::MODULUS as u128;
        let folded = (v & p) + (v >> 61);
        let folded = (folded & p) + (folded >> 61);
        let r = folded as u64;
        if r >= Self::MODULUS {
            r - Self::MODULUS
        } else {
            r
        }
    }

    pub fn inverse(self) -> Option<Fp> {
        if self.0 == 0 {
            return None;
        }
        // Fermat: a^(p-2)
        let mut e = Self::MODULUS - 2;
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    }

    fn from_bigint(v: &BigInt) -> Fp {
        let m = BigInt::from(Self::MODULUS);
        let r = ((v % &m) + &m) % &m;
        Fp(r.to_u64().expect("reduced residue fits in u64"))
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let s = self.0 + rhs.0;
        Fp(if s >= Self::MODULUS { s - Self::MODULUS } else { s })
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        Fp(if self.0 >= rhs.0 { self.0 - rhs.0 } else { self.0 + Self::MODULUS - rhs.0 })
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        Fp(Self::reduce128(self.0 as u128 * rhs.0 as u128))
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(Self::MODULUS - self.0)
        }
    }
}

impl Div for Fp {
    type Output = Fp;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Fp) -> Fp {
        self * rhs.inverse().expect("division by zero in Fp")
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp(1)
    }
}

impl Scalar for Fp {
    fn from_rational(q: &BigRational) -> Self {
        let num = Fp::from_bigint(q.numer());
        let den = Fp::from_bigint(q.denom());
        num / den
    }
    fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Fp::new(v as u64)
        } else {
            -Fp::new(v.unsigned_abs())
        }
    }
}

/// Determinant by Gaussian elimination over an exact field.
///
/// The matrix is consumed row-major; the first nonzero entry in the pivot
/// column is used, which is only meaningful for exact arithmetic.
pub fn det_exact<F: Field>(mut m: Vec<Vec<F>>) -> F {
    let n = m.len();
    let mut det = F::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return F::zero();
        };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let pivot = m[k][k].clone();
        det = det * pivot.clone();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone() / pivot.clone();
            for j in k..n {
                let t = f.clone() * m[k][j].clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
    }
    det
}

/// Rank by Gaussian elimination over an exact field.
pub fn rank_exact<F: Field>(mut m: Vec<Vec<F>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        let pivot = m[rank][c].clone();
        for i in rank + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / pivot.clone();
            for j in c..cols {
                let t = f.clone() * m[rank][j].clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Convenience constructor for exact rationals.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Absolute value of a rational as `f64`, for diagnostics.
pub fn rat_abs_f64(q: &BigRational) -> f64 {
    q.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_field_axioms_on_samples() {
        let a = Fp::new(123_456_789_012_345);
        let b = Fp::new(987_654_321);
        assert_eq!(a * a.inverse().unwrap(), Fp::one());
        assert_eq!((a + b) - b, a);
        assert_eq!(a * (b + Fp::one()), a * b + a);
        assert_eq!(-a + a, Fp::zero());
    }

    #[test]
    fn fp_reduces_rationals_consistently() {
        let q = rat(-7, 3);
        let v = Fp::from_rational(&q);
        assert_eq!(v * Fp::from_i64(3), Fp::from_i64(-7));
    }

    #[test]
    fn exact_det_and_rank() {
        let m = vec![
            vec![rat(2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(3, 1), rat(1, 1)],
            vec![rat(0, 1), rat(1, 1), rat(4, 1)],
        ];
        assert_eq!(det_exact(m.clone()), rat(18, 1));
        assert_eq!(rank_exact(m), 3);
        let singular = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        assert_eq!(det_exact(singular.clone()), rat(0, 1));
        assert_eq!(rank_exact(singular), 1);
    }

    #[test]
    fn powu_matches_repeated_product() {
        let x = rat(3, 2);
        assert_eq!(x.powu(5), rat(243, 32));
        assert_eq!(2.0f64.powu(10), 1024.0);
    }
}
