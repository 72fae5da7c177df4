//! Sparse multivariate polynomials with exact coefficients.
//!
//! Terms are kept sorted in descending graded-lex order over a shared,
//! ordered variable list. Coefficients are generic over [`Coeff`]; the two
//! instantiations used in practice are [`QPoly`](crate::QPoly) (rationals)
//! and [`ZPoly`](crate::ZPoly) (integers, used inside fraction-free
//! determinant computation).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable universes differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("ragged matrix")]
    Ragged,
}

/// Exponent vector with its cached total degree.
///
/// The derived ordering compares total degree first and then exponents
/// lexicographically, which is graded-lex with the first variable largest.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: u32,
    exps: SmallVec<[u8; 16]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { deg: 0, exps: SmallVec::from_elem(0, nvars) }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.exps[i] = 1;
        m.deg = 1;
        m
    }

    pub fn from_exponents(exps: &[u8]) -> Self {
        Monomial { deg: exps.iter().map(|&e| e as u32).sum(), exps: SmallVec::from_slice(exps) }
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
            .collect();
        Monomial { deg: self.deg + other.deg, exps }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = SmallVec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(other.exps.iter()) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial { deg: self.deg - other.deg, exps })
    }
}

impl Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps.as_slice())
    }
}

/// Coefficient rings.
pub trait Coeff:
    Clone
    + Debug
    + Display
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
    /// `self / other` if the quotient lies in the ring.
    fn exact_div(&self, other: &Self) -> Option<Self>;

    fn to_scalar<T: Scalar>(&self) -> T;

    fn is_negative(&self) -> bool;
}

impl Coeff for BigRational {
    fn exact_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            None
        } else {
            Some(self / other)
        }
    }
    fn to_scalar<T: Scalar>(&self) -> T {
        T::from_rational(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

impl Coeff for BigInt {
    fn exact_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(other);
        r.is_zero().then_some(q)
    }
    fn to_scalar<T: Scalar>(&self) -> T {
        T::from_rational(&BigRational::from_integer(self.clone()))
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// Shared, ordered list of variable names.
pub type Vars = Arc<[String]>;

pub fn vars_from<I, S>(names: I) -> Vars
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect::<Vec<_>>().into()
}

#[derive(Clone)]
pub struct MultiPoly<C> {
    vars: Vars,
    // descending graded-lex, no zero coefficients
    terms: Vec<(Monomial, C)>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(vars: Vars) -> Self {
        MultiPoly { vars, terms: Vec::new() }
    }

    pub fn constant(vars: Vars, c: C) -> Self {
        let n = vars.len();
        let terms = if c.is_zero() { Vec::new() } else { vec![(Monomial::one(n), c)] };
        MultiPoly { vars, terms }
    }

    pub fn one(vars: Vars) -> Self {
        Self::constant(vars, C::one())
    }

    pub fn var(vars: Vars, i: usize) -> Self {
        let n = vars.len();
        assert!(i < n, "variable index {i} out of range");
        MultiPoly { vars, terms: vec![(Monomial::var(n, i), C::one())] }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms<I>(vars: Vars, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut acc: hashbrown::HashMap<Monomial, C> = hashbrown::HashMap::new();
        for (m, c) in terms {
            assert_eq!(m.exps.len(), vars.len(), "monomial arity");
            match acc.get_mut(&m) {
                Some(v) => *v = v.clone() + c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Self::from_map(vars, acc)
    }

    fn from_map(vars: Vars, acc: hashbrown::HashMap<Monomial, C>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        MultiPoly { vars, terms }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |(m, _)| m.deg)
    }

    /// Coefficient of a given monomial, zero if absent.
    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.binary_search_by(|(t, _)| m.cmp(t)).map(|i| self.terms[i].1.clone()).unwrap_or_else(|_| C::zero())
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VariableMismatch { left: self.vars.to_vec(), right: other.vars.to_vec() })
        }
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() || j < b.len() {
            let ord = if i == a.len() {
                Ordering::Less
            } else if j == b.len() {
                Ordering::Greater
            } else {
                a[i].0.cmp(&b[j].0)
            };
            match ord {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate_other { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c =
                        if negate_other { a[i].1.clone() - b[j].1.clone() } else { a[i].1.clone() + b[j].1.clone() };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        MultiPoly { vars: self.vars.clone(), terms: out }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        Ok(self.merge(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        Ok(self.merge(other, true))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.vars.clone()));
        }
        let (small, large) = if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        if small.terms.len() == 1 {
            let (m, c) = &small.terms[0];
            // multiplying by a monomial preserves the term order
            let terms = large
                .terms
                .iter()
                .map(|(t, d)| (t.mul(m), d.clone() * c.clone()))
                .filter(|(_, d)| !d.is_zero())
                .collect();
            return Ok(MultiPoly { vars: self.vars.clone(), terms });
        }
        // products collide heavily, so size for the larger factor and let it grow
        let mut acc: hashbrown::HashMap<Monomial, C> = hashbrown::HashMap::with_capacity(2 * large.terms.len());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&m) {
                    Some(v) => *v = std::mem::replace(v, C::zero()) + c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Ok(Self::from_map(self.vars.clone(), acc))
    }

    pub fn scalar_mul(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        let terms = self.terms.iter().map(|(m, d)| (m.clone(), d.clone() * c.clone())).collect();
        MultiPoly { vars: self.vars.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.vars.clone());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn partial_derivative(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps[i] > 0)
            .map(|(m, c)| {
                let e = m.exps[i];
                let mut m2 = m.clone();
                m2.exps[i] -= 1;
                m2.deg -= 1;
                let mut k = C::zero();
                for _ in 0..e {
                    k = k + C::one();
                }
                (m2, c.clone() * k)
            })
            .collect::<Vec<_>>();
        // derivative can reorder terms of equal degree only consistently; re-sort to be safe
        let mut p = MultiPoly { vars: self.vars.clone(), terms };
        p.terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        p
    }

    /// Evaluates at a point of any [`Scalar`] type.
    pub fn evaluate<T: Scalar>(&self, point: &[T]) -> Result<T, PolyError> {
        if point.len() != self.nvars() {
            return Err(PolyError::PointLength { expected: self.nvars(), got: point.len() });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked<T: Scalar>(&self, point: &[T]) -> T {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t: T = c.to_scalar();
            for (x, &e) in point.iter().zip(m.exps.iter()) {
                if e > 0 {
                    t = t * x.powu(e as u32);
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a remainder.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        self.check_vars(divisor).ok()?;
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        if divisor.terms.len() == 1 {
            let (dm, dc) = &divisor.terms[0];
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                terms.push((m.div(dm)?, c.exact_div(dc)?));
            }
            return Some(MultiPoly { vars: self.vars.clone(), terms });
        }
        let (lead_m, lead_c) = &divisor.terms[0];
        let mut rem: BTreeMap<Monomial, C> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.div(lead_m)?;
            let qc = c.exact_div(lead_c)?;
            for (dm, dc) in divisor.terms.iter().skip(1) {
                let pm = qm.mul(dm);
                let pc = qc.clone() * dc.clone();
                match rem.get_mut(&pm) {
                    Some(v) => {
                        let nv = v.clone() - pc;
                        if nv.is_zero() {
                            rem.remove(&pm);
                        } else {
                            *v = nv;
                        }
                    }
                    None => {
                        rem.insert(pm, -pc);
                    }
                }
            }
            quot.push((qm, qc));
        }
        // quotient terms are produced in descending order
        Some(MultiPoly { vars: self.vars.clone(), terms: quot })
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), f(c))).filter(|(_, c)| !c.is_zero()).collect();
        MultiPoly { vars: self.vars.clone(), terms }
    }

    /// Re-expresses the polynomial over a different variable list, which must
    /// contain every variable this polynomial actually uses.
    pub fn rename_into(&self, target: &Vars) -> Option<Self> {
        let map: Vec<Option<usize>> = self.vars.iter().map(|v| target.iter().position(|t| t == v)).collect();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut e = vec![0u8; target.len()];
            for (i, &x) in m.exps.iter().enumerate() {
                if x > 0 {
                    e[map[i]?] = x;
                }
            }
            terms.push((Monomial::from_exponents(&e), c.clone()));
        }
        Some(Self::from_terms(target.clone(), terms))
    }
}

impl MultiPoly<BigRational> {
    /// Splits into `scale * z` with `z` primitive over the integers.
    pub fn to_primitive_integer(&self) -> (BigRational, MultiPoly<BigInt>) {
        if self.is_zero() {
            return (BigRational::one(), MultiPoly::zero(self.vars.clone()));
        }
        let lcm = self.terms.iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let ints: Vec<BigInt> =
            self.terms.iter().map(|(_, c)| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let terms = self.terms.iter().zip(ints).map(|((m, _), c)| (m.clone(), c / &g)).collect();
        (BigRational::new(g, lcm), MultiPoly { vars: self.vars.clone(), terms })
    }
}

impl MultiPoly<BigInt> {
    /// Gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms.iter().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c))
    }

    pub fn to_rational(&self) -> MultiPoly<BigRational> {
        self.map_coeffs(|c| BigRational::from_integer(c.clone()))
    }
}

impl<C: Coeff> PartialEq for MultiPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.terms == other.terms
    }
}

impl<C: Coeff> Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

/// Canonical text form, e.g. `16 * x123 - 2 * x12 x13 + x12^2`.
impl<C: Coeff> Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let factors: Vec<String> = m
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], e) })
                .collect();
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join(" "))?;
            } else {
                write!(f, "{abs} * {}", factors.join(" "))?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Add for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: Self) -> MultiPoly<C> {
        self.checked_add(rhs).expect("polynomial addition")
    }
}

impl<C: Coeff> Sub for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, rhs: Self) -> MultiPoly<C> {
        self.checked_sub(rhs).expect("polynomial subtraction")
    }
}

impl<C: Coeff> Mul for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: Self) -> MultiPoly<C> {
        self.checked_mul(rhs).expect("polynomial multiplication")
    }
}

impl<C: Coeff> Neg for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect();
        MultiPoly { vars: self.vars.clone(), terms }
    }
}

/// Rectangular matrix of polynomials over one variable universe.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<C: Coeff> {
    vars: Vars,
    rows: usize,
    cols: usize,
    entries: Vec<MultiPoly<C>>,
}

impl<C: Coeff> PolyMatrix<C> {
    pub fn from_rows(vars: Vars, rows: Vec<Vec<MultiPoly<C>>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(PolyError::Ragged);
            }
            for p in row {
                if p.vars != vars {
                    return Err(PolyError::VariableMismatch { left: vars.to_vec(), right: p.vars.to_vec() });
                }
                entries.push(p);
            }
        }
        Ok(PolyMatrix { vars, rows: r, cols: c, entries })
    }

    pub fn zeros(vars: Vars, rows: usize, cols: usize) -> Self {
        let entries = vec![MultiPoly::zero(vars.clone()); rows * cols];
        PolyMatrix { vars, rows, cols, entries }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: MultiPoly<C>) {
        assert!(p.vars == self.vars);
        self.entries[i * self.cols + j] = p;
    }

    pub fn row(&self, i: usize) -> &[MultiPoly<C>] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                entries.push(self.get(i, j).clone());
            }
        }
        PolyMatrix { vars: self.vars.clone(), rows: rows.len(), cols: cols.len(), entries }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.submatrix(rows, &cols)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, PolyError> {
        if self.cols != other.rows {
            return Err(PolyError::NotSquare { rows: self.cols, cols: other.rows });
        }
        let mut out = Self::zeros(self.vars.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = MultiPoly::zero(self.vars.clone());
                for k in 0..self.cols {
                    acc = acc.checked_add(&self.get(i, k).checked_mul(other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn evaluate<T: Scalar>(&self, point: &[T]) -> Result<Vec<Vec<T>>, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::PointLength { expected: self.vars.len(), got: point.len() });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().map(|p| p.eval_unchecked(point)).collect()).collect())
    }

    fn square_size(&self) -> Result<usize, PolyError> {
        if self.rows != self.cols {
            Err(PolyError::NotSquare { rows: self.rows, cols: self.cols })
        } else {
            Ok(self.rows)
        }
    }
}

/// Determinant by Laplace expansion along the first row.
///
/// Exponential; used for matrices below size 4 and as a test oracle.
pub fn cofactor_det<C: Coeff>(m: &PolyMatrix<C>) -> Result<MultiPoly<C>, PolyError> {
    let n = m.square_size()?;
    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..n).collect();
    Ok(cofactor_rec(m, &rows, &cols))
}

fn cofactor_rec<C: Coeff>(m: &PolyMatrix<C>, rows: &[usize], cols: &[usize]) -> MultiPoly<C> {
    if rows.is_empty() {
        return MultiPoly::one(m.vars.clone());
    }
    if rows.len() == 1 {
        return m.get(rows[0], cols[0]).clone();
    }
    let r = rows[0];
    let mut acc = MultiPoly::zero(m.vars.clone());
    for (k, &c) in cols.iter().enumerate() {
        let e = m.get(r, c);
        if e.is_zero() {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = cofactor_rec(m, &rows[1..], &sub_cols);
        let term = e * &minor;
        acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Exact determinant of a square rational polynomial matrix.
///
/// Structurally singular matrices short-circuit to zero. While some row or
/// column has at most two nonzero entries the determinant is expanded along
/// it; below size 4 cofactor expansion finishes, and otherwise fraction-free
/// (Bareiss) elimination over Q[x] handles the dense remainder.
pub fn poly_det(m: &PolyMatrix<BigRational>) -> Result<MultiPoly<BigRational>, PolyError> {
    let n = m.square_size()?;
    Ok(sparse_det(m, (0..n).collect(), (0..n).collect()))
}

fn sparse_det(m: &PolyMatrix<BigRational>, rows: Vec<usize>, cols: Vec<usize>) -> MultiPoly<BigRational> {
    let k = rows.len();
    if k < 4 {
        return cofactor_rec(m, &rows, &cols);
    }
    if structural_rank(m, &rows, &cols) < k {
        return MultiPoly::zero(m.vars.clone());
    }
    // (nonzero count, along a row?, position)
    let mut best = (usize::MAX, true, 0);
    for (i, &r) in rows.iter().enumerate() {
        let cnt = cols.iter().filter(|&&c| !m.get(r, c).is_zero()).count();
        if cnt < best.0 {
            best = (cnt, true, i);
        }
    }
    for (j, &c) in cols.iter().enumerate() {
        let cnt = rows.iter().filter(|&&r| !m.get(r, c).is_zero()).count();
        if cnt < best.0 {
            best = (cnt, false, j);
        }
    }
    if best.0 > 2 {
        let a = rows.iter().map(|&r| cols.iter().map(|&c| m.get(r, c).clone()).collect()).collect();
        return bareiss(a, &m.vars);
    }
    let (_, along_row, pos) = best;
    let mut acc = MultiPoly::zero(m.vars.clone());
    for other in 0..k {
        let (i, j) = if along_row { (pos, other) } else { (other, pos) };
        let e = m.get(rows[i], cols[j]);
        if e.is_zero() {
            continue;
        }
        let sub_rows: Vec<usize> = rows.iter().enumerate().filter(|&(x, _)| x != i).map(|(_, &r)| r).collect();
        let sub_cols: Vec<usize> = cols.iter().enumerate().filter(|&(x, _)| x != j).map(|(_, &c)| c).collect();
        let term = e * &sparse_det(m, sub_rows, sub_cols);
        acc = if (i + j) % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Size of a maximum matching between rows and columns on nonzero entries.
fn structural_rank<C: Coeff>(m: &PolyMatrix<C>, rows: &[usize], cols: &[usize]) -> usize {
    fn augment<C: Coeff>(
        m: &PolyMatrix<C>,
        rows: &[usize],
        cols: &[usize],
        i: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..cols.len() {
            if seen[j] || m.get(rows[i], cols[j]).is_zero() {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|o| augment(m, rows, cols, o, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; cols.len()];
    (0..rows.len()).filter(|&i| augment(m, rows, cols, i, &mut vec![false; cols.len()], &mut owner)).count()
}

/// Rescales a row to primitive integer coefficients, returning the factor
/// that was divided out, or `None` for a zero row.
fn normalize_row(row: &mut [MultiPoly<BigRational>]) -> Option<BigRational> {
    let coeffs = row.iter().flat_map(|p| p.terms.iter().map(|(_, c)| c));
    let mut lcm = BigInt::one();
    let mut gcd = BigInt::zero();
    for c in coeffs {
        lcm = lcm.lcm(c.denom());
        gcd = gcd.gcd(c.numer());
    }
    if gcd.is_zero() {
        return None;
    }
    let s = BigRational::new(gcd, lcm);
    if !s.is_one() {
        let inv = s.recip();
        for p in row.iter_mut() {
            *p = p.scalar_mul(&inv);
        }
    }
    Some(s)
}

/// Fraction-free elimination. Rows are kept primitive over the integers;
/// the divisions are exact because the working matrix is always a row
/// rescaling of the input, for which Sylvester's identity still holds.
pub fn bareiss(mut a: Vec<Vec<MultiPoly<BigRational>>>, vars: &Vars) -> MultiPoly<BigRational> {
    let n = a.len();
    let mut factor = BigRational::one();
    for row in a.iter_mut() {
        match normalize_row(row) {
            Some(s) => factor *= s,
            None => return MultiPoly::zero(vars.clone()),
        }
    }
    let mut prev = MultiPoly::<BigRational>::one(vars.clone());
    for k in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, p) in row.iter().enumerate().skip(k) {
                if !p.is_zero() && best.is_none_or(|(_, _, t)| p.num_terms() < t) {
                    best = Some((i, j, p.num_terms()));
                }
            }
        }
        let Some((pi, pj, _)) = best else {
            return MultiPoly::zero(vars.clone());
        };
        if pi != k {
            a.swap(pi, k);
            factor = -factor;
        }
        if pj != k {
            for row in a.iter_mut() {
                row.swap(pj, k);
            }
            factor = -factor;
        }
        if k + 1 == n {
            break;
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            let lead = a[i][k].clone();
            for j in k + 1..n {
                let x = &pivot * &a[i][j];
                let num = if lead.is_zero() { x } else { &x - &(&lead * &a[k][j]) };
                a[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = MultiPoly::zero(vars.clone());
            match normalize_row(&mut a[i][k + 1..]) {
                Some(s) => factor *= s,
                None => return MultiPoly::zero(vars.clone()),
            }
        }
        prev = pivot;
    }
    a[n - 1][n - 1].scalar_mul(&factor)
}

/// Outcome of a symbolic zero test on a determinant.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroTest {
    /// The determinant is the zero polynomial.
    Zero,
    /// A rational point at which the determinant is nonzero.
    NonZero { witness: Vec<BigRational>, value: BigRational },
}

impl ZeroTest {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroTest::Zero)
    }
}

/// Primes for modular evaluation, largest below 2^61, 2^62, 2^63 and 2^64.
const EVAL_PRIMES: [u64; 4] = [(1 << 61) - 1, (1 << 62) - 57, (1 << 63) - 25, 18_446_744_073_709_551_557];

const M61: u64 = (1 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    let x = a as u128 * b as u128;
    if p == M61 {
        let r = (x as u64 & M61) + (x >> 61) as u64;
        if r >= M61 {
            r - M61
        } else {
            r
        }
    } else {
        (x % p as u128) as u64
    }
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let (s, over) = a.overflowing_add(b);
    if over || s >= p {
        s.wrapping_sub(p)
    } else {
        s
    }
}

/// Whether a square matrix over Z/p is nonsingular. Rows are eliminated by
/// cross-multiplication, which only rescales the determinant by pivots.
fn nonsingular_mod(a: &mut [Vec<u64>], p: u64) -> bool {
    let n = a.len();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i][k] != 0) else {
            return false;
        };
        a.swap(piv, k);
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let d = pivot_row[k];
        for row in rest.iter_mut() {
            let f = row[k];
            if f == 0 {
                continue;
            }
            for j in k + 1..n {
                let s = mulmod(f, pivot_row[j], p);
                let t = mulmod(d, row[j], p);
                row[j] = if t >= s { t - s } else { t + p - s };
            }
            row[k] = 0;
        }
    }
    true
}

/// Coefficient residues per evaluation prime and the nonzero exponents of
/// one term.
type CompiledTerm = (Vec<u64>, Vec<(usize, u8)>);

/// Decides whether `det(m)` vanishes identically without expanding it.
///
/// With integer rows, the determinant is an integer polynomial whose total
/// degree and per-variable degrees are bounded by row sums. Its support then
/// lies in a downward-closed exponent set `A`, and the integer points `A`
/// itself are unisolvent for polynomials supported on `A`. Row-homogeneous
/// matrices are first dehomogenized in the variable with the largest degree
/// bound. Evaluating modulo primes whose product exceeds the coefficient
/// bound makes vanishing on every point a proof of identical vanishing; a
/// nonzero residue is an exact witness.
pub fn det_zero_test(m: &PolyMatrix<BigRational>) -> Result<ZeroTest, PolyError> {
    let k = m.square_size()?;
    let nv = m.vars.len();
    if k == 0 {
        return Ok(ZeroTest::NonZero { witness: vec![BigRational::zero(); nv], value: BigRational::one() });
    }
    let mut rows: Vec<Vec<MultiPoly<BigRational>>> = (0..k).map(|i| m.row(i).to_vec()).collect();
    for row in rows.iter_mut() {
        if normalize_row(row).is_none() {
            return Ok(ZeroTest::Zero);
        }
    }
    let int_rows: Vec<Vec<MultiPoly<BigInt>>> =
        rows.iter().map(|r| r.iter().map(|p| p.map_coeffs(|c| c.numer().clone())).collect()).collect();

    let mut bound = BigInt::one();
    for r in &int_rows {
        let l1: BigInt = r.iter().flat_map(|p| p.terms.iter().map(|(_, c)| c.abs())).sum();
        bound *= l1;
    }
    let mut primes = Vec::new();
    let mut product = BigInt::one();
    for &p in &EVAL_PRIMES {
        if product > bound {
            break;
        }
        primes.push(p);
        product *= BigInt::from(p);
    }
    assert!(product > bound, "coefficient bound exceeds the evaluation primes");

    let homogeneous = int_rows.iter().all(|r| {
        let mut degs = r.iter().flat_map(|p| p.terms.iter().map(|(mo, _)| mo.degree()));
        let first = degs.next();
        degs.all(|d| Some(d) == first)
    });
    // every term of the determinant picks one entry per row and per column
    let entry = |i: usize, c: usize| &int_rows[i][c];
    let line_bound = |f: &dyn Fn(&MultiPoly<BigInt>) -> u32| -> u32 {
        let by_rows: u32 = (0..k).map(|i| (0..k).map(|c| f(entry(i, c))).max().unwrap_or(0)).sum();
        let by_cols: u32 = (0..k).map(|c| (0..k).map(|i| f(entry(i, c))).max().unwrap_or(0)).sum();
        by_rows.min(by_cols)
    };
    let total = line_bound(&|p| p.total_degree());
    let per_var: Vec<u32> = (0..nv)
        .map(|j| line_bound(&|p| p.terms.iter().map(|(mo, _)| mo.exponents()[j] as u32).max().unwrap_or(0)).min(total))
        .collect();
    let pinned = if homogeneous { (0..nv).max_by_key(|&j| per_var[j]) } else { None };

    // each entry as a list of (residues per prime, nonzero exponents)
    let compiled: Vec<Vec<Vec<CompiledTerm>>> = int_rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|p| {
                    p.terms
                        .iter()
                        .map(|(mo, c)| {
                            let res = primes
                                .iter()
                                .map(|&q| {
                                    let q = BigInt::from(q);
                                    u64::try_from(((c % &q) + &q) % &q).expect("reduced residue")
                                })
                                .collect();
                            let ex = mo
                                .exponents()
                                .iter()
                                .enumerate()
                                .filter(|(_, &e)| e > 0)
                                .map(|(j, &e)| (j, e))
                                .collect();
                            (res, ex)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    // the innermost variable is swept per outer point with entries reduced to
    // univariate polynomials in it
    let mut free: Vec<usize> = (0..nv).filter(|&j| Some(j) != pinned).collect();
    let mut point = vec![0u32; nv];
    if let Some(h) = pinned {
        point[h] = 1;
    }
    let inner = free.iter().copied().max_by_key(|&j| per_var[j]);
    if let Some(i) = inner {
        free.retain(|&j| j != i);
    }
    let max_node = total as usize;
    // pow[q][v][e] = v^e mod primes[q]
    let pow: Vec<Vec<Vec<u64>>> = primes
        .iter()
        .map(|&q| {
            (0..=max_node as u64)
                .map(|v| {
                    let mut row = vec![1u64; max_node + 1];
                    for e in 1..=max_node {
                        row[e] = mulmod(row[e - 1], v % q, q);
                    }
                    row
                })
                .collect()
        })
        .collect();

    let mut uni: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); k]; k];
    let mut buf: Vec<Vec<u64>> = vec![vec![0; k]; k];
    // returns the inner value at which some residue of det is nonzero
    let mut sweep = |point: &[u32], budget: u32| -> Option<u32> {
        let top = inner.map_or(0, |i| per_var[i].min(budget));
        for (qi, &q) in primes.iter().enumerate() {
            for (r, row) in compiled.iter().enumerate() {
                for (c, terms) in row.iter().enumerate() {
                    let u = &mut uni[r][c];
                    u.clear();
                    for (coef, ex) in terms {
                        let mut t = coef[qi];
                        let mut de = 0usize;
                        for &(j, e) in ex {
                            if Some(j) == inner {
                                de = e as usize;
                            } else {
                                t = mulmod(t, pow[qi][point[j] as usize][e as usize], q);
                            }
                        }
                        if u.len() <= de {
                            u.resize(de + 1, 0);
                        }
                        u[de] = addmod(u[de], t, q);
                    }
                }
            }
            for v in 0..=top {
                for (r, row) in uni.iter().enumerate() {
                    for (c, u) in row.iter().enumerate() {
                        buf[r][c] = u.iter().rev().fold(0u64, |acc, &x| addmod(mulmod(acc, v as u64, q), x, q));
                    }
                }
                if nonsingular_mod(&mut buf, q) {
                    return Some(v);
                }
            }
        }
        None
    };

    fn walk(
        free: &[usize],
        per_var: &[u32],
        budget: u32,
        point: &mut [u32],
        f: &mut dyn FnMut(&[u32], u32) -> bool,
    ) -> bool {
        let Some((&j, rest)) = free.split_first() else {
            return f(point, budget);
        };
        for a in 0..=per_var[j].min(budget) {
            point[j] = a;
            if walk(rest, per_var, budget - a, point, f) {
                return true;
            }
        }
        point[j] = 0;
        false
    }

    let mut hit: Option<Vec<u32>> = None;
    walk(&free, &per_var, total, &mut point, &mut |pt, budget| match sweep(pt, budget) {
        Some(v) => {
            let mut w = pt.to_vec();
            if let Some(i) = inner {
                w[i] = v;
            }
            hit = Some(w);
            true
        }
        None => false,
    });
    match hit {
        None => Ok(ZeroTest::Zero),
        Some(pt) => {
            let witness: Vec<BigRational> = pt.iter().map(|&v| BigRational::from_integer(v.into())).collect();
            let value = crate::scalar::det_exact(m.evaluate(&witness)?);
            debug_assert!(!value.is_zero());
            Ok(ZeroTest::NonZero { witness, value })
        }
    }
}

/// Decides whether `det(m)` vanishes identically.
pub fn is_identically_zero<R: Rng + ?Sized>(m: &PolyMatrix<BigRational>, rng: &mut R) -> Result<ZeroTest, PolyError> {
    let det = poly_det(m)?;
    if det.is_zero() {
        return Ok(ZeroTest::Zero);
    }
    loop {
        let witness = random_rational_point(rng, m.vars.len());
        let value = det.eval_unchecked(&witness);
        if !value.is_zero() {
            return Ok(ZeroTest::NonZero { witness, value });
        }
    }
}

/// Random rational point with numerators and denominators uniform in `[1, 10^6]`.
pub fn random_rational_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<BigRational> {
    (0..n)
        .map(|_| {
            let p: i64 = rng.random_range(1..=1_000_000);
            let q: i64 = rng.random_range(1..=1_000_000);
            BigRational::new(BigInt::from(p), BigInt::from(q))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{det_exact, rat};
    use crate::QPoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn xy() -> Vars {
        vars_from(["x", "y", "z"])
    }

    fn q(v: i64) -> BigRational {
        rat(v, 1)
    }

    #[test]
    fn difference_of_squares() {
        let v = xy();
        let x = QPoly::var(v.clone(), 0);
        let y = QPoly::var(v.clone(), 1);
        let p = &(&x + &y) * &(&x - &y);
        let expected = &(&x * &x) - &(&y * &y);
        assert_eq!(p, expected);
        assert_eq!(p.to_string(), "x^2 - y^2");
    }

    #[test]
    fn mismatched_universes_are_rejected() {
        let a = QPoly::var(xy(), 0);
        let b = QPoly::var(vars_from(["u", "v", "w"]), 0);
        assert!(matches!(a.checked_add(&b), Err(PolyError::VariableMismatch { .. })));
    }

    #[test]
    fn derivative_and_evaluation() {
        let v = xy();
        let x = QPoly::var(v.clone(), 0);
        let y = QPoly::var(v.clone(), 1);
        let p = &(&x.pow(3) * &y) + &x.scalar_mul(&q(5));
        assert_eq!(p.partial_derivative(0).to_string(), "3 * x^2 y + 5");
        let val = p.evaluate(&[q(2), q(3), q(0)]).unwrap();
        assert_eq!(val, q(34));
        let valf = p.evaluate(&[2.0f64, 3.0, 0.0]).unwrap();
        assert_eq!(valf, 34.0);
    }

    #[test]
    fn exact_division_roundtrip() {
        let v = xy();
        let x = QPoly::var(v.clone(), 0);
        let y = QPoly::var(v.clone(), 1);
        let z = QPoly::var(v.clone(), 2);
        let a = &(&x + &y.scalar_mul(&q(2))) - &z;
        let b = &(&x * &z) + &y.pow(2);
        let prod = &a * &b;
        assert_eq!(prod.exact_div(&b).unwrap(), a);
        assert!(b.exact_div(&a).is_none());
    }

    #[test]
    fn identity_determinant() {
        let v = xy();
        let rows = (0..6)
            .map(|i| (0..6).map(|j| if i == j { QPoly::one(v.clone()) } else { QPoly::zero(v.clone()) }).collect())
            .collect();
        let m = PolyMatrix::from_rows(v.clone(), rows).unwrap();
        assert_eq!(poly_det(&m).unwrap(), QPoly::one(v));
    }

    #[test]
    fn zero_matrix_is_identically_zero() {
        let v = xy();
        let m = PolyMatrix::<BigRational>::zeros(v, 5, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(is_identically_zero(&m, &mut rng).unwrap(), ZeroTest::Zero);
    }

    fn random_poly(rng: &mut ChaCha8Rng, v: &Vars, deg: u8) -> QPoly {
        let n = v.len();
        let mut terms = Vec::new();
        for _ in 0..4 {
            let mut e = vec![0u8; n];
            let mut left = rng.random_range(0..=deg);
            while left > 0 {
                e[rng.random_range(0..n)] += 1;
                left -= 1;
            }
            let c: i64 = rng.random_range(-5..=5);
            terms.push((Monomial::from_exponents(&e), rat(c, rng.random_range(1..=3))));
        }
        QPoly::from_terms(v.clone(), terms)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, v: &Vars, n: usize, deg: u8) -> PolyMatrix<BigRational> {
        let rows = (0..n).map(|_| (0..n).map(|_| random_poly(rng, v, deg)).collect()).collect();
        PolyMatrix::from_rows(v.clone(), rows).unwrap()
    }

    #[test]
    fn bareiss_agrees_with_cofactor_on_random_matrices() {
        let v = xy();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let n = if trial % 2 == 0 { 4 } else { 5 };
            let m = random_matrix(&mut rng, &v, n, 2);
            assert_eq!(poly_det(&m).unwrap(), cofactor_det(&m).unwrap(), "trial {trial}");
        }
    }

    #[test]
    fn bareiss_handles_rank_deficient_matrices() {
        let v = xy();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut m = random_matrix(&mut rng, &v, 5, 2);
            // row 4 := row 0 * x + row 1
            let x = QPoly::var(v.clone(), 0);
            for j in 0..5 {
                let e = &(m.get(0, j) * &x) + m.get(1, j);
                m.set(4, j, e);
            }
            assert!(poly_det(&m).unwrap().is_zero());
        }
    }

    #[test]
    fn determinant_is_multiplicative() {
        let v = xy();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..5 {
                let a = random_matrix(&mut rng, &v, n, 1);
                let b = random_matrix(&mut rng, &v, n, 1);
                let ab = a.matmul(&b).unwrap();
                let lhs = &poly_det(&a).unwrap() * &poly_det(&b).unwrap();
                assert_eq!(lhs, poly_det(&ab).unwrap());
            }
        }
    }

    #[test]
    fn determinant_commutes_with_evaluation() {
        let v = xy();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, &v, 4, 2);
        let d = poly_det(&m).unwrap();
        for _ in 0..50 {
            let p = random_rational_point(&mut rng, 3);
            let numeric = det_exact(m.evaluate(&p).unwrap());
            assert_eq!(d.evaluate(&p).unwrap(), numeric);
        }
    }

    #[test]
    fn primitive_integer_split() {
        let v = xy();
        let p = QPoly::from_terms(v.clone(), [(Monomial::var(3, 0), rat(3, 4)), (Monomial::var(3, 1), rat(-3, 2))]);
        let (s, z) = p.to_primitive_integer();
        assert_eq!(s, rat(3, 4));
        assert_eq!(z.to_string(), "x - 2 * y");
    }
}
