//! Realizability of squared edge lengths by a Euclidean simplex.
//!
//! Edge vectors are ordered like the edges of the ground set (`12, 13, ...`).
//! Lengths are realizable iff the Gram matrix of the edge vectors at vertex 1
//! is positive definite, which is tested on leading principal minors.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use crate::scalar::{det_exact, Field};
use crate::simplex::{FaceKey, GroundSet, SimplexError};

/// Relative margin a floating leading minor must clear to count as positive.
pub const FLOAT_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("{0} edge lengths do not match any simplex")]
    WrongLength(usize),
    #[error("edge {index} is not real: {value}")]
    NonReal { index: usize, value: Complex64 },
    #[error("edge {0} is not finite")]
    NonFinite(usize),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Dimension `n` with `C(n+1, 2) = len`.
fn dimension(len: usize) -> Result<usize, RealizeError> {
    (1..64).find(|n| n * (n + 1) / 2 == len).ok_or(RealizeError::WrongLength(len))
}

/// `G_ij = (x_1i + x_1j - x_ij) / 2` for vertices `2..=n+1`.
pub fn gram_matrix<T: Field>(edges: &[T]) -> Result<Vec<Vec<T>>, RealizeError> {
    let n = dimension(edges.len())?;
    let ground = GroundSet::new(n)?;
    let x = |i: usize, j: usize| -> T {
        if i == j {
            T::zero()
        } else {
            edges[ground.index_of(FaceKey::edge(i.min(j), i.max(j))).expect("edge of the simplex")].clone()
        }
    };
    let two = T::from_i64(2);
    Ok((2..=n + 1).map(|i| (2..=n + 1).map(|j| (x(1, i) + x(1, j) - x(i, j)) / two.clone()).collect()).collect())
}

fn leading_minors<T: Field>(g: &[Vec<T>]) -> Vec<T> {
    (1..=g.len()).map(|k| det_exact(g[..k].iter().map(|r| r[..k].to_vec()).collect())).collect()
}

/// Exact test for rational squared lengths.
pub fn is_realizable_exact(edges: &[BigRational]) -> Result<bool, RealizeError> {
    let g = gram_matrix(edges)?;
    Ok(leading_minors(&g).iter().all(|m| m.is_positive()))
}

/// Floating test; leading minor `k` must exceed `FLOAT_MARGIN` times the
/// product of the first `k` diagonal entries, its Hadamard bound.
pub fn is_realizable(edges: &[f64]) -> Result<bool, RealizeError> {
    if let Some(i) = edges.iter().position(|v| !v.is_finite()) {
        return Err(RealizeError::NonFinite(i));
    }
    let g = gram_matrix(edges)?;
    if g.iter().enumerate().any(|(i, r)| r[i] <= 0.0) {
        return Ok(false);
    }
    let mut bound = 1.0;
    Ok(leading_minors(&g).iter().enumerate().all(|(k, m)| {
        bound *= g[k][k];
        *m > FLOAT_MARGIN * bound
    }))
}

/// Floating test on complex input whose imaginary parts are within `tol`
/// (relative) of zero.
pub fn is_realizable_complex(edges: &[Complex64], tol: f64) -> Result<bool, RealizeError> {
    let re = edges
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value.im.abs() <= tol * value.norm().max(1.0) {
                Ok(value.re)
            } else {
                Err(RealizeError::NonReal { index, value })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    is_realizable(&re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn published_vectors() {
        let good = [40.0, 90.0, 80.0, 16.862915010152395, 40.0, 30.0];
        let bad = [40.0, 90.0, 80.0, 243.1370849898476, 40.0, 30.0];
        assert!(is_realizable(&good).unwrap());
        assert!(!is_realizable(&bad).unwrap());
    }

    #[test]
    fn regular_and_degenerate() {
        assert!(is_realizable_exact(&vec![rat(1, 1); 6]).unwrap());
        // collinear triangle 1-2-3 with lengths 1, 1, 2
        assert!(!is_realizable_exact(&[rat(1, 1), rat(4, 1), rat(1, 1)]).unwrap());
        assert!(is_realizable_exact(&[rat(3, 1), rat(4, 1), rat(5, 1)]).unwrap());
        assert!(!is_realizable(&[-1.0, 1.0, 1.0]).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(is_realizable(&[1.0; 4]), Err(RealizeError::WrongLength(4))));
        let z = [Complex64::new(1.0, 0.5); 3];
        assert!(matches!(is_realizable_complex(&z, 1e-8), Err(RealizeError::NonReal { index: 0, .. })));
        assert!(matches!(is_realizable(&[f64::NAN, 1.0, 1.0]), Err(RealizeError::NonFinite(0))));
    }
}
