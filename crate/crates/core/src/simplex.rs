//! Faces of the n-simplex, Cayley-Menger volume polynomials, the
//! parametrization by squared edge lengths, and its Jacobian.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{poly_det, vars_from, PolyMatrix, Vars};
use crate::scalar::Scalar;
use crate::QPoly;

/// Largest supported vertex count; faces are stored as 32-bit vertex masks.
pub const MAX_VERTICES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplexError {
    #[error("simplex dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("simplex dimension {0} is too large")]
    DimensionTooLarge(usize),
    #[error("invalid face {0:?}")]
    InvalidFace(String),
    #[error("face {face} is not in the ground set of the {n}-simplex")]
    NotInGroundSet { face: FaceKey, n: usize },
    #[error("expected {expected} edge values, got {got}")]
    EdgeCount { expected: usize, got: usize },
}

/// A face of the simplex, stored as a bitmask over vertices `1..=n+1`
/// (bit `v-1` is vertex `v`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceKey(u32);

impl FaceKey {
    pub fn from_vertices(vertices: &[usize]) -> Result<Self, SimplexError> {
        let mut mask = 0u32;
        for &v in vertices {
            if v == 0 || v > MAX_VERTICES || mask & (1 << (v - 1)) != 0 {
                return Err(SimplexError::InvalidFace(format!("{vertices:?}")));
            }
            mask |= 1 << (v - 1);
        }
        if mask.count_ones() < 2 {
            return Err(SimplexError::InvalidFace(format!("{vertices:?}")));
        }
        Ok(FaceKey(mask))
    }

    pub fn from_mask(mask: u32) -> Self {
        debug_assert!(mask.count_ones() >= 2);
        FaceKey(mask)
    }

    pub fn edge(i: usize, j: usize) -> Self {
        Self::from_vertices(&[i, j]).expect("valid edge")
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// Number of vertices.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Dimension of the face (vertex count minus one).
    pub fn dim(self) -> usize {
        self.len() - 1
    }

    pub fn is_edge(self) -> bool {
        self.len() == 2
    }

    pub fn vertices(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let v = m.trailing_zeros() as usize + 1;
                m &= m - 1;
                Some(v)
            }
        })
    }

    pub fn max_vertex(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    pub fn contains(self, other: FaceKey) -> bool {
        self.0 & other.0 == other.0
    }

    /// Relabels vertices by `perm`, where `perm[v-1]` is the image of `v`.
    pub fn relabel(self, perm: &[usize]) -> FaceKey {
        FaceKey(self.vertices().fold(0, |m, v| m | 1 << (perm[v - 1] - 1)))
    }

    /// Edges contained in this face.
    pub fn edges(self) -> impl Iterator<Item = FaceKey> {
        let vs: Vec<usize> = self.vertices().collect();
        let mut out = Vec::with_capacity(vs.len() * (vs.len() - 1) / 2);
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                out.push(FaceKey::edge(vs[a], vs[b]));
            }
        }
        out.into_iter()
    }
}

impl Ord for FaceKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.vertices().cmp(other.vertices()))
    }
}

impl PartialOrd for FaceKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Vertex digits, e.g. `1234`; vertices above 9 switch to a dotted form.
impl fmt::Display for FaceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.max_vertex() <= 9 {
            for v in self.vertices() {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let s: Vec<String> = self.vertices().map(|v| v.to_string()).collect();
            write!(f, "{}", s.join("."))
        }
    }
}

impl fmt::Debug for FaceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for FaceKey {
    type Err = SimplexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimplexError::InvalidFace(s.to_string());
        let vs: Vec<usize> = if s.contains('.') {
            s.split('.').map(|t| t.parse().map_err(|_| bad())).collect::<Result<_, _>>()?
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect::<Result<_, _>>()?
        };
        if vs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad());
        }
        FaceKey::from_vertices(&vs)
    }
}

/// Number of positive-dimensional faces of the n-simplex.
pub fn num_faces(n: usize) -> usize {
    (1usize << (n + 1)) - (n + 1) - 1
}

/// Number of edges of the n-simplex.
pub fn num_edges(n: usize) -> usize {
    (n + 1) * n / 2
}

/// All positive-dimensional faces of the n-simplex in (cardinality, lex) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
    faces: Vec<FaceKey>,
    index: HashMap<FaceKey, usize>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self, SimplexError> {
        if n < 2 {
            return Err(SimplexError::DimensionTooSmall(n));
        }
        if n + 1 > MAX_VERTICES.min(24) {
            return Err(SimplexError::DimensionTooLarge(n));
        }
        let full = (1u32 << (n + 1)) - 1;
        let mut faces: Vec<FaceKey> = (1..=full).filter(|m| m.count_ones() >= 2).map(FaceKey).collect();
        faces.sort();
        let index = faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        Ok(GroundSet { n, faces, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        num_edges(self.n)
    }

    pub fn faces(&self) -> &[FaceKey] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> FaceKey {
        self.faces[i]
    }

    pub fn edges(&self) -> &[FaceKey] {
        &self.faces[..self.num_edges()]
    }

    pub fn index_of(&self, f: FaceKey) -> Option<usize> {
        self.index.get(&f).copied()
    }

    pub fn try_index(&self, f: FaceKey) -> Result<usize, SimplexError> {
        self.index_of(f).ok_or(SimplexError::NotInGroundSet { face: f, n: self.n })
    }

    /// Variable names `x12, x13, ...` for the edges.
    pub fn edge_vars(&self) -> Vars {
        vars_from(self.edges().iter().map(|f| format!("x{f}")))
    }

    /// Variable names for every face.
    pub fn all_vars(&self) -> Vars {
        vars_from(self.faces.iter().map(|f| format!("x{f}")))
    }
}

pub fn ground_set(n: usize) -> Result<GroundSet, SimplexError> {
    GroundSet::new(n)
}

/// The constant `(m!)^2 2^m` relating squared m-volume and the
/// Cayley-Menger determinant of an m-face.
pub fn cm_constant(m: usize) -> BigInt {
    let mut fact = BigInt::one();
    for k in 2..=m {
        fact *= k;
    }
    &fact * &fact * (BigInt::one() << m)
}

/// Cached polynomial data for one simplex dimension.
pub struct HeronModel {
    ground: GroundSet,
    edge_vars: Vars,
    cm: Vec<OnceLock<QPoly>>,
    jac_rows: Vec<OnceLock<Vec<QPoly>>>,
}

impl fmt::Debug for HeronModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeronModel").field("n", &self.ground.n).finish()
    }
}

static MODELS: OnceLock<Mutex<HashMap<usize, Arc<HeronModel>>>> = OnceLock::new();

impl HeronModel {
    /// Shared model for dimension `n`, built on first use.
    pub fn get(n: usize) -> Result<Arc<HeronModel>, SimplexError> {
        let cache = MODELS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("model cache poisoned");
        if let Some(m) = guard.get(&n) {
            return Ok(m.clone());
        }
        let ground = GroundSet::new(n)?;
        let edge_vars = ground.edge_vars();
        let len = ground.len();
        let model = Arc::new(HeronModel {
            ground,
            edge_vars,
            cm: (0..len).map(|_| OnceLock::new()).collect(),
            jac_rows: (0..len).map(|_| OnceLock::new()).collect(),
        });
        guard.insert(n, model.clone());
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.ground.n
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn edge_vars(&self) -> &Vars {
        &self.edge_vars
    }

    /// Squared volume of the face at ground index `i` as a polynomial in
    /// the squared edge lengths.
    pub fn cm_poly(&self, i: usize) -> &QPoly {
        self.cm[i].get_or_init(|| self.build_cm(self.ground.face(i)))
    }

    /// Row `i` of the Jacobian of the parametrization.
    pub fn jacobian_row(&self, i: usize) -> &[QPoly] {
        self.jac_rows[i].get_or_init(|| {
            let p = self.cm_poly(i);
            (0..self.edge_vars.len()).map(|j| p.partial_derivative(j)).collect()
        })
    }

    fn edge_var(&self, a: usize, b: usize) -> QPoly {
        let e = FaceKey::edge(a.min(b), a.max(b));
        QPoly::var(self.edge_vars.clone(), self.ground.index_of(e).expect("edge in ground set"))
    }

    fn build_cm(&self, face: FaceKey) -> QPoly {
        let vars = self.edge_vars.clone();
        if face.is_edge() {
            let vs: Vec<usize> = face.vertices().collect();
            return self.edge_var(vs[0], vs[1]);
        }
        let vs: Vec<usize> = face.vertices().collect();
        let size = vs.len() + 1;
        let mut rows = Vec::with_capacity(size);
        for r in 0..size {
            let mut row = Vec::with_capacity(size);
            for c in 0..size {
                let p = match (r, c) {
                    (0, 0) => QPoly::zero(vars.clone()),
                    (0, _) | (_, 0) => QPoly::one(vars.clone()),
                    _ if r == c => QPoly::zero(vars.clone()),
                    _ => self.edge_var(vs[r - 1], vs[c - 1]),
                };
                row.push(p);
            }
            rows.push(row);
        }
        let cm = PolyMatrix::from_rows(vars, rows).expect("square Cayley-Menger matrix");
        let det = poly_det(&cm).expect("square");
        let m = face.dim();
        let mut scale = BigRational::new(BigInt::one(), cm_constant(m));
        if m.is_multiple_of(2) {
            scale = -scale;
        }
        det.scalar_mul(&scale)
    }

    /// Evaluates every squared volume at the given squared edge lengths.
    pub fn parametrize<T: Scalar>(&self, edges: &[T]) -> Result<Vec<T>, SimplexError> {
        let e = self.edge_vars.len();
        if edges.len() != e {
            return Err(SimplexError::EdgeCount { expected: e, got: edges.len() });
        }
        let mut out = Vec::with_capacity(self.ground.len());
        out.extend_from_slice(edges);
        for i in e..self.ground.len() {
            out.push(self.cm_poly(i).eval_unchecked(edges));
        }
        Ok(out)
    }

    /// Jacobian of the parametrization, rows indexed by the ground set.
    pub fn jacobian(&self) -> PolyMatrix<BigRational> {
        let rows = (0..self.ground.len()).map(|i| self.jacobian_row(i).to_vec()).collect();
        PolyMatrix::from_rows(self.edge_vars.clone(), rows).expect("rectangular Jacobian")
    }

    /// Square Jacobian submatrix for the given ground indices.
    pub fn jacobian_submatrix(&self, rows: &[usize]) -> PolyMatrix<BigRational> {
        let rows = rows.iter().map(|&i| self.jacobian_row(i).to_vec()).collect();
        PolyMatrix::from_rows(self.edge_vars.clone(), rows).expect("rectangular Jacobian")
    }

    /// Evaluates Jacobian rows at a point.
    pub fn jacobian_at<T: Scalar>(&self, rows: &[usize], edges: &[T]) -> Vec<Vec<T>> {
        rows.iter().map(|&i| self.jacobian_row(i).iter().map(|p| p.eval_unchecked(edges)).collect()).collect()
    }

    /// Defining polynomial `c_m (x_S - cm_S)` in all face variables, with
    /// `c_m = (m!)^2 2^m`, for the face at ground index `i` (not an edge).
    pub fn defining_poly(&self, i: usize, all_vars: &Vars) -> QPoly {
        let face = self.ground.face(i);
        let c = BigRational::from_integer(cm_constant(face.dim()));
        let cm = self.cm_poly(i).rename_into(all_vars).expect("edge variables are face variables");
        let x = QPoly::var(all_vars.clone(), i);
        (&x - &cm).scalar_mul(&c)
    }
}

/// Squared volume of `face` as a polynomial in the squared edge lengths of
/// the n-simplex.
pub fn cayley_menger_poly(n: usize, face: FaceKey) -> Result<QPoly, SimplexError> {
    let model = HeronModel::get(n)?;
    let i = model.ground().try_index(face)?;
    Ok(model.cm_poly(i).clone())
}

/// The map from squared edge lengths to all squared face volumes.
pub fn parametrize<T: Scalar>(n: usize, edges: &[T]) -> Result<Vec<T>, SimplexError> {
    HeronModel::get(n)?.parametrize(edges)
}

/// Defining polynomials of the Heron variety, one per face of dimension at
/// least two, over all face variables.
pub fn heron_system(n: usize) -> Result<Vec<QPoly>, SimplexError> {
    let model = HeronModel::get(n)?;
    let vars = model.ground().all_vars();
    let e = model.ground().num_edges();
    Ok((e..model.ground().len()).map(|i| model.defining_poly(i, &vars)).collect())
}

/// Jacobian of the parametrization, an `N(n) x e(n)` polynomial matrix.
pub fn jacobian(n: usize) -> Result<PolyMatrix<BigRational>, SimplexError> {
    Ok(HeronModel::get(n)?.jacobian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn fk(s: &str) -> FaceKey {
        s.parse().unwrap()
    }

    #[test]
    fn face_order_is_cardinality_then_lex() {
        let mut v = [fk("123"), fk("23"), fk("12"), fk("1234"), fk("13"), fk("124")];
        v.sort();
        let s: Vec<String> = v.iter().map(|f| f.to_string()).collect();
        assert_eq!(s, ["12", "13", "23", "123", "124", "1234"]);
        assert!(fk("14") < fk("23"));
        assert!(fk("134") < fk("234"));
    }

    #[test]
    fn face_parsing_rejects_garbage() {
        assert!("1".parse::<FaceKey>().is_err());
        assert!("21".parse::<FaceKey>().is_err());
        assert!("1a".parse::<FaceKey>().is_err());
        assert_eq!("1.2.10".parse::<FaceKey>().unwrap().to_string(), "1.2.10");
    }

    #[test]
    fn ground_set_sizes() {
        let g2 = ground_set(2).unwrap();
        let s: Vec<String> = g2.faces().iter().map(|f| f.to_string()).collect();
        assert_eq!(s, ["12", "13", "23", "123"]);
        let g3 = ground_set(3).unwrap();
        assert_eq!(g3.len(), 11);
        assert!(g3.edges().iter().all(|f| f.is_edge()));
        assert_eq!(ground_set(4).unwrap().len(), 26);
        assert_eq!(ground_set(4).unwrap().num_edges(), 10);
        assert!(matches!(ground_set(1), Err(SimplexError::DimensionTooSmall(1))));
    }

    #[test]
    fn cm_constants() {
        assert_eq!(cm_constant(2), BigInt::from(16));
        assert_eq!(cm_constant(3), BigInt::from(288));
        assert_eq!(cm_constant(4), BigInt::from(9216));
    }

    #[test]
    fn equilateral_triangle_area() {
        let x = parametrize(2, &[rat(1, 1), rat(1, 1), rat(1, 1)]).unwrap();
        assert_eq!(x[3], rat(3, 16));
    }

    #[test]
    fn right_triangle_area() {
        // legs 3 and 4, hypotenuse 5: area 6
        let x = parametrize(2, &[rat(9, 1), rat(16, 1), rat(25, 1)]).unwrap();
        assert_eq!(x[3], rat(36, 1));
    }

    #[test]
    fn regular_tetrahedron_volume() {
        // unit regular tetrahedron has volume 1/(6 sqrt 2), squared 1/72
        let one = rat(1, 1);
        let x = parametrize(3, &vec![one; 6]).unwrap();
        assert_eq!(x[10], rat(1, 72));
    }

    #[test]
    fn edge_polys_are_variables() {
        assert_eq!(cayley_menger_poly(3, fk("12")).unwrap().to_string(), "x12");
    }
}
