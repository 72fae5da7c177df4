//! Newton polytopes, the zero mixed-volume test, and exact mixed volumes.
//!
//! The zero test is Minkowski's criterion: the mixed volume of `k`
//! polytopes in `R^k` is positive exactly when every sub-collection `I`
//! has a Minkowski sum of dimension at least `|I|`. Mixed volume values come
//! from inclusion-exclusion over Minkowski sums, each measured with an
//! exact integer convex hull.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::orbits::FaceSet;
use crate::poly::Coeff;
use crate::poly::MultiPoly;
use crate::scalar::rank_exact;
use crate::simplex::{HeronModel, SimplexError};

/// Largest ambient dimension for which mixed volume values are computed.
pub const MAX_MV_DIM: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BkkError {
    #[error("the zero polynomial has no Newton polytope")]
    ZeroPolynomial,
    #[error("expected {expected} polytopes for a square system, got {got}")]
    NotSquare { expected: usize, got: usize },
    #[error("mixed volume values are only computed up to dimension {MAX_MV_DIM} (got {0})")]
    DimensionUnsupported(usize),
    #[error("polytope lives in dimension {got}, expected {expected}")]
    AmbientMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Convex hull of a finite set of lattice points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolytope {
    points: Vec<Vec<i64>>,
    dim: usize,
}

impl NewtonPolytope {
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Result<Self, BkkError> {
        if points.is_empty() {
            return Err(BkkError::ZeroPolynomial);
        }
        for p in &points {
            if p.len() != dim {
                return Err(BkkError::AmbientMismatch { expected: dim, got: p.len() });
            }
        }
        let mut points = points;
        points.sort();
        points.dedup();
        Ok(NewtonPolytope { points, dim })
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Adds the origin to the point set.
    pub fn with_origin(&self) -> NewtonPolytope {
        let mut pts = self.points.clone();
        pts.push(vec![0; self.dim]);
        NewtonPolytope::new(self.dim, pts).expect("nonempty")
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        direction_rank(&[self])
    }

    /// Drops the given coordinates.
    pub fn project_out(&self, coords: &[usize]) -> NewtonPolytope {
        let keep: Vec<usize> = (0..self.dim).filter(|c| !coords.contains(c)).collect();
        let pts = self.points.iter().map(|p| keep.iter().map(|&c| p[c]).collect()).collect();
        NewtonPolytope::new(keep.len(), pts).expect("nonempty")
    }
}

/// Exponent vectors of the support of `p`.
pub fn newton_polytope<C: Coeff>(p: &MultiPoly<C>) -> Result<NewtonPolytope, BkkError> {
    if p.is_zero() {
        return Err(BkkError::ZeroPolynomial);
    }
    let pts = p.terms().iter().map(|(m, _)| m.exponents().iter().map(|&e| e as i64).collect()).collect();
    NewtonPolytope::new(p.nvars(), pts)
}

/// Difference vectors spanning the direction space of a polytope.
fn directions(p: &NewtonPolytope) -> Vec<Vec<i64>> {
    let base = &p.points[0];
    p.points[1..].iter().map(|q| q.iter().zip(base).map(|(a, b)| a - b).collect()).collect()
}

/// Dimension of the Minkowski sum of the given polytopes.
fn direction_rank(polys: &[&NewtonPolytope]) -> usize {
    let rows: Vec<Vec<BigRational>> = polys
        .iter()
        .flat_map(|p| directions(p))
        .map(|v| v.into_iter().map(|x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    if rows.is_empty() {
        0
    } else {
        rank_exact(rows)
    }
}

/// A basis of the direction space of one polytope, as integer rows.
fn direction_basis(p: &NewtonPolytope) -> Vec<Vec<i64>> {
    let mut basis: Vec<Vec<i64>> = Vec::new();
    for v in directions(p) {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if direction_rank_rows(&trial) > basis.len() {
            basis.push(v);
        }
    }
    basis
}

fn direction_rank_rows(rows: &[Vec<i64>]) -> usize {
    let m: Vec<Vec<BigRational>> =
        rows.iter().map(|v| v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()).collect();
    if m.is_empty() {
        0
    } else {
        rank_exact(m)
    }
}

fn check_square(polys: &[NewtonPolytope]) -> Result<usize, BkkError> {
    let k = polys.len();
    for p in polys {
        if p.dim != k {
            return Err(BkkError::NotSquare { expected: p.dim, got: k });
        }
    }
    Ok(k)
}

/// Whether the mixed volume of a square collection is zero.
///
/// With `affine` set the origin is first adjoined to every polytope.
pub fn zero_mixed_volume(polys: &[NewtonPolytope], affine: bool) -> Result<bool, BkkError> {
    let k = check_square(polys)?;
    let polys: Vec<NewtonPolytope> =
        if affine { polys.iter().map(NewtonPolytope::with_origin).collect() } else { polys.to_vec() };
    let bases: Vec<Vec<Vec<i64>>> = polys.iter().map(direction_basis).collect();
    if bases.iter().any(|b| b.is_empty()) {
        return Ok(true);
    }
    for mask in 1u64..(1u64 << k) {
        let size = mask.count_ones() as usize;
        let rows: Vec<Vec<i64>> =
            (0..k).filter(|i| mask >> i & 1 == 1).flat_map(|i| bases[i].iter().cloned()).collect();
        if rows.len() < size || direction_rank_rows(&rows) < size {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Normalized mixed volume (the generic root count in the torus) of a
/// square collection in dimension at most [`MAX_MV_DIM`].
pub fn mixed_volume(polys: &[NewtonPolytope], affine: bool) -> Result<u64, BkkError> {
    check_square(polys)?;
    let polys: Vec<NewtonPolytope> =
        if affine { polys.iter().map(NewtonPolytope::with_origin).collect() } else { polys.to_vec() };
    let (factor, reduced) = split_axis_segments(polys);
    if reduced.is_empty() {
        return Ok(factor);
    }
    let k_red = reduced.len();
    if k_red > MAX_MV_DIM {
        return Err(BkkError::DimensionUnsupported(k_red));
    }
    Ok(factor * mixed_volume_inclusion_exclusion(&reduced))
}

/// Removes polytopes that are lattice segments along a coordinate axis:
/// `MV(P_1, .., P_{k-1}, [0, L e_j]) = L * MV(pi P_1, .., pi P_{k-1})` where
/// `pi` drops coordinate `j`.
fn split_axis_segments(mut polys: Vec<NewtonPolytope>) -> (u64, Vec<NewtonPolytope>) {
    let mut factor = 1u64;
    loop {
        let found = polys.iter().enumerate().find_map(|(i, p)| axis_segment(p).map(|s| (i, s)));
        let Some((i, (axis, len))) = found else {
            return (factor, polys);
        };
        factor *= len;
        polys.remove(i);
        polys = polys.iter().map(|p| p.project_out(&[axis])).collect();
    }
}

fn axis_segment(p: &NewtonPolytope) -> Option<(usize, u64)> {
    let base = &p.points[0];
    let mut axis = None;
    let (mut lo, mut hi) = (0i64, 0i64);
    for q in &p.points {
        for c in 0..p.dim {
            let d = q[c] - base[c];
            if d != 0 {
                match axis {
                    None => axis = Some(c),
                    Some(a) if a != c => return None,
                    _ => {}
                }
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
    }
    axis.map(|a| (a, (hi - lo) as u64))
}

/// Inclusion-exclusion over all sub-collections:
/// `MV = sum_I (-1)^(k-|I|) Vol(sum_{i in I} P_i)`, with volumes
/// normalized so that the unit simplex has volume `1/k!`.
pub fn mixed_volume_inclusion_exclusion(polys: &[NewtonPolytope]) -> u64 {
    let k = polys.len();
    if k == 0 {
        return 1;
    }
    // hull vertex sets of partial sums, keyed by subset mask
    let mut sums: HashMap<u64, Vec<Vec<i64>>> = HashMap::new();
    let mut total = BigInt::from(0);
    for mask in 1u64..(1u64 << k) {
        let top = 63 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        let pts = if rest == 0 {
            polys[top].points.clone()
        } else {
            let a = &sums[&rest];
            let mut s: HashSet<Vec<i64>> = HashSet::new();
            for p in a {
                for q in &polys[top].points {
                    s.insert(p.iter().zip(q).map(|(x, y)| x + y).collect());
                }
            }
            s.into_iter().collect()
        };
        let hull = Hull::build(k, &pts);
        let vol = BigInt::from(hull.normalized_volume);
        let sign = if (k - mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
        total += vol * sign;
        sums.insert(mask, hull.vertices);
    }
    // normalized volumes are k! times Euclidean volume
    let kfact: BigInt = (1..=k as u64).product::<u64>().into();
    let q = &total / &kfact;
    debug_assert_eq!(&q * &kfact, total);
    q.to_u64().expect("mixed volume fits in u64")
}

/// Normalized volume (`k!` times Euclidean volume) of the convex hull of
/// lattice points in `R^k`.
pub fn lattice_volume(k: usize, points: &[Vec<i64>]) -> u128 {
    Hull::build(k, points).normalized_volume
}

/// Integer determinant by fraction-free elimination.
fn det_i128(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| m[i][k] != 0) else {
            return 0;
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

struct Facet {
    verts: Vec<usize>,
    // outward normal and offset: q is beyond the facet iff normal.q > offset
    normal: Vec<i128>,
    offset: i128,
    alive: bool,
}

/// Boundary triangulation of a full-dimensional lattice polytope, built by
/// beneath-beyond insertion with strict visibility.
struct Hull {
    normalized_volume: u128,
    vertices: Vec<Vec<i64>>,
}

impl Hull {
    fn build(k: usize, input: &[Vec<i64>]) -> Hull {
        let degenerate = |input: &[Vec<i64>]| Hull { normalized_volume: 0, vertices: input.to_vec() };
        if k == 0 {
            return Hull { normalized_volume: 1, vertices: input.to_vec() };
        }
        // pick an initial simplex greedily
        let mut simplex: Vec<usize> = vec![0];
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for (i, p) in input.iter().enumerate().skip(1) {
            if simplex.len() == k + 1 {
                break;
            }
            let v: Vec<i64> = p.iter().zip(&input[0]).map(|(a, b)| a - b).collect();
            let mut trial = rows.clone();
            trial.push(v.clone());
            if direction_rank_rows(&trial) > rows.len() {
                rows.push(v);
                simplex.push(i);
            }
        }
        if simplex.len() < k + 1 {
            return degenerate(input);
        }
        let scale = (k + 1) as i128;
        // interior point, scaled by k+1
        let interior: Vec<i128> = (0..k).map(|c| simplex.iter().map(|&i| input[i][c] as i128).sum()).collect();
        let pts: Vec<Vec<i128>> = input.iter().map(|p| p.iter().map(|&x| x as i128 * scale).collect()).collect();
        let orient = |verts: &[usize], q: &[i128]| -> i128 {
            let o = &pts[verts[0]];
            let mut m: Vec<Vec<i128>> =
                verts[1..].iter().map(|&v| pts[v].iter().zip(o).map(|(a, b)| a - b).collect()).collect();
            m.push(q.iter().zip(o).map(|(a, b)| a - b).collect());
            det_i128(m)
        };
        let mut facets: Vec<Facet> = Vec::new();
        let mut ridges: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        let dot = |a: &[i128], b: &[i128]| -> i128 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        // cofactors of the last row give the hyperplane normal
        let normal_of = |verts: &[usize]| -> Vec<i128> {
            let o = &pts[verts[0]];
            let rows: Vec<Vec<i128>> =
                verts[1..].iter().map(|&v| pts[v].iter().zip(o).map(|(a, b)| a - b).collect()).collect();
            (0..k)
                .map(|j| {
                    let minor: Vec<Vec<i128>> = rows
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| *x).collect())
                        .collect();
                    let d = if minor.is_empty() { 1 } else { det_i128(minor) };
                    if (k - 1 + j).is_multiple_of(2) {
                        d
                    } else {
                        -d
                    }
                })
                .collect()
        };
        let add_facet = |verts: Vec<usize>, facets: &mut Vec<Facet>, ridges: &mut HashMap<Vec<usize>, Vec<usize>>| {
            let mut verts = verts;
            verts.sort_unstable();
            let mut normal = normal_of(&verts);
            let mut offset = dot(&normal, &pts[verts[0]]);
            let side = dot(&normal, &interior) - offset;
            debug_assert!(side != 0, "interior point lies on a facet hyperplane");
            if side > 0 {
                normal.iter_mut().for_each(|x| *x = -*x);
                offset = -offset;
            }
            let id = facets.len();
            for skip in 0..verts.len() {
                let mut r = verts.clone();
                r.remove(skip);
                ridges.entry(r).or_default().push(id);
            }
            facets.push(Facet { verts, normal, offset, alive: true });
        };
        for skip in 0..simplex.len() {
            let mut f = simplex.clone();
            f.remove(skip);
            add_facet(f, &mut facets, &mut ridges);
        }
        let in_simplex: HashSet<usize> = simplex.iter().copied().collect();
        for (pi, p) in pts.iter().enumerate() {
            if in_simplex.contains(&pi) {
                continue;
            }
            let visible: Vec<usize> = (0..facets.len())
                .filter(|&f| facets[f].alive)
                .filter(|&f| dot(&facets[f].normal, p) > facets[f].offset)
                .collect();
            if visible.is_empty() {
                continue;
            }
            let vis: HashSet<usize> = visible.iter().copied().collect();
            let mut horizon: Vec<Vec<usize>> = Vec::new();
            for &f in &visible {
                let verts = facets[f].verts.clone();
                for skip in 0..verts.len() {
                    let mut r = verts.clone();
                    r.remove(skip);
                    let owners = &ridges[&r];
                    if owners.iter().any(|o| facets[*o].alive && !vis.contains(o)) {
                        horizon.push(r);
                    }
                }
            }
            for &f in &visible {
                facets[f].alive = false;
                let verts = facets[f].verts.clone();
                for skip in 0..verts.len() {
                    let mut r = verts.clone();
                    r.remove(skip);
                    if let Some(o) = ridges.get_mut(&r) {
                        o.retain(|x| *x != f);
                    }
                }
            }
            for r in horizon {
                let mut v = r;
                v.push(pi);
                add_facet(v, &mut facets, &mut ridges);
            }
        }
        // volume of cones from the interior point over boundary simplices
        let mut vol: i128 = 0;
        let mut used: HashSet<usize> = HashSet::new();
        for f in facets.iter().filter(|f| f.alive) {
            vol += orient(&f.verts, &interior).abs();
            used.extend(f.verts.iter().copied());
        }
        // coordinates were scaled by k+1
        let denom = scale.pow(k as u32);
        debug_assert_eq!(vol % denom, 0);
        let mut vertices: Vec<Vec<i64>> = used.into_iter().map(|i| input[i].clone()).collect();
        vertices.sort();
        Hull { normalized_volume: (vol / denom) as u128, vertices }
    }
}

/// Newton polytopes of the square system `{phi_s - b_s : s in B}` in the
/// edge unknowns, for generic nonzero `b`.
pub fn square_system_polytopes(basis: &FaceSet) -> Result<Vec<NewtonPolytope>, BkkError> {
    let model = HeronModel::get(basis.n())?;
    let e = model.ground().num_edges();
    basis
        .indices()
        .map(|i| {
            let p = newton_polytope(model.cm_poly(i))?;
            let mut pts = p.points;
            pts.push(vec![0; e]);
            NewtonPolytope::new(e, pts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(dim: usize, pts: &[&[i64]]) -> NewtonPolytope {
        NewtonPolytope::new(dim, pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn unit_simplex_volumes() {
        assert_eq!(lattice_volume(2, &[vec![0, 0], vec![1, 0], vec![0, 1]]), 1);
        assert_eq!(lattice_volume(2, &[vec![0, 0], vec![2, 0], vec![0, 2], vec![1, 1]]), 4);
        let cube: Vec<Vec<i64>> = (0..8).map(|m| (0..3).map(|c| (m >> c & 1) as i64).collect()).collect();
        assert_eq!(lattice_volume(3, &cube), 6);
        // collinear points have no area
        assert_eq!(lattice_volume(2, &[vec![0, 0], vec![1, 1], vec![2, 2]]), 0);
    }

    #[test]
    fn degenerate_configurations() {
        // many coplanar and interior points in a cube of side 2
        let mut pts = Vec::new();
        for x in 0..=2 {
            for y in 0..=2 {
                for z in 0..=2 {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        assert_eq!(lattice_volume(3, &pts), 48);
        let cube4: Vec<Vec<i64>> = (0..16).map(|m| (0..4).map(|c| (m >> c & 1) as i64).collect()).collect();
        assert_eq!(lattice_volume(4, &cube4), 24);
    }

    #[test]
    fn segment_mixed_volume() {
        let s = poly(1, &[&[0], &[3]]);
        assert_eq!(mixed_volume(std::slice::from_ref(&s), false).unwrap(), 3);
        assert_eq!(mixed_volume_inclusion_exclusion(&[s]), 3);
    }

    #[test]
    fn bezout_for_dense_systems() {
        // two generic conics meet in 4 points
        let conic = poly(2, &[&[0, 0], &[2, 0], &[0, 2], &[1, 1], &[1, 0], &[0, 1]]);
        assert_eq!(mixed_volume(&[conic.clone(), conic.clone()], false).unwrap(), 4);
        let cubic = poly(3, &[&[0, 0, 0], &[3, 0, 0], &[0, 3, 0], &[0, 0, 3]]);
        let quad = poly(3, &[&[0, 0, 0], &[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]);
        let lin = poly(3, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(mixed_volume(&[cubic, quad, lin], false).unwrap(), 6);
    }

    #[test]
    fn identical_segments_have_zero_mixed_volume() {
        let s = poly(2, &[&[0, 0], &[1, 1]]);
        assert!(zero_mixed_volume(&[s.clone(), s.clone()], false).unwrap());
        assert_eq!(mixed_volume(&[s.clone(), s], false).unwrap(), 0);
    }

    #[test]
    fn zero_test_agrees_with_value_on_random_collections() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k = rng.random_range(1..=3);
            let polys: Vec<NewtonPolytope> = (0..k)
                .map(|_| {
                    let m = rng.random_range(1..=3);
                    let pts = (0..m).map(|_| (0..k).map(|_| rng.random_range(0..=2)).collect()).collect();
                    NewtonPolytope::new(k, pts).unwrap()
                })
                .collect();
            let z = zero_mixed_volume(&polys, false).unwrap();
            let mv = mixed_volume(&polys, false).unwrap();
            assert_eq!(z, mv == 0, "{polys:?}");
        }
    }

    #[test]
    fn axis_segment_reduction_matches_direct_sum() {
        let tri = poly(3, &[&[0, 0, 0], &[2, 0, 1], &[0, 1, 1], &[1, 1, 0]]);
        let other = poly(3, &[&[0, 0, 0], &[1, 2, 0], &[0, 0, 2], &[1, 0, 1]]);
        let seg = poly(3, &[&[0, 0, 0], &[0, 2, 0]]);
        let polys = [tri, other, seg];
        assert_eq!(mixed_volume(&polys, false).unwrap(), mixed_volume_inclusion_exclusion(&polys));
    }

    #[test]
    fn non_square_is_rejected() {
        let s = poly(2, &[&[0, 0], &[1, 0]]);
        assert!(matches!(zero_mixed_volume(&[s], false), Err(BkkError::NotSquare { .. })));
    }

    #[test]
    fn polytope_of_a_monomial() {
        use crate::poly::{vars_from, Monomial};
        use crate::scalar::rat;
        let v = vars_from(["x", "y"]);
        let p = crate::QPoly::from_terms(v.clone(), [(Monomial::from_exponents(&[2, 1]), rat(1, 1))]);
        assert_eq!(newton_polytope(&p).unwrap().points(), &[vec![2, 1]]);
        let c = crate::QPoly::one(v);
        assert_eq!(newton_polytope(&c).unwrap().points(), &[vec![0, 0]]);
    }
}
