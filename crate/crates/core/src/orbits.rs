//! Sets of faces up to relabelling of the simplex vertices.
//!
//! The symmetric group on the `n+1` vertices acts on faces and hence on sets
//! of faces. Canonical forms are lexicographically minimal orbit elements;
//! enumeration of all `e(n)`-subsets up to symmetry is stratified by
//! f-vector.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simplex::{num_edges, FaceKey, GroundSet, HeronModel, SimplexError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("ground sets larger than 128 faces are not supported (n = {0})")]
    TooManyFaces(usize),
    #[error("f-vector {fvec:?} is not admissible for n = {n}")]
    NotAdmissible { n: usize, fvec: Vec<usize> },
    #[error("not a permutation of 1..={0}: {1:?}")]
    BadPermutation(usize, Vec<usize>),
    #[error("duplicate face {0} in face set")]
    DuplicateFace(FaceKey),
}

/// A set of faces of the n-simplex, stored as a bitmask over ground indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceSet {
    n: u8,
    bits: u128,
}

impl FaceSet {
    pub fn from_bits(n: usize, bits: u128) -> Self {
        FaceSet { n: n as u8, bits }
    }

    pub fn from_faces(n: usize, faces: &[FaceKey]) -> Result<Self, OrbitError> {
        let model = HeronModel::get(n)?;
        let g = model.ground();
        if g.len() > 128 {
            return Err(OrbitError::TooManyFaces(n));
        }
        let mut bits = 0u128;
        for &f in faces {
            let i = g.try_index(f)?;
            if bits & (1 << i) != 0 {
                return Err(OrbitError::DuplicateFace(f));
            }
            bits |= 1 << i;
        }
        Ok(FaceSet { n: n as u8, bits })
    }

    /// Parses a comma- or space-separated face list such as `12,13,123`.
    pub fn parse(n: usize, s: &str) -> Result<Self, OrbitError> {
        let faces = s
            .split(|c: char| c == ',' || c.is_whitespace() || c == '{' || c == '}')
            .filter(|t| !t.is_empty())
            .map(FaceKey::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_faces(n, &faces)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Ground indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> {
        let mut b = self.bits;
        std::iter::from_fn(move || {
            if b == 0 {
                None
            } else {
                let i = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(i)
            }
        })
    }

    pub fn index_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn faces(&self) -> Vec<FaceKey> {
        let model = HeronModel::get(self.n()).expect("valid dimension");
        self.indices().map(|i| model.ground().face(i)).collect()
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn contains(&self, f: FaceKey) -> bool {
        let model = HeronModel::get(self.n()).expect("valid dimension");
        model.ground().index_of(f).is_some_and(|i| self.contains_index(i))
    }

    pub fn is_subset(&self, other: &FaceSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn with_index(&self, i: usize) -> FaceSet {
        FaceSet { n: self.n, bits: self.bits | 1 << i }
    }

    pub fn without_index(&self, i: usize) -> FaceSet {
        FaceSet { n: self.n, bits: self.bits & !(1 << i) }
    }

    /// Counts of faces per dimension `(f_1, ..., f_n)`.
    pub fn fvec(&self) -> FVec {
        let mut counts = vec![0; self.n()];
        for f in self.faces() {
            counts[f.dim() - 1] += 1;
        }
        FVec(counts)
    }
}

/// Sets of equal size compare lexicographically as sorted face lists, so the
/// smaller set is the one owning the lowest index of the symmetric
/// difference. Sets of different sizes compare by size first.
impl Ord for FaceSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.len().cmp(&other.len()))
            .then_with(|| lex_cmp_bits(self.bits, other.bits))
    }
}

impl PartialOrd for FaceSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn lex_cmp_bits(a: u128, b: u128) -> Ordering {
    let d = a ^ b;
    if d == 0 {
        Ordering::Equal
    } else if a >> d.trailing_zeros() & 1 == 1 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl fmt::Display for FaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.faces().iter().map(|x| x.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

impl fmt::Debug for FaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Face counts per dimension `(f_1, ..., f_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FVec(pub Vec<usize>);

impl fmt::Display for FVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// An orbit representative together with its orbit size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRep {
    pub canonical: FaceSet,
    pub orbit_size: u64,
    pub fvec: FVec,
}

/// The action of the symmetric group on faces of one simplex.
pub struct SymAction {
    n: usize,
    ground: GroundSet,
    perms: Vec<Vec<usize>>,
    face_maps: Vec<Vec<u8>>,
    // faces as vertex masks, by ground index
    masks: Vec<u32>,
    // ground index by vertex mask
    by_mask: HashMap<u32, u8>,
}

impl fmt::Debug for SymAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymAction").field("n", &self.n).finish()
    }
}

static ACTIONS: OnceLock<Mutex<HashMap<usize, Arc<SymAction>>>> = OnceLock::new();

/// All permutations of `1..=k` in lexicographic order.
pub fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

impl SymAction {
    pub fn get(n: usize) -> Result<Arc<SymAction>, OrbitError> {
        let cache = ACTIONS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("action cache poisoned");
        if let Some(a) = guard.get(&n) {
            return Ok(a.clone());
        }
        let ground = HeronModel::get(n)?.ground().clone();
        if ground.len() > 128 {
            return Err(OrbitError::TooManyFaces(n));
        }
        let masks: Vec<u32> = ground.faces().iter().map(|f| f.mask()).collect();
        let by_mask: HashMap<u32, u8> = masks.iter().enumerate().map(|(i, &m)| (m, i as u8)).collect();
        let perms = all_permutations(n + 1);
        let face_maps =
            perms.iter().map(|p| ground.faces().iter().map(|f| by_mask[&f.relabel(p).mask()]).collect()).collect();
        let action = Arc::new(SymAction { n, ground, perms, face_maps, masks, by_mask });
        guard.insert(n, action.clone());
        Ok(action)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// The group elements, as 1-based image vectors.
    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    fn apply_index(&self, k: usize, bits: u128) -> u128 {
        let map = &self.face_maps[k];
        let mut out = 0u128;
        let mut b = bits;
        while b != 0 {
            let i = b.trailing_zeros() as usize;
            b &= b - 1;
            out |= 1 << map[i];
        }
        out
    }

    fn apply_vertex_map(&self, images: &[usize], bits: u128) -> u128 {
        let mut out = 0u128;
        let mut b = bits;
        while b != 0 {
            let i = b.trailing_zeros() as usize;
            b &= b - 1;
            let mut m = self.masks[i];
            let mut img = 0u32;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                img |= 1 << images[v];
            }
            out |= 1 << self.by_mask[&img];
        }
        out
    }

    /// Relabels every face of `s` by `g` (1-based images).
    pub fn apply_perm(&self, g: &[usize], s: &FaceSet) -> Result<FaceSet, OrbitError> {
        let k = self.n + 1;
        let mut seen = vec![false; k];
        if g.len() != k || g.iter().any(|&v| v == 0 || v > k || std::mem::replace(&mut seen[v - 1], true)) {
            return Err(OrbitError::BadPermutation(k, g.to_vec()));
        }
        let zero_based: Vec<usize> = g.iter().map(|v| v - 1).collect();
        Ok(FaceSet::from_bits(self.n, self.apply_vertex_map(&zero_based, s.bits)))
    }

    /// Canonical form by scanning the whole group.
    pub fn canonical_brute_force(&self, s: &FaceSet) -> FaceSet {
        let best = (0..self.perms.len())
            .map(|k| self.apply_index(k, s.bits))
            .min_by(|a, b| lex_cmp_bits(*a, *b))
            .expect("group is nonempty");
        FaceSet::from_bits(self.n, best)
    }

    /// Lexicographically minimal orbit element.
    ///
    /// Searches over the preimages of target vertices `1, 2, ...` in order.
    /// Once the preimages of `1..=k` are fixed, membership of the image edges
    /// `12, 13, ..., 1k` is known; these occupy the first ground positions,
    /// so a branch whose known prefix already loses to the best complete
    /// image is cut.
    pub fn canonical_form(&self, s: &FaceSet) -> FaceSet {
        let k = self.n + 1;
        let mut state = Search { action: self, bits: s.bits, pre: Vec::with_capacity(k), used: 0, best: None };
        state.dfs();
        FaceSet::from_bits(self.n, state.best.expect("search reaches a leaf"))
    }

    /// Number of group elements fixing `s`.
    pub fn stabilizer_order(&self, s: &FaceSet) -> u64 {
        (0..self.perms.len()).filter(|&k| self.apply_index(k, s.bits) == s.bits).count() as u64
    }

    pub fn orbit_size(&self, s: &FaceSet) -> u64 {
        factorial(self.n + 1) / self.stabilizer_order(s)
    }

    pub fn orbit_rep(&self, s: &FaceSet) -> OrbitRep {
        let canonical = self.canonical_form(s);
        OrbitRep { canonical, orbit_size: self.orbit_size(&canonical), fvec: canonical.fvec() }
    }
}

struct Search<'a> {
    action: &'a SymAction,
    bits: u128,
    // pre[t] = source vertex (0-based) sent to target vertex t
    pre: Vec<usize>,
    used: u32,
    best: Option<u128>,
}

impl Search<'_> {
    fn dfs(&mut self) {
        let k = self.action.n + 1;
        let depth = self.pre.len();
        if depth == k {
            let mut images = vec![0; k];
            for (t, &v) in self.pre.iter().enumerate() {
                images[v] = t;
            }
            let img = self.action.apply_vertex_map(&images, self.bits);
            if self.best.is_none_or(|b| lex_cmp_bits(img, b) == Ordering::Less) {
                self.best = Some(img);
            }
            return;
        }
        for v in 0..k {
            if self.used >> v & 1 == 1 {
                continue;
            }
            self.pre.push(v);
            self.used |= 1 << v;
            if !self.pruned() {
                self.dfs();
            }
            self.used &= !(1 << v);
            self.pre.pop();
        }
    }

    // Edges 1t for t = 2..=depth sit at ground positions 0..depth-1.
    fn pruned(&mut self) -> bool {
        let Some(best) = self.best else {
            return false;
        };
        let depth = self.pre.len();
        if depth < 2 {
            return false;
        }
        let mut prefix = 0u128;
        for t in 1..depth {
            let e = (1u32 << self.pre[0]) | (1u32 << self.pre[t]);
            let idx = self.action.by_mask[&e] as u32;
            if self.bits >> idx & 1 == 1 {
                prefix |= 1 << (t - 1);
            }
        }
        let width = depth - 1;
        let mask = (1u128 << width) - 1;
        match lex_cmp_bits(prefix, best & mask) {
            Ordering::Greater => true,
            Ordering::Less => {
                // every completion beats the current best
                self.best = None;
                false
            }
            Ordering::Equal => false,
        }
    }
}

/// Applies a vertex permutation (1-based images) to a face set.
pub fn apply_perm(g: &[usize], s: &FaceSet) -> Result<FaceSet, OrbitError> {
    SymAction::get(s.n())?.apply_perm(g, s)
}

pub fn canonical_form(s: &FaceSet) -> Result<FaceSet, OrbitError> {
    Ok(SymAction::get(s.n())?.canonical_form(s))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Number of faces of dimension `i` in the n-simplex.
fn faces_of_dim(n: usize, i: usize) -> usize {
    binomial(n + 1, i + 1) as usize
}

/// All f-vectors `(f_1..f_n)` with sum `k` and `f_i <= C(n+1, i+1)`.
pub fn admissible_fvectors(n: usize, k: usize) -> Vec<FVec> {
    fn rec(n: usize, i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<FVec>) {
        if i > n {
            if left == 0 {
                out.push(FVec(cur.clone()));
            }
            return;
        }
        let cap = faces_of_dim(n, i).min(left);
        for c in (0..=cap).rev() {
            cur.push(c);
            rec(n, i + 1, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 1, k, &mut Vec::new(), &mut out);
    out
}

/// Counters from one run of f-vector stratified enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// Dimension whose faces were enumerated first.
    pub first_dim: usize,
    /// Orbits of the first-stage subsets.
    pub first_stage_orbits: usize,
    /// Canonical-form evaluations in both stages.
    pub canonical_calls: u64,
}

/// Bitmasks of every `k`-subset of `items`.
fn subsets(items: &[usize], k: usize) -> Vec<u128> {
    fn rec(items: &[usize], k: usize, start: usize, cur: u128, out: &mut Vec<u128>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for i in start..=items.len() - k {
            rec(items, k - 1, i + 1, cur | 1 << items[i], out);
        }
    }
    let mut out = Vec::new();
    if k <= items.len() {
        rec(items, k, 0, 0, &mut out);
    }
    out
}

/// One representative per orbit of face sets with the given f-vector.
///
/// Enumerates orbits of the face subsets in the dimension with the most
/// choices first, then extends each representative by every choice in the
/// remaining dimensions and canonicalizes the result.
pub fn orbits_with_fvector(n: usize, fvec: &FVec) -> Result<(Vec<OrbitRep>, EnumStats), OrbitError> {
    let action = SymAction::get(n)?;
    if fvec.0.len() != n || fvec.0.iter().enumerate().any(|(i, &c)| c > faces_of_dim(n, i + 1)) {
        return Err(OrbitError::NotAdmissible { n, fvec: fvec.0.clone() });
    }
    let by_dim: Vec<Vec<usize>> = (1..=n)
        .map(|d| action.ground().faces().iter().enumerate().filter(|(_, f)| f.dim() == d).map(|(i, _)| i).collect())
        .collect();
    let first = (0..n).max_by_key(|&i| (binomial(by_dim[i].len(), fvec.0[i]), std::cmp::Reverse(i))).expect("n >= 1");
    let first_subsets = subsets(&by_dim[first], fvec.0[first]);
    let mut calls = first_subsets.len() as u64;
    let mut stage1: Vec<u128> = first_subsets
        .par_iter()
        .map(|&b| action.canonical_form(&FaceSet::from_bits(n, b)).bits)
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    stage1.sort_by(|a, b| lex_cmp_bits(*a, *b));

    // every combination of choices in the other dimensions
    let mut extensions: Vec<u128> = vec![0];
    for (d, faces) in by_dim.iter().enumerate() {
        if d == first {
            continue;
        }
        let choices = subsets(faces, fvec.0[d]);
        extensions = extensions.iter().flat_map(|&e| choices.iter().map(move |&c| e | c)).collect();
    }
    calls += (stage1.len() * extensions.len()) as u64;
    let found: HashSet<u128> = stage1
        .par_iter()
        .flat_map_iter(|&r| {
            let action = &action;
            let mut local = HashSet::new();
            for &e in &extensions {
                local.insert(action.canonical_form(&FaceSet::from_bits(n, r | e)).bits);
            }
            local.into_iter()
        })
        .collect();
    let mut reps: Vec<FaceSet> = found.into_iter().map(|b| FaceSet::from_bits(n, b)).collect();
    reps.sort();
    let reps = reps
        .into_iter()
        .map(|c| OrbitRep { orbit_size: action.orbit_size(&c), fvec: fvec.clone(), canonical: c })
        .collect();
    let stats = EnumStats { first_dim: first + 1, first_stage_orbits: stage1.len(), canonical_calls: calls };
    Ok((reps, stats))
}

/// Every orbit of `e(n)`-subsets of the ground set.
///
/// Ordered by f-vector (more edges first) and then by canonical form. For
/// `n = 3` the order is the fixed reference catalog instead.
pub fn all_candidate_orbits(n: usize) -> Result<Vec<OrbitRep>, OrbitError> {
    let k = num_edges(n);
    let mut out = Vec::new();
    for fv in admissible_fvectors(n, k) {
        out.extend(orbits_with_fvector(n, &fv)?.0);
    }
    if n == 3 {
        let action = SymAction::get(3)?;
        let order: HashMap<u128, usize> = N3_CATALOG
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let fs = FaceSet::parse(3, s).expect("catalog entry parses");
                (action.canonical_form(&fs).bits, i)
            })
            .collect();
        out.sort_by_key(|r| order[&r.canonical.bits]);
    }
    Ok(out)
}

/// Reference labelling of the 35 orbits for the 3-simplex. Entry `i` is a
/// member of orbit `i + 1`; it is not necessarily the canonical form.
pub const N3_CATALOG: [&str; 35] = [
    "12,13,14,23,24,34",
    "12,13,14,23,24,123",
    "12,13,14,24,34,123",
    "12,13,14,23,24,1234",
    "12,13,14,23,123,124",
    "12,13,23,34,123,124",
    "12,13,14,34,123,124",
    "12,13,14,24,123,234",
    "12,13,24,34,123,124",
    "12,13,24,34,123,234",
    "12,13,123,124,134,234",
    "12,34,123,124,134,234",
    "12,13,14,23,123,1234",
    "12,13,14,24,123,1234",
    "12,14,24,34,123,1234",
    "12,13,24,34,123,1234",
    "12,123,124,134,234,1234",
    "12,13,14,123,124,134",
    "12,13,14,123,124,234",
    "12,13,23,123,124,134",
    "12,14,24,123,134,234",
    "12,13,24,123,124,134",
    "12,13,34,123,124,234",
    "12,13,14,123,124,1234",
    "12,13,14,123,234,1234",
    "12,13,23,123,124,1234",
    "12,14,24,123,134,1234",
    "12,13,24,123,124,1234",
    "12,13,34,123,124,1234",
    "12,13,24,123,234,1234",
    "12,24,34,123,134,1234",
    "12,13,123,124,134,1234",
    "12,13,123,124,234,1234",
    "12,34,123,124,134,1234",
    "12,14,123,134,234,1234",
];

/// The reference face set labelled `index` (1-based) for the 3-simplex.
pub fn n3_catalog_set(index: usize) -> Option<FaceSet> {
    N3_CATALOG.get(index.checked_sub(1)?).map(|s| FaceSet::parse(3, s).expect("catalog entry parses"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fs(n: usize, s: &str) -> FaceSet {
        FaceSet::parse(n, s).unwrap()
    }

    #[test]
    fn transposition_relabels() {
        let s = fs(2, "12,13,123");
        assert_eq!(apply_perm(&[2, 1, 3], &s).unwrap(), fs(2, "12,23,123"));
        assert_eq!(apply_perm(&[1, 2, 3], &s).unwrap(), s);
        assert!(apply_perm(&[1, 1, 3], &s).is_err());
    }

    #[test]
    fn four_cycle_relabels() {
        let s = fs(3, "12,13,14,123,124,134");
        let img = apply_perm(&[2, 3, 4, 1], &s).unwrap();
        assert_eq!(img, fs(3, "12,23,24,123,124,234"));
    }

    #[test]
    fn triangle_orbit_shares_a_form() {
        let a = canonical_form(&fs(2, "12,13,123")).unwrap();
        let b = canonical_form(&fs(2, "12,23,123")).unwrap();
        let c = canonical_form(&fs(2, "13,23,123")).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(canonical_form(&fs(2, "12,13,23")).unwrap(), fs(2, "12,13,23"));
    }

    #[test]
    fn branch_and_prune_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=4 {
            let action = SymAction::get(n).unwrap();
            let mut idx: Vec<usize> = (0..action.ground().len()).collect();
            for _ in 0..400 {
                idx.shuffle(&mut rng);
                let k = rng.random_range(1..=idx.len());
                let bits = idx[..k].iter().fold(0u128, |b, &i| b | 1 << i);
                let s = FaceSet::from_bits(n, bits);
                assert_eq!(action.canonical_form(&s), action.canonical_brute_force(&s));
            }
        }
    }

    #[test]
    fn fvectors() {
        assert_eq!(admissible_fvectors(2, 3), vec![FVec(vec![3, 0]), FVec(vec![2, 1])]);
        let v3 = admissible_fvectors(3, 6);
        assert_eq!(v3.len(), 10);
        assert!(v3.contains(&FVec(vec![6, 0, 0])));
        assert!(v3.contains(&FVec(vec![2, 3, 1])));
    }

    #[test]
    fn stratified_counts_for_the_tetrahedron() {
        let (reps, stats) = orbits_with_fvector(3, &FVec(vec![3, 2, 1])).unwrap();
        assert_eq!(reps.len(), 8);
        assert_eq!(stats.first_dim, 1);
        assert_eq!(stats.first_stage_orbits, 3);
        assert_eq!(stats.canonical_calls, 38);
        assert_eq!(orbits_with_fvector(3, &FVec(vec![6, 0, 0])).unwrap().0.len(), 1);
        assert_eq!(orbits_with_fvector(3, &FVec(vec![5, 1, 0])).unwrap().0.len(), 2);
    }

    #[test]
    fn permutations_are_lexicographic() {
        let p = all_permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![1, 2, 3]);
        assert_eq!(p[5], vec![3, 2, 1]);
    }
}
