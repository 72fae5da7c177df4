//! Permutation groups on small point sets.
//!
//! Groups are given by generators and answer order, membership,
//! transitivity, block-system, and solvability queries through a
//! deterministic Schreier-Sims stabilizer chain. Points are 0-based
//! internally; text forms (cycle notation) are 1-based.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("not a bijection of 1..={0}")]
    NotBijective(usize),
    #[error("generators act on different degrees ({0} and {1})")]
    DegreeMismatch(usize, usize),
    #[error("group is not transitive")]
    Intransitive,
    #[error("malformed cycle notation: {0}")]
    Parse(String),
    #[error("partitions of different sizes ({0} and {1})")]
    PartitionSize(usize, usize),
}

/// A permutation of `0..d`; `images[x]` is the image of `x`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm {
    images: Vec<u16>,
}

impl Perm {
    pub fn identity(d: usize) -> Self {
        Perm { images: (0..d as u16).collect() }
    }

    /// From 0-based images.
    pub fn new(images: Vec<usize>) -> Result<Self, PermError> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            if x >= d || std::mem::replace(&mut seen[x], true) {
                return Err(PermError::NotBijective(d));
            }
        }
        Ok(Perm { images: images.into_iter().map(|x| x as u16).collect() })
    }

    /// From 1-based images, e.g. `[2, 1, 3]` for the transposition of 1 and 2.
    pub fn from_images_one_based(images: &[usize]) -> Result<Self, PermError> {
        if images.contains(&0) {
            return Err(PermError::NotBijective(images.len()));
        }
        Self::new(images.iter().map(|x| x - 1).collect())
    }

    /// From 1-based cycles.
    pub fn from_cycles(d: usize, cycles: &[&[usize]]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..d).collect();
        let mut touched = vec![false; d];
        for c in cycles {
            for (k, &x) in c.iter().enumerate() {
                let y = c[(k + 1) % c.len()];
                if x == 0 || x > d || y == 0 || y > d || std::mem::replace(&mut touched[x - 1], true) {
                    return Err(PermError::NotBijective(d));
                }
                images[x - 1] = y - 1;
            }
        }
        Self::new(images)
    }

    /// Parses cycle notation such as `(1,2)(3,4,5)`; `()` is the identity.
    pub fn parse_cycles(d: usize, s: &str) -> Result<Self, PermError> {
        let bad = || PermError::Parse(s.to_string());
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body_end = rest.find(')').ok_or_else(bad)?;
            if !rest.starts_with('(') {
                return Err(bad());
            }
            let body = &rest[1..body_end];
            if !body.trim().is_empty() {
                let c = body
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                cycles.push(c);
            }
            rest = rest[body_end + 1..].trim_start();
        }
        let refs: Vec<&[usize]> = cycles.iter().map(Vec::as_slice).collect();
        Self::from_cycles(d, &refs)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm { images: self.images.iter().map(|&x| other.images[x as usize]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u16; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Perm { images: inv }
    }

    /// Conjugate `g^-1 self g`.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        g.inverse().then(self).then(g)
    }

    pub fn commutator(a: &Perm, b: &Perm) -> Perm {
        a.inverse().then(&b.inverse()).then(a).then(b)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for s in 0..d {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.apply(s);
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.apply(x);
            }
            if c.len() > 1 {
                out.push(c);
            }
        }
        out
    }

    /// Order of the permutation as a group element.
    pub fn order(&self) -> u64 {
        self.cycles().iter().fold(1u64, |acc, c| num_integer::lcm(acc, c.len() as u64))
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let s: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", s.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Debug)]
struct Level {
    base: usize,
    gens: Vec<Perm>,
    // transversal[x] maps the base point to x
    transversal: Vec<Option<Perm>>,
    orbit: Vec<usize>,
}

impl Level {
    fn new(base: usize, d: usize) -> Self {
        let mut transversal = vec![None; d];
        transversal[base] = Some(Perm::identity(d));
        Level { base, gens: Vec::new(), transversal, orbit: vec![base] }
    }

    fn rebuild_orbit(&mut self) {
        let d = self.transversal.len();
        let mut transversal = vec![None; d];
        transversal[self.base] = Some(Perm::identity(d));
        let mut orbit = vec![self.base];
        let mut k = 0;
        while k < orbit.len() {
            let x = orbit[k];
            let ux = transversal[x].clone().expect("orbit point has a transversal");
            for g in &self.gens {
                let y = g.apply(x);
                if transversal[y].is_none() {
                    transversal[y] = Some(ux.then(g));
                    orbit.push(y);
                }
            }
            k += 1;
        }
        self.transversal = transversal;
        self.orbit = orbit;
    }
}

/// Stabilizer chain: base points with transversals of the point stabilizers.
#[derive(Clone, Debug)]
pub struct StabChain {
    levels: Vec<Level>,
    degree: usize,
}

impl StabChain {
    fn build(degree: usize, gens: &[Perm]) -> Self {
        let mut chain = StabChain { levels: Vec::new(), degree };
        let gens: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        if gens.is_empty() {
            return chain;
        }
        // initial base: points moved by generators, in order, until each
        // generator moves some base point
        let mut base: Vec<usize> = Vec::new();
        for g in &gens {
            if base.iter().all(|&b| g.apply(b) == b) {
                let p = (0..degree).find(|&x| g.apply(x) != x).expect("non-identity");
                base.push(p);
            }
        }
        for &b in &base {
            chain.levels.push(Level::new(b, degree));
        }
        for g in &gens {
            for l in 0..chain.levels.len() {
                chain.levels[l].gens.push(g.clone());
                if chain.levels[l].base != g.apply(chain.levels[l].base) {
                    break;
                }
            }
        }
        for lvl in chain.levels.iter_mut() {
            lvl.rebuild_orbit();
        }
        chain.complete();
        chain
    }

    /// Sifts `g` through levels starting at `start`.
    fn strip(&self, g: &Perm, start: usize) -> (Perm, usize) {
        let mut h = g.clone();
        for j in start..self.levels.len() {
            let lvl = &self.levels[j];
            let x = h.apply(lvl.base);
            match &lvl.transversal[x] {
                Some(u) => h = h.then(&u.inverse()),
                None => return (h, j),
            }
        }
        (h, self.levels.len())
    }

    fn complete(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let iu = i as usize;
            let mut jumped = None;
            'scan: for k in 0..self.levels[iu].orbit.len() {
                let beta = self.levels[iu].orbit[k];
                for s in 0..self.levels[iu].gens.len() {
                    let lvl = &self.levels[iu];
                    let x = &lvl.gens[s];
                    let ub = lvl.transversal[beta].as_ref().expect("orbit point");
                    let image = x.apply(beta);
                    let ubx = lvl.transversal[image].as_ref().expect("orbit is closed");
                    let h = ub.then(x).then(&ubx.inverse());
                    let (y, j) = self.strip(&h, iu + 1);
                    if j < self.levels.len() || !y.is_identity() {
                        if j == self.levels.len() {
                            let p = (0..self.degree).find(|&p| y.apply(p) != p).expect("non-identity");
                            self.levels.push(Level::new(p, self.degree));
                        }
                        for l in iu + 1..=j {
                            self.levels[l].gens.push(y.clone());
                            self.levels[l].rebuild_orbit();
                        }
                        jumped = Some(j);
                        break 'scan;
                    }
                }
            }
            match jumped {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.degree && self.strip(g, 0).0.is_identity()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn strong_generators(&self) -> Vec<Perm> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for l in &self.levels {
            for g in &l.gens {
                if seen.insert(g.clone()) {
                    out.push(g.clone());
                }
            }
        }
        out
    }
}

/// A permutation group given by generators.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    chain: OnceLock<StabChain>,
}

impl PermGroup {
    pub fn new(degree: usize, gens: Vec<Perm>) -> Result<Self, PermError> {
        for g in &gens {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch(degree, g.degree()));
            }
        }
        Ok(PermGroup { degree, gens, chain: OnceLock::new() })
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup { degree, gens: Vec::new(), chain: OnceLock::new() }
    }

    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut cyc: Vec<usize> = (1..degree).collect();
            cyc.push(0);
            gens.push(Perm::new(cyc).expect("cycle"));
            let mut t: Vec<usize> = (0..degree).collect();
            t.swap(0, 1);
            gens.push(Perm::new(t).expect("transposition"));
        }
        PermGroup { degree, gens, chain: OnceLock::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn chain(&self) -> &StabChain {
        self.chain.get_or_init(|| StabChain::build(self.degree, &self.gens))
    }

    pub fn order(&self) -> BigUint {
        self.chain().order()
    }

    pub fn order_u128(&self) -> Option<u128> {
        self.order().to_u128()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.chain().contains(g)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    /// Orbits of the generators on `0..d`, each sorted, ordered by least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for s in 0..self.degree {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut orb = vec![s];
            let mut k = 0;
            while k < orb.len() {
                let x = orb[k];
                for g in &self.gens {
                    let y = g.apply(x);
                    if !seen[y] {
                        seen[y] = true;
                        orb.push(y);
                    }
                }
                k += 1;
            }
            orb.sort_unstable();
            out.push(orb);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbits().len() == 1
    }

    /// Finest block system in which `a` and `b` share a block.
    pub fn block_closure(&self, a: usize, b: usize) -> BlockSystem {
        let mut parent: Vec<usize> = (0..self.degree).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        let mut queue = VecDeque::new();
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[rb] = ra;
            queue.push_back((a, b));
        }
        while let Some((x, y)) = queue.pop_front() {
            for g in &self.gens {
                let (gx, gy) = (g.apply(x), g.apply(y));
                let (rx, ry) = (find(&mut parent, gx), find(&mut parent, gy));
                if rx != ry {
                    parent[ry] = rx;
                    queue.push_back((gx, gy));
                }
            }
        }
        let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
        for x in 0..self.degree {
            let r = find(&mut parent, x);
            blocks.entry(r).or_default().push(x);
        }
        BlockSystem::new(blocks.into_values().collect())
    }

    /// All minimal nontrivial block systems of a transitive group.
    pub fn minimal_block_systems(&self) -> Result<Vec<BlockSystem>, PermError> {
        if !self.is_transitive() {
            return Err(PermError::Intransitive);
        }
        let mut found: Vec<BlockSystem> = Vec::new();
        for k in 1..self.degree {
            let bs = self.block_closure(0, k);
            if bs.blocks.len() > 1 && !found.contains(&bs) {
                found.push(bs);
            }
        }
        let minimal: Vec<BlockSystem> =
            found.iter().filter(|b| !found.iter().any(|c| c != *b && c.refines(b))).cloned().collect();
        Ok(minimal)
    }

    pub fn is_primitive(&self) -> Result<bool, PermError> {
        Ok(self.minimal_block_systems()?.is_empty())
    }

    /// Smallest normal subgroup of `self` containing `gens`.
    pub fn normal_closure(&self, gens: Vec<Perm>) -> PermGroup {
        let mut sub = PermGroup::trivial(self.degree);
        let mut pending: VecDeque<Perm> = gens.into();
        while let Some(h) = pending.pop_front() {
            if h.is_identity() || sub.contains(&h) {
                continue;
            }
            let mut g = sub.gens.clone();
            g.push(h.clone());
            sub = PermGroup { degree: self.degree, gens: g, chain: OnceLock::new() };
            for x in &self.gens {
                pending.push_back(h.conjugate_by(x));
            }
        }
        sub
    }

    pub fn derived_subgroup(&self) -> PermGroup {
        let mut comms = Vec::new();
        for (i, a) in self.gens.iter().enumerate() {
            for b in &self.gens[i + 1..] {
                comms.push(Perm::commutator(a, b));
            }
        }
        self.normal_closure(comms)
    }

    /// Orders along the derived series, ending at the trivial group or at
    /// the first repeated order.
    pub fn derived_series_orders(&self) -> Vec<BigUint> {
        let mut out = vec![self.order()];
        let mut g = self.clone();
        loop {
            let d = g.derived_subgroup();
            let o = d.order();
            let stop = o.is_one() || &o == out.last().expect("nonempty");
            out.push(o);
            if stop {
                return out;
            }
            g = d;
        }
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series_orders().last().expect("nonempty").is_one()
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().enumerate().all(|(i, a)| self.gens[i + 1..].iter().all(|b| a.then(b) == b.then(a)))
    }

    /// All elements, for small groups only.
    pub fn elements(&self, limit: usize) -> Option<Vec<Perm>> {
        let mut seen: HashSet<Perm> = HashSet::new();
        let id = Perm::identity(self.degree);
        seen.insert(id.clone());
        let mut out = vec![id];
        let mut k = 0;
        while k < out.len() {
            for g in &self.gens {
                let y = out[k].then(g);
                if seen.insert(y.clone()) {
                    if out.len() >= limit {
                        return None;
                    }
                    out.push(y);
                }
            }
            k += 1;
        }
        Some(out)
    }

    /// Whether every generator maps blocks of `p` onto blocks.
    pub fn preserves(&self, p: &BlockSystem) -> bool {
        self.gens.iter().all(|g| p.is_preserved_by(g))
    }
}

/// A partition of `0..d`, stored with sorted blocks in order of least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockSystem {
    blocks: Vec<Vec<usize>>,
}

impl BlockSystem {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        BlockSystem { blocks }
    }

    /// From a label per point: points with equal labels share a block.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (x, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(x);
        }
        Self::new(map.into_values().collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn degree(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.degree()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                l[x] = i;
            }
        }
        l
    }

    pub fn is_uniform(&self) -> bool {
        self.blocks.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() <= 1 || self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &BlockSystem) -> bool {
        let l = other.labels();
        self.blocks.iter().all(|b| b.iter().all(|&x| l[x] == l[b[0]]))
    }

    pub fn is_preserved_by(&self, g: &Perm) -> bool {
        let l = self.labels();
        self.blocks.iter().all(|b| {
            let t = l[g.apply(b[0])];
            b.iter().all(|&x| l[g.apply(x)] == t)
        })
    }
}

impl fmt::Display for BlockSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let v: Vec<String> = b.iter().map(|x| (x + 1).to_string()).collect();
                format!("{{{}}}", v.join(","))
            })
            .collect();
        write!(f, "{}", s.join(" "))
    }
}

/// The subgroup of `S_d` preserving every given partition.
///
/// Builds one coset representative per point of each basic orbit by a
/// backtracking search over images, keeping a partial map only while it is
/// consistent with every partition (two points share a block exactly when
/// their images do, and blocks go to blocks of the same size).
pub fn partition_stabilizer_intersection(partitions: &[BlockSystem]) -> Result<PermGroup, PermError> {
    let d = partitions.first().map_or(0, BlockSystem::degree);
    for p in partitions {
        if p.degree() != d {
            return Err(PermError::PartitionSize(d, p.degree()));
        }
    }
    let labels: Vec<Vec<usize>> = partitions.iter().map(BlockSystem::labels).collect();
    let sizes: Vec<Vec<usize>> =
        partitions.iter().zip(&labels).map(|(p, l)| (0..d).map(|x| p.blocks[l[x]].len()).collect()).collect();
    let search = IntersectionSearch { d, labels, sizes };
    let mut gens: Vec<Perm> = Vec::new();
    for i in 0..d {
        // generators found so far that fix 0..i pointwise
        let mut level_gens: Vec<Perm> = gens.iter().filter(|g| (0..i).all(|x| g.apply(x) == x)).cloned().collect();
        for y in i + 1..d {
            let orbit = orbit_of(i, &level_gens, d);
            if orbit.contains(&y) {
                continue;
            }
            let mut img = vec![usize::MAX; d];
            let mut used = vec![false; d];
            for x in 0..i {
                img[x] = x;
                used[x] = true;
            }
            if !search.consistent(&img, i, y) {
                continue;
            }
            img[i] = y;
            used[y] = true;
            if search.extend(&mut img, &mut used, i + 1) {
                let g = Perm::new(img).expect("search yields a bijection");
                level_gens.push(g.clone());
                gens.push(g);
            }
        }
    }
    PermGroup::new(d, gens)
}

fn orbit_of(x: usize, gens: &[Perm], d: usize) -> Vec<usize> {
    let mut seen = vec![false; d];
    seen[x] = true;
    let mut orb = vec![x];
    let mut k = 0;
    while k < orb.len() {
        for g in gens {
            let y = g.apply(orb[k]);
            if !seen[y] {
                seen[y] = true;
                orb.push(y);
            }
        }
        k += 1;
    }
    orb
}

struct IntersectionSearch {
    d: usize,
    labels: Vec<Vec<usize>>,
    sizes: Vec<Vec<usize>>,
}

impl IntersectionSearch {
    /// Can `x -> y` be added to the partial map defined on `0..x`?
    fn consistent(&self, img: &[usize], x: usize, y: usize) -> bool {
        for (l, s) in self.labels.iter().zip(&self.sizes) {
            if s[x] != s[y] {
                return false;
            }
            for x2 in 0..x {
                if (l[x] == l[x2]) != (l[y] == l[img[x2]]) {
                    return false;
                }
            }
        }
        true
    }

    fn extend(&self, img: &mut Vec<usize>, used: &mut Vec<bool>, x: usize) -> bool {
        if x == self.d {
            return true;
        }
        for y in 0..self.d {
            if used[y] || !self.consistent(img, x, y) {
                continue;
            }
            img[x] = y;
            used[y] = true;
            if self.extend(img, used, x + 1) {
                return true;
            }
            used[y] = false;
            img[x] = usize::MAX;
        }
        false
    }
}

/// Isomorphism invariants used to name small groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub order: u128,
    /// `(element order, count)` pairs in increasing element order.
    pub element_orders: Vec<(u64, usize)>,
    pub center_order: usize,
    pub derived_order: u128,
    pub conjugacy_classes: usize,
}

/// Largest group whose elements are enumerated for naming.
pub const SIGNATURE_LIMIT: usize = 5000;

impl PermGroup {
    pub fn signature(&self) -> Option<Signature> {
        let elems = self.elements(SIGNATURE_LIMIT)?;
        let mut hist: HashMap<u64, usize> = HashMap::new();
        for e in &elems {
            *hist.entry(e.order()).or_default() += 1;
        }
        let mut element_orders: Vec<(u64, usize)> = hist.into_iter().collect();
        element_orders.sort_unstable();
        let center_order = elems.iter().filter(|e| self.gens.iter().all(|g| e.then(g) == g.then(e))).count();
        let mut seen: HashSet<&Perm> = HashSet::new();
        let index: HashMap<&Perm, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut classes = 0;
        for e in &elems {
            if seen.contains(e) {
                continue;
            }
            classes += 1;
            let mut queue = vec![e.clone()];
            seen.insert(e);
            while let Some(c) = queue.pop() {
                for g in &self.gens {
                    let k = c.conjugate_by(g);
                    let r = &elems[index[&k]];
                    if seen.insert(r) {
                        queue.push(k);
                    }
                }
            }
        }
        Some(Signature {
            order: elems.len() as u128,
            element_orders,
            center_order,
            derived_order: self.derived_subgroup().order().to_u128().expect("small"),
            conjugacy_classes: classes,
        })
    }
}

fn cyc(d: usize, cycles: &[&[usize]]) -> Perm {
    Perm::from_cycles(d, cycles).expect("catalog permutation")
}

/// Named groups recognised by [`describe`], each built concretely.
///
/// `D_8 wr Z/2` is absent on purpose: since `D_8 = Z/2 wr Z/2` it is the
/// same group as `Z/2 wr D_8` (a Sylow 2-subgroup of `S_8`).
pub fn catalog() -> &'static [(String, Signature)] {
    static CATALOG: OnceLock<Vec<(String, Signature)>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let groups: Vec<(&str, usize, Vec<Perm>)> = vec![
            ("Z/2", 2, vec![cyc(2, &[&[1, 2]])]),
            ("V", 4, vec![cyc(4, &[&[1, 2], &[3, 4]]), cyc(4, &[&[1, 3], &[2, 4]])]),
            ("Z/4", 4, vec![cyc(4, &[&[1, 2, 3, 4]])]),
            ("Z/2^3", 6, vec![cyc(6, &[&[1, 2]]), cyc(6, &[&[3, 4]]), cyc(6, &[&[5, 6]])]),
            ("D_8", 4, vec![cyc(4, &[&[1, 2, 3, 4]]), cyc(4, &[&[1, 3]])]),
            ("Z/2 x D_8", 6, vec![cyc(6, &[&[1, 2, 3, 4]]), cyc(6, &[&[1, 3]]), cyc(6, &[&[5, 6]])]),
            ("S_4", 4, vec![cyc(4, &[&[1, 2, 3, 4]]), cyc(4, &[&[1, 2]])]),
            ("Z/2 x S_4", 6, vec![cyc(6, &[&[1, 2, 3, 4]]), cyc(6, &[&[1, 2]]), cyc(6, &[&[5, 6]])]),
            (
                "Z/2 wr V",
                8,
                vec![
                    cyc(8, &[&[1, 2]]),
                    cyc(8, &[&[1, 3], &[2, 4], &[5, 7], &[6, 8]]),
                    cyc(8, &[&[1, 5], &[2, 6], &[3, 7], &[4, 8]]),
                ],
            ),
            (
                "V wr Z/2",
                8,
                vec![
                    cyc(8, &[&[1, 2], &[3, 4]]),
                    cyc(8, &[&[1, 3], &[2, 4]]),
                    cyc(8, &[&[1, 5], &[2, 6], &[3, 7], &[4, 8]]),
                ],
            ),
            (
                "Z/2 wr D_8",
                8,
                vec![cyc(8, &[&[1, 2]]), cyc(8, &[&[1, 3, 5, 7], &[2, 4, 6, 8]]), cyc(8, &[&[1, 5], &[2, 6]])],
            ),
            (
                "S_4 wr Z/2",
                8,
                vec![cyc(8, &[&[1, 2, 3, 4]]), cyc(8, &[&[1, 2]]), cyc(8, &[&[1, 5], &[2, 6], &[3, 7], &[4, 8]])],
            ),
        ];
        groups
            .into_iter()
            .map(|(name, d, gens)| {
                let g = PermGroup::new(d, gens).expect("catalog degree");
                (name.to_string(), g.signature().expect("catalog groups are small"))
            })
            .collect()
    })
}

/// A short structure label for the group.
pub fn describe(g: &PermGroup) -> String {
    let order = g.order();
    if order.is_one() {
        return "trivial".to_string();
    }
    let d = g.degree();
    let transitive = g.is_transitive();
    let fact: BigUint = (1..=d).fold(BigUint::one(), |a, k| a * BigUint::from(k));
    if transitive && d >= 3 && order == fact {
        return format!("S_{d}");
    }
    if transitive && d >= 4 && order.clone() * BigUint::from(2u32) == fact {
        return format!("A_{d}");
    }
    if let Some(sig) = g.signature() {
        if let Some((name, _)) = catalog().iter().find(|(_, s)| *s == sig) {
            return name.clone();
        }
        if g.is_abelian() && sig.element_orders.last().map(|&(o, _)| o as u128) == Some(sig.order) {
            return format!("Z/{}", sig.order);
        }
    }
    format!(
        "order-{} {}, {}",
        order,
        if transitive { "transitive" } else { "intransitive" },
        if g.is_solvable() { "solvable" } else { "non-solvable" }
    )
}
