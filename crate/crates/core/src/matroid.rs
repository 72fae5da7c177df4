//! The algebraic matroid of the Heron variety.
//!
//! Independence of a set of faces is the rank of the corresponding rows of
//! the Jacobian of the parametrization at a generic point. Bases are
//! recognised three ways: random evaluation (one-sided, certifies bases),
//! the zero mixed-volume test (one-sided, certifies non-bases), and an exact
//! symbolic determinant (decides both).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bkk::{square_system_polytopes, zero_mixed_volume, BkkError};
use crate::orbits::{all_candidate_orbits, FaceSet, OrbitError, OrbitRep, SymAction};
use crate::poly::{det_zero_test, poly_det, random_rational_point, PolyMatrix, ZeroTest};
use crate::scalar::{det_exact, rank_exact, Fp, Scalar};
use crate::simplex::{num_edges, HeronModel, SimplexError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Bkk(#[from] BkkError),
    #[error("candidate has {got} faces, a basis has {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("{0:?} is a basis, not a non-basis")]
    NotNonbasis(FaceSet),
    #[error("at least one trial is required")]
    NoTrials,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Basis,
    Nonbasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    BkkZero,
    ExactDet,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Basis => "basis",
            Verdict::Nonbasis => "nonbasis",
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::MonteCarlo => "monte_carlo",
            Method::BkkZero => "bkk_zero",
            Method::ExactDet => "exact_det",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "basis" => Ok(Verdict::Basis),
            "nonbasis" => Ok(Verdict::Nonbasis),
            _ => Err(format!("unknown verdict {s:?}")),
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "monte_carlo" => Ok(Method::MonteCarlo),
            "bkk_zero" => Ok(Method::BkkZero),
            "exact_det" => Ok(Method::ExactDet),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

/// Evidence attached to a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// The Jacobian minor is nonzero at this rational point.
    NonzeroAt(Vec<BigRational>),
    /// The Jacobian minor is the zero polynomial.
    SymbolicZero,
    /// The square system has zero mixed volume.
    ZeroMixedVolume,
    /// Random evaluation found only zeros; no certificate.
    Unconfirmed,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::NonzeroAt(p) => {
                let s: Vec<String> = p.iter().map(|q| q.to_string()).collect();
                write!(f, "nonzero_at:{}", s.join(","))
            }
            Witness::SymbolicZero => f.write_str("symbolic_zero"),
            Witness::ZeroMixedVolume => f.write_str("zero_mixed_volume"),
            Witness::Unconfirmed => f.write_str("unconfirmed"),
        }
    }
}

impl FromStr for Witness {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symbolic_zero" => Ok(Witness::SymbolicZero),
            "zero_mixed_volume" => Ok(Witness::ZeroMixedVolume),
            "unconfirmed" => Ok(Witness::Unconfirmed),
            _ => {
                let body = s.strip_prefix("nonzero_at:").ok_or_else(|| format!("bad witness {s:?}"))?;
                let pts = body
                    .split(',')
                    .map(|t| t.parse::<BigRational>().map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Witness::NonzeroAt(pts))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisVerdict {
    pub subset: FaceSet,
    pub verdict: Verdict,
    pub method: Method,
    pub witness: Witness,
}

impl BasisVerdict {
    pub fn is_basis(&self) -> bool {
        self.verdict == Verdict::Basis
    }

    /// Whether the verdict carries a certificate rather than a probabilistic guess.
    pub fn is_certified(&self) -> bool {
        !matches!(self.witness, Witness::Unconfirmed)
    }
}

fn check_size(b: &FaceSet) -> Result<(), MatroidError> {
    let e = num_edges(b.n());
    if b.len() != e {
        return Err(MatroidError::WrongSize { expected: e, got: b.len() });
    }
    Ok(())
}

/// Square Jacobian minor for `b` with the unit edge rows expanded away:
/// an edge row is a unit vector, so it and its column can be deleted. The
/// sign is irrelevant for zero tests and is dropped.
pub fn reduced_minor(b: &FaceSet) -> Result<PolyMatrix<BigRational>, MatroidError> {
    let model = HeronModel::get(b.n())?;
    let e = model.ground().num_edges();
    let idx = b.index_vec();
    let rows: Vec<usize> = idx.iter().copied().filter(|&i| i >= e).collect();
    let cols: Vec<usize> = (0..e).filter(|c| !b.contains_index(*c)).collect();
    Ok(model.jacobian_submatrix(&rows).submatrix(&(0..rows.len()).collect::<Vec<_>>(), &cols))
}

/// Largest reduced minor whose determinant is expanded symbolically.
const SYMBOLIC_DET_MAX: usize = 6;

/// Decides basis membership exactly: minors up to [`SYMBOLIC_DET_MAX`]
/// are expanded symbolically, larger ones go through the modular zero test.
pub fn is_basis_exact(b: &FaceSet) -> Result<BasisVerdict, MatroidError> {
    check_size(b)?;
    let m = reduced_minor(b)?;
    if m.rows() > SYMBOLIC_DET_MAX {
        let (verdict, witness) = match det_zero_test(&m).expect("square") {
            ZeroTest::Zero => (Verdict::Nonbasis, Witness::SymbolicZero),
            ZeroTest::NonZero { witness, .. } => (Verdict::Basis, Witness::NonzeroAt(witness)),
        };
        return Ok(BasisVerdict { subset: *b, verdict, method: Method::ExactDet, witness });
    }
    let det = if m.rows() == 0 { crate::QPoly::one(m.vars().clone()) } else { poly_det(&m).expect("square") };
    if det.is_zero() {
        return Ok(BasisVerdict {
            subset: *b,
            verdict: Verdict::Nonbasis,
            method: Method::ExactDet,
            witness: Witness::SymbolicZero,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(b.bits() as u64 ^ 0x5eed);
    let nvars = m.vars().len();
    loop {
        let p = random_rational_point(&mut rng, nvars);
        if !det.evaluate(&p).expect("arity").is_zero() {
            return Ok(BasisVerdict {
                subset: *b,
                verdict: Verdict::Basis,
                method: Method::ExactDet,
                witness: Witness::NonzeroAt(p),
            });
        }
    }
}

/// The Jacobian of the parametrization evaluated at one random point,
/// reduced into the prime field.
#[derive(Clone, Debug)]
pub struct SampledJacobian {
    pub point: Vec<BigRational>,
    rows: Vec<Vec<Fp>>,
}

impl SampledJacobian {
    pub fn new<R: Rng + ?Sized>(model: &HeronModel, rng: &mut R) -> Self {
        let point = random_rational_point(rng, model.ground().num_edges());
        Self::at(model, point)
    }

    pub fn at(model: &HeronModel, point: Vec<BigRational>) -> Self {
        let fp: Vec<Fp> = point.iter().map(Fp::from_rational).collect();
        let all: Vec<usize> = (0..model.ground().len()).collect();
        let rows = model.jacobian_at(&all, &fp);
        SampledJacobian { point, rows }
    }

    /// Rank of the selected rows; never exceeds the generic rank, and
    /// equals the row count only if the rows are generically independent.
    pub fn rank(&self, s: &FaceSet) -> usize {
        let m: Vec<Vec<Fp>> = s.indices().map(|i| self.rows[i].clone()).collect();
        if m.is_empty() {
            0
        } else {
            rank_exact(m)
        }
    }

    pub fn det_nonzero(&self, b: &FaceSet) -> bool {
        let m: Vec<Vec<Fp>> = b.indices().map(|i| self.rows[i].clone()).collect();
        !det_exact(m).is_zero()
    }
}

/// Exact determinant of the Jacobian minor at a rational point.
fn rational_minor_at(model: &HeronModel, b: &FaceSet, point: &[BigRational]) -> BigRational {
    det_exact(model.jacobian_at(&b.index_vec(), point))
}

/// One-sided random test: any nonzero evaluation proves `b` is a basis.
pub fn is_basis_mc<R: Rng + ?Sized>(b: &FaceSet, trials: usize, rng: &mut R) -> Result<BasisVerdict, MatroidError> {
    check_size(b)?;
    if trials == 0 {
        return Err(MatroidError::NoTrials);
    }
    let model = HeronModel::get(b.n())?;
    for _ in 0..trials {
        let sample = SampledJacobian::new(&model, rng);
        // a nonzero residue certifies a nonzero rational value
        if sample.det_nonzero(b) || !rational_minor_at(&model, b, &sample.point).is_zero() {
            return Ok(BasisVerdict {
                subset: *b,
                verdict: Verdict::Basis,
                method: Method::MonteCarlo,
                witness: Witness::NonzeroAt(sample.point),
            });
        }
    }
    Ok(BasisVerdict {
        subset: *b,
        verdict: Verdict::Nonbasis,
        method: Method::MonteCarlo,
        witness: Witness::Unconfirmed,
    })
}

/// One-sided mixed-volume test: zero mixed volume proves `b` is not a basis.
pub fn is_nonbasis_bkk(b: &FaceSet) -> Result<Option<BasisVerdict>, MatroidError> {
    check_size(b)?;
    let polys = square_system_polytopes(b)?;
    Ok(zero_mixed_volume(&polys, true)?.then_some(BasisVerdict {
        subset: *b,
        verdict: Verdict::Nonbasis,
        method: Method::BkkZero,
        witness: Witness::ZeroMixedVolume,
    }))
}

/// Amplification used by the pipeline before escalating.
pub const MC_TRIALS: usize = 3;

/// Per-stage counts from [`classify_all`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineStats {
    pub orbits: usize,
    pub mc_bases: usize,
    pub bkk_nonbases: usize,
    pub exact_bases: usize,
    pub exact_nonbases: usize,
}

impl PipelineStats {
    pub fn bases(&self) -> usize {
        self.mc_bases + self.exact_bases
    }

    pub fn nonbases(&self) -> usize {
        self.bkk_nonbases + self.exact_nonbases
    }
}

/// Classifies candidates: random evaluation first, the mixed-volume test on
/// what remains, and the exact determinant for the rest. Every verdict is
/// certified.
pub fn classify_candidates(
    n: usize,
    candidates: &[FaceSet],
    seed: u64,
) -> Result<(Vec<BasisVerdict>, PipelineStats), MatroidError> {
    let model = HeronModel::get(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<SampledJacobian> = (0..MC_TRIALS).map(|_| SampledJacobian::new(&model, &mut rng)).collect();
    let results: Vec<Result<(BasisVerdict, u8), MatroidError>> = candidates
        .par_iter()
        .map(|b| {
            check_size(b)?;
            if let Some(s) = samples.iter().find(|s| s.det_nonzero(b)) {
                let v = BasisVerdict {
                    subset: *b,
                    verdict: Verdict::Basis,
                    method: Method::MonteCarlo,
                    witness: Witness::NonzeroAt(s.point.clone()),
                };
                return Ok((v, 0));
            }
            if let Some(v) = is_nonbasis_bkk(b)? {
                return Ok((v, 1));
            }
            let v = is_basis_exact(b)?;
            Ok((v, 2))
        })
        .collect();
    let mut stats = PipelineStats { orbits: candidates.len(), ..Default::default() };
    let mut out = Vec::with_capacity(candidates.len());
    for r in results {
        let (v, stage) = r?;
        match (stage, v.verdict) {
            (0, _) => stats.mc_bases += 1,
            (1, _) => stats.bkk_nonbases += 1,
            (_, Verdict::Basis) => stats.exact_bases += 1,
            (_, Verdict::Nonbasis) => stats.exact_nonbases += 1,
        }
        out.push(v);
    }
    Ok((out, stats))
}

/// Runs the certified pipeline on every orbit representative.
pub fn classify_all(n: usize, seed: u64) -> Result<(Vec<OrbitRep>, Vec<BasisVerdict>, PipelineStats), MatroidError> {
    let reps = all_candidate_orbits(n)?;
    let sets: Vec<FaceSet> = reps.iter().map(|r| r.canonical).collect();
    let (verdicts, stats) = classify_candidates(n, &sets, seed)?;
    Ok((reps, verdicts, stats))
}

/// Generic rank of a set of faces, estimated at one random point (a lower
/// bound that is exact with high probability).
pub fn rank<R: Rng + ?Sized>(s: &FaceSet, rng: &mut R) -> Result<usize, MatroidError> {
    let model = HeronModel::get(s.n())?;
    Ok(SampledJacobian::new(&model, rng).rank(s))
}

/// Whether `s` is dependent, decided exactly: the rows are dependent iff
/// every maximal minor of the non-edge rows (restricted to columns of edges
/// outside `s`) is the zero polynomial.
pub fn is_dependent_exact(s: &FaceSet) -> Result<bool, MatroidError> {
    let model = HeronModel::get(s.n())?;
    let e = model.ground().num_edges();
    let rows: Vec<usize> = s.indices().filter(|&i| i >= e).collect();
    let cols: Vec<usize> = (0..e).filter(|c| !s.contains_index(*c)).collect();
    let r = rows.len();
    if r == 0 {
        return Ok(false);
    }
    if r > cols.len() {
        return Ok(true);
    }
    let sub = model.jacobian_submatrix(&rows);
    let all_rows: Vec<usize> = (0..r).collect();
    let mut chosen = Vec::with_capacity(r);
    fn each_subset(
        cols: &[usize],
        r: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if chosen.len() == r {
            return f(chosen);
        }
        for i in start..cols.len() {
            chosen.push(cols[i]);
            let keep_going = each_subset(cols, r, i + 1, chosen, f);
            chosen.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
    let mut all_zero = true;
    each_subset(&cols, r, 0, &mut chosen, &mut |c| {
        let m = sub.submatrix(&all_rows, c);
        if !poly_det(&m).expect("square").is_zero() {
            all_zero = false;
        }
        all_zero
    });
    Ok(all_zero)
}

/// Orbit representatives of circuits of size at most `max_size`.
///
/// Grows orbit representatives of independent sets one face at a time;
/// every circuit arises as an independent set plus one face. Candidates
/// containing a known circuit are skipped, so every dependent candidate
/// that survives is minimal. Independence is certified by a nonzero rank
/// in the prime field; dependence is confirmed symbolically.
pub fn circuits_up_to(n: usize, max_size: usize, seed: u64) -> Result<Vec<OrbitRep>, MatroidError> {
    let model = HeronModel::get(n)?;
    let action = SymAction::get(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<SampledJacobian> = (0..MC_TRIALS).map(|_| SampledJacobian::new(&model, &mut rng)).collect();
    let nfaces = model.ground().len();
    let mut circuits: Vec<FaceSet> = Vec::new();
    let mut circuit_images: Vec<u128> = Vec::new();
    let mut level: Vec<FaceSet> = vec![FaceSet::from_bits(n, 0)];
    for size in 1..=max_size.min(num_edges(n) + 1) {
        let mut next: HashSet<FaceSet> = HashSet::new();
        for base in &level {
            for f in 0..nfaces {
                if !base.contains_index(f) {
                    next.insert(action.canonical_form(&base.with_index(f)));
                }
            }
        }
        let mut cands: Vec<FaceSet> = next.into_iter().collect();
        cands.sort();
        let tested: Vec<(FaceSet, bool)> = cands
            .par_iter()
            .filter(|c| !circuit_images.iter().any(|&m| m & !c.bits() == 0))
            .map(|c| (*c, samples.iter().any(|s| s.rank(c) == size)))
            .collect();
        let mut new_level = Vec::new();
        for (c, independent) in tested {
            if independent {
                new_level.push(c);
            } else if is_dependent_exact(&c)? {
                circuits.push(c);
                for p in action.perms() {
                    circuit_images.push(action.apply_perm(p, &c)?.bits());
                }
            } else {
                // numerically dependent at every sample but generically independent
                new_level.push(c);
            }
        }
        level = new_level;
    }
    Ok(circuits.into_iter().map(|c| action.orbit_rep(&c)).collect())
}

/// Why a non-basis fails to be a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Explanation {
    /// Contains a relabelled circuit of a lower-dimensional simplex.
    EmbeddedLowerCircuit,
    /// Not embedded, but the mixed-volume test certifies it.
    BkkZero,
    /// Only the exact determinant certifies it.
    ExactOnly,
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Explanation::EmbeddedLowerCircuit => "embedded_lower_circuit",
            Explanation::BkkZero => "bkk_zero",
            Explanation::ExactOnly => "exact_only",
        })
    }
}

/// Every circuit of every lower simplex, embedded into the n-simplex's
/// ground set through all injective vertex maps.
#[derive(Clone, Debug)]
pub struct EmbeddedCircuits {
    n: usize,
    masks: Arc<Vec<u128>>,
}

impl EmbeddedCircuits {
    pub fn new(n: usize, seed: u64) -> Result<Self, MatroidError> {
        let target = HeronModel::get(n)?;
        let mut masks: HashSet<u128> = HashSet::new();
        for m in 2..n {
            let action = SymAction::get(m)?;
            let lower = HeronModel::get(m)?;
            let reps = circuits_up_to(m, num_edges(m) + 1, seed)?;
            let mut all: HashSet<u128> = HashSet::new();
            for r in &reps {
                for p in action.perms() {
                    all.insert(action.apply_perm(p, &r.canonical)?.bits());
                }
            }
            for inj in injections(m + 1, n + 1) {
                for &c in &all {
                    let mut bits = 0u128;
                    for i in FaceSet::from_bits(m, c).indices() {
                        let f = lower.ground().face(i).relabel(&inj);
                        bits |= 1 << target.ground().index_of(f).expect("face of the n-simplex");
                    }
                    masks.insert(bits);
                }
            }
        }
        let mut masks: Vec<u128> = masks.into_iter().collect();
        masks.sort_unstable();
        Ok(EmbeddedCircuits { n, masks: Arc::new(masks) })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn contains_in(&self, d: &FaceSet) -> bool {
        debug_assert_eq!(d.n(), self.n);
        self.masks.iter().any(|&m| m & !d.bits() == 0)
    }
}

/// All injective maps `1..=k -> 1..=n`, as 1-based image vectors.
fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 1..=n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(k, n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, n, &mut Vec::new(), &mut vec![false; n + 1], &mut out);
    out
}

/// Explains a non-basis using precomputed lower circuits.
pub fn explain_nonbasis_with(d: &FaceSet, lower: &EmbeddedCircuits, seed: u64) -> Result<Explanation, MatroidError> {
    check_size(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ d.bits() as u64);
    if is_basis_mc(d, 1, &mut rng)?.is_basis() {
        return Err(MatroidError::NotNonbasis(*d));
    }
    if lower.contains_in(d) {
        return Ok(Explanation::EmbeddedLowerCircuit);
    }
    if is_nonbasis_bkk(d)?.is_some() {
        return Ok(Explanation::BkkZero);
    }
    Ok(Explanation::ExactOnly)
}

pub fn explain_nonbasis(d: &FaceSet, seed: u64) -> Result<Explanation, MatroidError> {
    let lower = EmbeddedCircuits::new(d.n(), seed)?;
    explain_nonbasis_with(d, &lower, seed)
}

/// Counts of explanations over a list of non-bases.
pub fn explanation_tally(
    nonbases: &[FaceSet],
    n: usize,
    seed: u64,
) -> Result<HashMap<Explanation, usize>, MatroidError> {
    let lower = EmbeddedCircuits::new(n, seed)?;
    let ex: Vec<Result<Explanation, MatroidError>> =
        nonbases.par_iter().map(|d| explain_nonbasis_with(d, &lower, seed)).collect();
    let mut out = HashMap::new();
    for e in ex {
        *out.entry(e?).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::n3_catalog_set;

    #[test]
    fn tetrahedron_examples() {
        let b9 = n3_catalog_set(9).unwrap();
        let b10 = n3_catalog_set(10).unwrap();
        assert!(is_basis_exact(&b9).unwrap().is_basis());
        let v10 = is_basis_exact(&b10).unwrap();
        assert_eq!(v10.verdict, Verdict::Nonbasis);
        assert_eq!(v10.witness, Witness::SymbolicZero);
        assert!(is_nonbasis_bkk(&b10).unwrap().is_some());
        assert!(is_nonbasis_bkk(&b9).unwrap().is_none());
    }

    #[test]
    fn triangle_edges_form_a_basis() {
        let b = FaceSet::parse(2, "12,13,23").unwrap();
        assert!(is_basis_exact(&b).unwrap().is_basis());
    }

    #[test]
    fn wrong_size_is_rejected() {
        let b = FaceSet::parse(3, "12,13").unwrap();
        assert!(matches!(is_basis_exact(&b), Err(MatroidError::WrongSize { .. })));
    }

    #[test]
    fn witness_text_roundtrip() {
        let w = Witness::NonzeroAt(vec![crate::scalar::rat(3, 7), crate::scalar::rat(-1, 2)]);
        assert_eq!(w.to_string().parse::<Witness>().unwrap(), w);
        assert_eq!("symbolic_zero".parse::<Witness>().unwrap(), Witness::SymbolicZero);
    }
}
