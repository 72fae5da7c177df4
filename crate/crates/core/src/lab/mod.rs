//! Experiment plumbing on top of the core algorithms: orbit lookup by
//! index, monodromy and coordinate-symmetry summaries, realizability, the
//! sampling experiments, the result store, diagrams and report tables.

pub mod diagram;
pub mod experiment;
pub mod realize;
pub mod report;
pub mod store;

use num_bigint::BigUint;
use thiserror::Error;

use crate::homotopy::{
    coordinate_partitions, monodromy_permutations, Fibre, HomotopyError, MonodromyRun, TrackerConfig,
};
use crate::orbits::{all_candidate_orbits, n3_catalog_set, FaceSet, OrbitError, OrbitRep, SymAction};
use crate::perm::{describe, partition_stabilizer_intersection, PermError, PermGroup};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("no orbit {index} for n = {n} (there are {count})")]
    UnknownOrbit { n: usize, index: usize, count: usize },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// An indexed orbit together with the face set used to represent it.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedOrbit {
    pub index: usize,
    pub rep: OrbitRep,
    /// The reference member for `n = 3`, the canonical form otherwise.
    pub faces: FaceSet,
}

/// All orbits of dimension `n`, indexed from 1.
pub fn indexed_orbits(n: usize) -> Result<Vec<IndexedOrbit>, LabError> {
    Ok(all_candidate_orbits(n)?
        .into_iter()
        .enumerate()
        .map(|(i, rep)| {
            let faces = if n == 3 { n3_catalog_set(i + 1).expect("35 catalog entries") } else { rep.canonical };
            IndexedOrbit { index: i + 1, rep, faces }
        })
        .collect())
}

/// The representative face set of orbit `index`.
pub fn orbit_faces(n: usize, index: usize) -> Result<FaceSet, LabError> {
    if n == 3 {
        return n3_catalog_set(index).ok_or(LabError::UnknownOrbit { n, index, count: 35 });
    }
    let all = all_candidate_orbits(n)?;
    let count = all.len();
    index.checked_sub(1).and_then(|i| all.get(i)).map(|r| r.canonical).ok_or(LabError::UnknownOrbit { n, index, count })
}

/// Index of the orbit containing `s`.
pub fn orbit_index(s: &FaceSet) -> Result<usize, LabError> {
    let action = SymAction::get(s.n())?;
    let c = action.canonical_form(s);
    let all = all_candidate_orbits(s.n())?;
    let count = all.len();
    all.iter().position(|r| r.canonical == c).map(|i| i + 1).ok_or(LabError::UnknownOrbit { n: s.n(), index: 0, count })
}

/// A permutation group with its structure label.
#[derive(Clone, Debug)]
pub struct GroupSummary {
    pub group: PermGroup,
    pub label: String,
    pub order: BigUint,
    pub solvable: bool,
}

impl GroupSummary {
    pub fn new(group: PermGroup) -> Self {
        GroupSummary { label: describe(&group), order: group.order(), solvable: group.is_solvable(), group }
    }
}

/// Monodromy loops and the group they generate.
#[derive(Clone, Debug)]
pub struct MonodromyResult {
    pub run: MonodromyRun,
    pub group: GroupSummary,
}

pub fn monodromy_group(
    basis: &FaceSet,
    loops: usize,
    radius: Option<f64>,
    cfg: &TrackerConfig,
    seed: u64,
) -> Result<MonodromyResult, LabError> {
    let run = monodromy_permutations(basis, loops, radius, cfg, seed)?;
    let group = PermGroup::new(run.base.len(), run.permutations.clone())?;
    Ok(MonodromyResult { run, group: GroupSummary::new(group) })
}

/// The coordinate symmetry group of a fibre and how many coordinates had a
/// near-tie at tolerance `tol`.
pub fn coordinate_symmetry(f: &Fibre, tol: f64) -> Result<(GroupSummary, usize), LabError> {
    let parts = coordinate_partitions(f, tol);
    let borderline = parts.iter().filter(|p| p.borderline).count();
    let blocks: Vec<_> = parts.into_iter().map(|p| p.blocks).collect();
    let group =
        if blocks.is_empty() { PermGroup::symmetric(f.len()) } else { partition_stabilizer_intersection(&blocks)? };
    Ok((GroupSummary::new(group), borderline))
}
