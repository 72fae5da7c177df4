//! Append-only result store.
//!
//! A store is a text file whose first line is a version header. Each further
//! line is one record: a kind tag followed by tab-separated `key=value`
//! fields. Later records for the same orbit refine earlier ones; nothing is
//! rewritten in place. The byte-level format is documented in
//! `docs/store-format.md`.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigUint;
use thiserror::Error;

use crate::matroid::{Method, Verdict, Witness};
use crate::orbits::{FVec, FaceSet};
use crate::perm::Perm;

use super::experiment::{ExperimentRow, Tally};

pub const STORE_MAGIC: &str = "heron-store";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("store version mismatch: expected {expected}, found {found:?}")]
    VersionMismatch { expected: String, found: String },
    #[error("malformed store line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Orbit representative with its f-vector and orbit size.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitEntry {
    pub n: usize,
    pub index: usize,
    pub faces: FaceSet,
    pub fvec: FVec,
    pub orbit_size: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerdictEntry {
    pub n: usize,
    pub index: usize,
    pub verdict: Verdict,
    pub method: Method,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyEntry {
    pub n: usize,
    pub index: usize,
    pub degree: usize,
    pub loops: usize,
    /// Fixed loop radius, or `None` for the radius sweep.
    pub radius: Option<f64>,
    pub discarded: usize,
    pub generators: Vec<Perm>,
    pub label: String,
    pub order: BigUint,
    pub solvable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryEntry {
    pub n: usize,
    pub index: usize,
    pub degree: usize,
    pub label: String,
    pub order: BigUint,
    pub solvable: bool,
    /// Coordinates whose partition had a near-tie.
    pub borderline: usize,
}

/// One line of the store.
#[derive(Clone, Debug, PartialEq)]
pub enum Record {
    Orbit(OrbitEntry),
    Verdict(VerdictEntry),
    Degree { n: usize, index: usize, degree: usize },
    Monodromy(MonodromyEntry),
    Symmetry(SymmetryEntry),
    Experiment(ExperimentRow),
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::Orbit(_) => "orbit",
            Record::Verdict(_) => "verdict",
            Record::Degree { .. } => "degree",
            Record::Monodromy(_) => "monodromy",
            Record::Symmetry(_) => "symmetry",
            Record::Experiment(_) => "experiment",
        }
    }

    /// `(n, index)` of the orbit the record describes.
    pub fn key(&self) -> (usize, usize) {
        match self {
            Record::Orbit(e) => (e.n, e.index),
            Record::Verdict(e) => (e.n, e.index),
            Record::Degree { n, index, .. } => (*n, *index),
            Record::Monodromy(e) => (e.n, e.index),
            Record::Symmetry(e) => (e.n, e.index),
            Record::Experiment(e) => (e.n, e.index),
        }
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        let (n, index) = self.key();
        let mut f = vec![("n", n.to_string()), ("index", index.to_string())];
        match self {
            Record::Orbit(e) => {
                f.push(("faces", e.faces.to_string()));
                f.push(("fvec", join(&e.fvec.0)));
                f.push(("size", e.orbit_size.to_string()));
            }
            Record::Verdict(e) => {
                f.push(("verdict", e.verdict.to_string()));
                f.push(("method", e.method.to_string()));
                f.push(("witness", e.witness.to_string()));
            }
            Record::Degree { degree, .. } => f.push(("degree", degree.to_string())),
            Record::Monodromy(e) => {
                f.push(("degree", e.degree.to_string()));
                f.push(("loops", e.loops.to_string()));
                f.push(("radius", e.radius.map_or("sweep".to_string(), |r| r.to_string())));
                f.push(("discarded", e.discarded.to_string()));
                f.push(("generators", e.generators.iter().map(encode_perm).collect::<Vec<_>>().join(",")));
                f.push(("label", e.label.clone()));
                f.push(("order", e.order.to_string()));
                f.push(("solvable", e.solvable.to_string()));
            }
            Record::Symmetry(e) => {
                f.push(("degree", e.degree.to_string()));
                f.push(("label", e.label.clone()));
                f.push(("order", e.order.to_string()));
                f.push(("solvable", e.solvable.to_string()));
                f.push(("borderline", e.borderline.to_string()));
            }
            Record::Experiment(e) => {
                let t = &e.tally;
                f.push(("basis", e.basis.to_string()));
                f.push(("degree", e.degree.to_string()));
                f.push(("seed", e.seed.to_string()));
                f.push(("samples", e.samples.to_string()));
                f.push(("fibres", t.fibres.to_string()));
                f.push(("failures", t.failures.to_string()));
                f.push(("borderline", t.borderline.to_string()));
                f.push(("real_not_positive", t.real_not_positive.to_string()));
                f.push(("parity_violations", t.parity_violations.to_string()));
                f.push(("real", encode_hist(&t.real)));
                f.push(("positive", encode_hist(&t.positive)));
                f.push(("realizable", encode_hist(&t.realizable)));
            }
        }
        f
    }

    /// The record as one store line, without the trailing newline.
    pub fn to_line(&self, timestamp: u64) -> String {
        let mut parts = vec![self.kind().to_string()];
        parts.extend(self.fields().into_iter().map(|(k, v)| format!("{k}={v}")));
        parts.push(format!("t={timestamp}"));
        parts.join("\t")
    }

    /// Parses one store line into the record and its timestamp.
    pub fn parse_line(line: &str) -> Result<(Record, u64), String> {
        let mut parts = line.split('\t');
        let kind = parts.next().ok_or("empty line")?;
        let mut map = HashMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("field without '=': {p:?}"))?;
            map.insert(k, v);
        }
        let get = |k: &str| map.get(k).copied().ok_or_else(|| format!("missing field {k}"));
        fn num<T: FromStr>(s: &str, k: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad value for {k}: {s:?}"))
        }
        let n: usize = num(get("n")?, "n")?;
        let index: usize = num(get("index")?, "index")?;
        let t: u64 = num(get("t")?, "t")?;
        let parse_faces = |k: &str| FaceSet::parse(n, get(k)?).map_err(|e| e.to_string());
        let rec = match kind {
            "orbit" => Record::Orbit(OrbitEntry {
                n,
                index,
                faces: parse_faces("faces")?,
                fvec: FVec(split_list(get("fvec")?, "fvec")?),
                orbit_size: num(get("size")?, "size")?,
            }),
            "verdict" => Record::Verdict(VerdictEntry {
                n,
                index,
                verdict: get("verdict")?.parse::<Verdict>().map_err(|e| e.to_string())?,
                method: get("method")?.parse::<Method>().map_err(|e| e.to_string())?,
                witness: get("witness")?.parse::<Witness>().map_err(|e| e.to_string())?,
            }),
            "degree" => Record::Degree { n, index, degree: num(get("degree")?, "degree")? },
            "monodromy" => {
                let radius = match get("radius")? {
                    "sweep" => None,
                    r => Some(num(r, "radius")?),
                };
                let gens = get("generators")?;
                let generators = if gens.is_empty() {
                    Vec::new()
                } else {
                    gens.split(',').map(decode_perm).collect::<Result<Vec<_>, _>>()?
                };
                Record::Monodromy(MonodromyEntry {
                    n,
                    index,
                    degree: num(get("degree")?, "degree")?,
                    loops: num(get("loops")?, "loops")?,
                    radius,
                    discarded: num(get("discarded")?, "discarded")?,
                    generators,
                    label: get("label")?.to_string(),
                    order: num(get("order")?, "order")?,
                    solvable: num(get("solvable")?, "solvable")?,
                })
            }
            "symmetry" => Record::Symmetry(SymmetryEntry {
                n,
                index,
                degree: num(get("degree")?, "degree")?,
                label: get("label")?.to_string(),
                order: num(get("order")?, "order")?,
                solvable: num(get("solvable")?, "solvable")?,
                borderline: num(get("borderline")?, "borderline")?,
            }),
            "experiment" => Record::Experiment(ExperimentRow {
                n,
                index,
                basis: parse_faces("basis")?,
                degree: num(get("degree")?, "degree")?,
                seed: num(get("seed")?, "seed")?,
                samples: num(get("samples")?, "samples")?,
                tally: Tally {
                    fibres: num(get("fibres")?, "fibres")?,
                    failures: num(get("failures")?, "failures")?,
                    borderline: num(get("borderline")?, "borderline")?,
                    real_not_positive: num(get("real_not_positive")?, "real_not_positive")?,
                    parity_violations: num(get("parity_violations")?, "parity_violations")?,
                    real: decode_hist(get("real")?)?,
                    positive: decode_hist(get("positive")?)?,
                    realizable: decode_hist(get("realizable")?)?,
                },
            }),
            other => return Err(format!("unknown record kind {other:?}")),
        };
        Ok((rec, t))
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn split_list(s: &str, k: &str) -> Result<Vec<usize>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| x.parse().map_err(|_| format!("bad list entry for {k}: {x:?}"))).collect()
}

/// 1-based images joined by dots, e.g. `2.1.3`.
pub fn encode_perm(p: &Perm) -> String {
    p.images().iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(".")
}

pub fn decode_perm(s: &str) -> Result<Perm, String> {
    let images: Vec<usize> =
        s.split('.').map(|x| x.parse().map_err(|_| format!("bad permutation {s:?}"))).collect::<Result<_, _>>()?;
    Perm::from_images_one_based(&images).map_err(|e| e.to_string())
}

fn encode_hist(h: &BTreeMap<usize, usize>) -> String {
    h.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(",")
}

fn decode_hist(s: &str) -> Result<BTreeMap<usize, usize>, String> {
    if s.is_empty() {
        return Ok(BTreeMap::new());
    }
    s.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once(':').ok_or_else(|| format!("bad histogram entry {kv:?}"))?;
            Ok((k.parse().map_err(|_| format!("bad key {k:?}"))?, v.parse().map_err(|_| format!("bad count {v:?}"))?))
        })
        .collect()
}

/// Everything the store knows about one orbit, latest values winning.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrbitRecord {
    pub n: usize,
    pub index: usize,
    pub faces: Option<FaceSet>,
    pub fvec: Option<FVec>,
    pub orbit_size: Option<u64>,
    pub verdict: Option<VerdictEntry>,
    pub degree: Option<usize>,
    pub monodromy: Option<MonodromyEntry>,
    pub symmetry: Option<SymmetryEntry>,
    pub first_seen: u64,
    pub last_updated: u64,
}

/// The store, held in memory and mirrored to an append-only file.
#[derive(Debug)]
pub struct Store {
    path: Option<PathBuf>,
    file: Option<File>,
    records: Vec<(Record, u64)>,
}

fn header() -> String {
    format!("{STORE_MAGIC}\tv{STORE_VERSION}")
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Store {
    /// A store that is never written to disk.
    pub fn in_memory() -> Self {
        Store { path: None, file: None, records: Vec::new() }
    }

    /// Opens `path`, creating it with a header if it does not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut records = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            let mut lines = reader.lines();
            let first = lines.next().transpose()?.unwrap_or_default();
            if first != header() {
                return Err(StoreError::VersionMismatch { expected: header(), found: first });
            }
            for (i, line) in lines.enumerate() {
                let line = line?;
                if line.is_empty() {
                    continue;
                }
                let rec = Record::parse_line(&line).map_err(|reason| StoreError::Malformed { line: i + 2, reason })?;
                records.push(rec);
            }
        } else {
            let mut f = File::create(&path)?;
            writeln!(f, "{}", header())?;
        }
        let file = OpenOptions::new().append(true).open(&path)?;
        Ok(Store { path: Some(path), file: Some(file), records })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn records(&self) -> &[(Record, u64)] {
        &self.records
    }

    pub fn append(&mut self, rec: Record) -> Result<(), StoreError> {
        let t = now();
        if let Some(f) = self.file.as_mut() {
            writeln!(f, "{}", rec.to_line(t))?;
            f.flush()?;
        }
        self.records.push((rec, t));
        Ok(())
    }

    /// Latest experiment checkpoint for `(n, index)` run with `seed`.
    pub fn latest_experiment(&self, n: usize, index: usize, seed: u64) -> Option<&ExperimentRow> {
        self.records.iter().rev().find_map(|(r, _)| match r {
            Record::Experiment(e) if e.n == n && e.index == index && e.seed == seed => Some(e),
            _ => None,
        })
    }

    /// Latest experiment per orbit of dimension `n`, any seed.
    pub fn experiments(&self, n: usize) -> BTreeMap<usize, &ExperimentRow> {
        let mut out = BTreeMap::new();
        for (r, _) in &self.records {
            if let Record::Experiment(e) = r {
                if e.n == n {
                    out.insert(e.index, e);
                }
            }
        }
        out
    }

    /// Aggregated view of every orbit of dimension `n` the store mentions.
    pub fn orbits(&self, n: usize) -> BTreeMap<usize, OrbitRecord> {
        let mut out: BTreeMap<usize, OrbitRecord> = BTreeMap::new();
        for (r, t) in &self.records {
            let (rn, index) = r.key();
            if rn != n {
                continue;
            }
            let o = out.entry(index).or_insert_with(|| OrbitRecord { n, index, first_seen: *t, ..Default::default() });
            o.last_updated = *t;
            match r {
                Record::Orbit(e) => {
                    o.faces = Some(e.faces);
                    o.fvec = Some(e.fvec.clone());
                    o.orbit_size = Some(e.orbit_size);
                }
                Record::Verdict(e) => o.verdict = Some(e.clone()),
                Record::Degree { degree, .. } => o.degree = Some(*degree),
                Record::Monodromy(e) => {
                    o.degree = Some(e.degree);
                    o.monodromy = Some(e.clone());
                }
                Record::Symmetry(e) => o.symmetry = Some(e.clone()),
                Record::Experiment(_) => {}
            }
        }
        out
    }

    pub fn orbit(&self, n: usize, index: usize) -> Option<OrbitRecord> {
        self.orbits(n).remove(&index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<Record> {
        let faces = FaceSet::parse(3, "12,13,14,123,124,134").unwrap();
        let mut tally = Tally { fibres: 10, failures: 1, ..Default::default() };
        tally.real.insert(0, 4);
        tally.real.insert(2, 5);
        vec![
            Record::Orbit(OrbitEntry { n: 3, index: 18, faces, fvec: FVec(vec![3, 3, 0]), orbit_size: 4 }),
            Record::Verdict(VerdictEntry {
                n: 3,
                index: 18,
                verdict: Verdict::Basis,
                method: Method::MonteCarlo,
                witness: Witness::Unconfirmed,
            }),
            Record::Degree { n: 3, index: 18, degree: 8 },
            Record::Monodromy(MonodromyEntry {
                n: 3,
                index: 18,
                degree: 3,
                loops: 5,
                radius: Some(0.5),
                discarded: 1,
                generators: vec![Perm::new(vec![1, 0, 2]).unwrap(), Perm::new(vec![0, 2, 1]).unwrap()],
                label: "S_3".into(),
                order: BigUint::from(6u32),
                solvable: true,
            }),
            Record::Symmetry(SymmetryEntry {
                n: 3,
                index: 18,
                degree: 8,
                label: "Z/2^3".into(),
                order: BigUint::from(8u32),
                solvable: true,
                borderline: 0,
            }),
            Record::Experiment(ExperimentRow { n: 3, index: 18, basis: faces, degree: 8, seed: 7, samples: 20, tally }),
        ]
    }

    #[test]
    fn lines_roundtrip() {
        for r in sample_records() {
            let line = r.to_line(42);
            assert_eq!(Record::parse_line(&line).unwrap(), (r, 42), "{line}");
        }
    }

    #[test]
    fn file_roundtrip_and_version_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.tsv");
        {
            let mut s = Store::open(&path).unwrap();
            for r in sample_records() {
                s.append(r).unwrap();
            }
        }
        let s = Store::open(&path).unwrap();
        assert_eq!(s.records().len(), 6);
        let o = s.orbit(3, 18).unwrap();
        assert_eq!(o.degree, Some(3));
        assert_eq!(o.symmetry.unwrap().label, "Z/2^3");
        assert_eq!(s.latest_experiment(3, 18, 7).unwrap().tally.fibres, 10);
        std::fs::write(&path, "heron-store\tv0\n").unwrap();
        assert!(matches!(Store::open(&path), Err(StoreError::VersionMismatch { .. })));
    }
}
