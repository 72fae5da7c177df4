//! Sampling experiments over real fibres.
//!
//! For a basis `B` of the 3-simplex, volumes `v_s` are drawn uniformly from
//! `[0, 1]` for each face `s` of `B`, the fibre over `b = v^2` is solved, and
//! its points are counted as real, positive, and realizable. Counts are
//! aggregated into histograms and a mean realizable count.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homotopy::{
    generic_fibre, parameter_homotopy, random_complex_parameters, solve, square_system, Fibre, HomotopyError,
    TrackerConfig,
};
use crate::orbits::FaceSet;

use super::realize::is_realizable;
use super::store::{Record, Store, StoreError};

/// Default relative tolerance on imaginary parts.
pub const REALITY_TOLERANCE: f64 = 1e-8;
/// Ratio around the tolerance inside which a value counts as borderline.
pub const BORDERLINE_FACTOR: f64 = 10.0;
/// Largest tolerated fraction of failed fibres for a valid row.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
}

/// Knobs for [`run_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tracker: TrackerConfig,
    pub reality_tolerance: f64,
    /// Fibres between store checkpoints.
    pub checkpoint_every: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            tracker: TrackerConfig::default(),
            reality_tolerance: REALITY_TOLERANCE,
            checkpoint_every: 1000,
        }
    }
}

/// Point counts of one fibre. `realizable <= positive <= real <= d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FibreCounts {
    pub real: usize,
    pub positive: usize,
    pub realizable: usize,
    /// Some value sat within the borderline band of the tolerance.
    pub borderline: bool,
}

/// Counts real, positive and realizable points of `f`.
///
/// Points are judged by their squared edge lengths, which determine every
/// other coordinate. A fibre over real parameters is closed under
/// conjugation, so points are matched greedily with the nearest conjugate
/// (coordinatewise, relative to size) of another unmatched point or of
/// themselves, and self-matched points are real. The real count therefore
/// has the parity of the degree. The fibre is marked borderline when some point's conjugate is not decisively
/// ([`BORDERLINE_FACTOR`]) nearer to one point than to all others, or when a
/// real edge lies within the `tol` band of zero. A real point is positive
/// when each edge is positive, and realizable when in addition the edges
/// pass the Gram test.
pub fn classify_fibre(f: &Fibre, tol: f64) -> FibreCounts {
    let mut c = FibreCounts::default();
    let pts = &f.edges;
    let d = pts.len();
    // Coordinatewise relative distance from conj(x_i) to x_j, symmetric in i
    // and j. Huge coordinates carry large absolute errors, so each one is
    // weighed against its own size.
    let dist = |i: usize, j: usize| -> f64 {
        pts[i]
            .iter()
            .zip(&pts[j])
            .map(|(a, b)| (a.conj() - b).norm() / a.norm().max(b.norm()).max(1.0))
            .fold(0.0, f64::max)
    };
    let mut pairs: Vec<(f64, usize, usize)> =
        (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).map(|(i, j)| (dist(i, j), i, j)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut partner = vec![usize::MAX; d];
    for &(_, i, j) in &pairs {
        if partner[i] == usize::MAX && partner[j] == usize::MAX {
            partner[i] = j;
            partner[j] = i;
        }
    }
    for (i, &p) in partner.iter().enumerate() {
        let chosen = dist(i, p);
        let rival = (0..d).filter(|&j| j != p).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min);
        if chosen * BORDERLINE_FACTOR >= rival {
            c.borderline = true;
        }
    }
    for (i, edges) in pts.iter().enumerate() {
        if partner[i] != i {
            continue;
        }
        c.real += 1;
        let scale = edges.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if edges.iter().any(|z| z.re.abs() <= BORDERLINE_FACTOR * tol * scale) {
            c.borderline = true;
        }
        if edges.iter().any(|z| z.re <= 0.0) {
            continue;
        }
        c.positive += 1;
        let re: Vec<f64> = edges.iter().map(|z| z.re).collect();
        if is_realizable(&re).unwrap_or(false) {
            c.realizable += 1;
        }
    }
    c
}

/// Aggregated counts; merging is commutative and associative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub fibres: usize,
    pub failures: usize,
    /// Fibres still borderline after a re-solve.
    pub borderline: usize,
    pub real: BTreeMap<usize, usize>,
    pub positive: BTreeMap<usize, usize>,
    pub realizable: BTreeMap<usize, usize>,
    /// Fibres whose real and positive counts differ.
    pub real_not_positive: usize,
    /// Non-borderline fibres whose real count has the wrong parity.
    pub parity_violations: usize,
}

impl Tally {
    pub fn record(&mut self, counts: Option<FibreCounts>, degree: usize) {
        self.fibres += 1;
        let Some(c) = counts else {
            self.failures += 1;
            return;
        };
        *self.real.entry(c.real).or_default() += 1;
        *self.positive.entry(c.positive).or_default() += 1;
        *self.realizable.entry(c.realizable).or_default() += 1;
        if c.real != c.positive {
            self.real_not_positive += 1;
        }
        if c.borderline {
            self.borderline += 1;
        } else if c.real % 2 != degree % 2 {
            self.parity_violations += 1;
        }
    }

    pub fn merge(&mut self, other: &Tally) {
        self.fibres += other.fibres;
        self.failures += other.failures;
        self.borderline += other.borderline;
        self.real_not_positive += other.real_not_positive;
        self.parity_violations += other.parity_violations;
        for (mine, theirs) in [
            (&mut self.real, &other.real),
            (&mut self.positive, &other.positive),
            (&mut self.realizable, &other.realizable),
        ] {
            for (k, v) in theirs {
                *mine.entry(*k).or_default() += v;
            }
        }
    }

    pub fn solved(&self) -> usize {
        self.fibres - self.failures
    }
}

/// One row of the experiment table.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub index: usize,
    pub basis: FaceSet,
    pub degree: usize,
    pub seed: u64,
    pub samples: usize,
    pub tally: Tally,
}

impl ExperimentRow {
    pub fn observed_real(&self) -> BTreeSet<usize> {
        self.tally.real.keys().copied().collect()
    }

    pub fn observed_positive(&self) -> BTreeSet<usize> {
        self.tally.positive.keys().copied().collect()
    }

    pub fn observed_realizable(&self) -> BTreeSet<usize> {
        self.tally.realizable.keys().copied().collect()
    }

    /// Mean realizable points per solved fibre.
    pub fn mean_realizable(&self) -> f64 {
        let n = self.tally.solved();
        if n == 0 {
            return f64::NAN;
        }
        self.tally.realizable.iter().map(|(k, v)| (k * v) as f64).sum::<f64>() / n as f64
    }

    /// Standard error of [`Self::mean_realizable`].
    pub fn standard_error(&self) -> f64 {
        let n = self.tally.solved();
        if n < 2 {
            return f64::NAN;
        }
        let mean = self.mean_realizable();
        let ss: f64 = self.tally.realizable.iter().map(|(k, v)| *v as f64 * (*k as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    }

    pub fn failure_rate(&self) -> f64 {
        if self.tally.fibres == 0 {
            0.0
        } else {
            self.tally.failures as f64 / self.tally.fibres as f64
        }
    }

    pub fn is_valid(&self) -> bool {
        self.failure_rate() <= MAX_FAILURE_RATE
    }

    pub fn is_complete(&self) -> bool {
        self.tally.fibres >= self.samples
    }
}

/// Seed of fibre `k` in a run seeded with `seed`.
fn fibre_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(0x632b_e59b_d9b4_e019).wrapping_mul(k as u64 + 1) ^ 0xd6e8_feb8_6659_fd93
}

/// Squared uniform volumes for the faces of the basis.
pub fn sample_parameters<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let v: f64 = rng.random();
            v * v
        })
        .collect()
}

/// Whether `f` has `d` pairwise distinct points.
fn is_complete_fibre(f: &Fibre, d: usize, tol: f64) -> bool {
    f.len() == d && f.edges.iter().enumerate().all(|(i, x)| f.match_point(x, tol) == Some(i))
}

/// Complex detours tried when the straight parameter path fails.
const DETOURS: usize = 3;

/// The fibre over real parameters `b`. Points are moved from `base` along
/// the straight path, then with tighter steps, then through random complex
/// waypoints; a total-degree solve is the last resort. The first attempt
/// that keeps all points apart wins.
fn real_fibre(base: &Fibre, b: &[f64], cfg: &TrackerConfig, seed: u64) -> Option<Fibre> {
    let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let d = base.len();
    let ok = |f: &Fibre| is_complete_fibre(f, d, cfg.dedup_tolerance);
    let tight = cfg.tightened();
    for c in [cfg, &tight] {
        if let Some(f) = parameter_homotopy(base, &bc, c).ok().filter(ok) {
            return Some(f);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..DETOURS {
        let via = random_complex_parameters(&mut rng, bc.len(), 1.0);
        let moved = parameter_homotopy(base, &via, cfg).and_then(|f| parameter_homotopy(&f, &bc, cfg));
        if let Some(f) = moved.ok().filter(ok) {
            return Some(f);
        }
    }
    let sys = square_system(&base.basis, &bc).ok()?;
    solve(&sys, cfg, rng.random()).ok().filter(ok)
}

fn run_fibre(base: &Fibre, cfg: &ExperimentConfig, seed: u64, k: usize) -> Option<FibreCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(fibre_seed(seed, k));
    let b = sample_parameters(&mut rng, base.parameter.len());
    let solve_seed = rng.random();
    let f = real_fibre(base, &b, &cfg.tracker, solve_seed)?;
    let counts = classify_fibre(&f, cfg.reality_tolerance);
    if !counts.borderline {
        return Some(counts);
    }
    // re-solve from scratch with tighter tracking and refinement
    let tight =
        TrackerConfig { refinement_tolerance: cfg.tracker.refinement_tolerance / 100.0, ..cfg.tracker.tightened() };
    let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let again = square_system(&base.basis, &bc)
        .ok()
        .and_then(|sys| solve(&sys, &tight, solve_seed ^ 1).ok())
        .filter(|f| is_complete_fibre(f, base.len(), tight.dedup_tolerance));
    Some(again.map_or(counts, |f| classify_fibre(&f, cfg.reality_tolerance)))
}

/// Runs (or resumes) `samples` fibres over `basis`, labelled `(n, index)`.
///
/// With a store, the latest checkpoint for the same label and seed is
/// resumed and a checkpoint is appended every `checkpoint_every` fibres.
/// Fibres are seeded individually, so a resumed run equals an uninterrupted
/// one.
pub fn run_experiment(
    index: usize,
    basis: &FaceSet,
    samples: usize,
    seed: u64,
    cfg: &ExperimentConfig,
    mut store: Option<&mut Store>,
) -> Result<ExperimentRow, ExperimentError> {
    cfg.tracker.validate()?;
    if cfg.reality_tolerance.is_nan() || cfg.reality_tolerance <= 0.0 || cfg.checkpoint_every == 0 {
        return Err(ExperimentError::Config("reality_tolerance and checkpoint_every must be positive".into()));
    }
    let n = basis.n();
    let base = generic_fibre(basis, &cfg.tracker, seed)?;
    let degree = base.len();
    let mut tally = Tally::default();
    if let Some(st) = store.as_deref() {
        if let Some(prev) = st.latest_experiment(n, index, seed) {
            if prev.basis == *basis && prev.degree == degree && prev.tally.fibres <= samples {
                tally = prev.tally.clone();
            }
        }
    }
    while tally.fibres < samples {
        let start = tally.fibres;
        let end = (start + cfg.checkpoint_every).min(samples);
        let chunk = (start..end)
            .into_par_iter()
            .map(|k| {
                let mut t = Tally::default();
                t.record(run_fibre(&base, cfg, seed, k), degree);
                t
            })
            .reduce(Tally::default, |mut a, b| {
                a.merge(&b);
                a
            });
        tally.merge(&chunk);
        if let Some(st) = store.as_deref_mut() {
            let row = ExperimentRow { n, index, basis: *basis, degree, seed, samples, tally: tally.clone() };
            st.append(Record::Experiment(row))?;
        }
    }
    Ok(ExperimentRow { n, index, basis: *basis, degree, seed, samples, tally })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fibre(edges: Vec<Vec<Complex64>>) -> Fibre {
        let basis = crate::orbits::n3_catalog_set(1).unwrap();
        let points = edges.clone();
        let residuals = vec![0.0; edges.len()];
        Fibre { basis, parameter: Vec::new(), edges, points, residuals }
    }

    fn point(re: [f64; 6], im: f64) -> Vec<Complex64> {
        re.iter().map(|&r| Complex64::new(r, im)).collect()
    }

    #[test]
    fn conjugate_pairing_decides_reality() {
        let noisy_real = point([100.0, 110.0, 120.0, 130.0, 140.0, 150.0], 1e-6);
        let pair = point([1.0, 2.0, 2.0, 2.0, 2.0, 2.0], 0.5);
        let partner: Vec<Complex64> = pair.iter().map(|z| z.conj()).collect();
        let not_realizable = point([1.0, 1.0, 1.0, 1.0, 1.0, 9.0], 0.0);
        let c = classify_fibre(&fibre(vec![noisy_real, pair, partner, not_realizable]), REALITY_TOLERANCE);
        assert_eq!((c.real, c.positive, c.realizable, c.borderline), (2, 2, 1, false));
    }

    #[test]
    fn small_coordinates_decide_pairs_with_huge_errors() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let a =
            vec![c(1e-6, 0.0), c(0.19, 0.0), c(-3.3063e6, -585.0), c(0.19, -1.28), c(-3.3063e6, -589.0), c(0.28, 0.0)];
        let b =
            vec![c(1e-6, 0.0), c(0.19, 0.0), c(-3.3078e6, -518.0), c(0.19, 1.28), c(-3.3078e6, -514.0), c(0.28, 0.0)];
        let c = classify_fibre(&fibre(vec![a, b]), REALITY_TOLERANCE);
        assert_eq!((c.real, c.borderline), (0, false));
    }

    #[test]
    fn near_coincident_points_are_borderline() {
        let a = point([1.0; 6], 1e-12);
        let b = point([1.0 + 1e-12, 1.0, 1.0, 1.0, 1.0, 1.0], 0.0);
        let c = classify_fibre(&fibre(vec![a, b]), REALITY_TOLERANCE);
        assert_eq!(c.real, 2);
        assert!(c.borderline);
    }

    #[test]
    fn tally_merge_matches_sequential_record() {
        let counts = [
            Some(FibreCounts { real: 2, positive: 2, realizable: 1, borderline: false }),
            None,
            Some(FibreCounts { real: 1, positive: 0, realizable: 0, borderline: true }),
        ];
        let mut whole = Tally::default();
        counts.iter().for_each(|c| whole.record(*c, 4));
        let (mut a, mut b) = (Tally::default(), Tally::default());
        a.record(counts[0], 4);
        counts[1..].iter().for_each(|c| b.record(*c, 4));
        a.merge(&b);
        assert_eq!(a, whole);
        assert_eq!((whole.failures, whole.borderline, whole.real_not_positive, whole.parity_violations), (1, 1, 1, 0));
    }
}
