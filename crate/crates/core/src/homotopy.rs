//! Numerical homotopy continuation for the square systems of a basis.
//!
//! A basis `B` and a parameter vector `b` give the system `phi_s(x) = b_s`
//! for `s` in `B`, in the edge unknowns `x`. Its solutions are the points of
//! the fibre over `b`. Fibres are computed with a total-degree homotopy
//! tracked in a random projective chart, moved between parameters with
//! parameter homotopies, and looped around to read off monodromy.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bkk::{mixed_volume, square_system_polytopes, BkkError};
use crate::orbits::FaceSet;
use crate::perm::{BlockSystem, Perm};
use crate::simplex::{num_edges, HeronModel, SimplexError};
use crate::QPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("a basis candidate has {expected} faces, got {got}")]
    BasisSize { expected: usize, got: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("invalid tracker configuration: {0}")]
    Config(String),
    #[error("{failed} of {paths} paths failed")]
    SolveFailure { failed: usize, paths: usize },
    #[error("paths {0:?} failed")]
    PathFailures(Vec<usize>),
    #[error("fibre sizes disagree across parameters: {0:?}")]
    Unstable(Vec<usize>),
    #[error("{count} fibre points exceed the mixed volume bound {bound}")]
    AboveBkkBound { count: usize, bound: u64 },
    #[error("no generic fibre found after {0} parameter samples")]
    NoGenericFibre(usize),
}

/// Step-size and tolerance controls for path tracking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tolerance: f64,
    pub max_corrector_iters: usize,
    pub dedup_tolerance: f64,
    /// Residual that Newton refinement must reach at an endpoint.
    pub refinement_tolerance: f64,
    pub max_refinement_iters: usize,
    /// Paths allowed to fail (after one tightened retry) before a solve errors.
    pub path_failure_budget: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            initial_step: 0.02,
            min_step: 1e-12,
            max_step: 0.1,
            corrector_tolerance: 1e-9,
            max_corrector_iters: 3,
            dedup_tolerance: 1e-6,
            refinement_tolerance: 1e-10,
            max_refinement_iters: 30,
            path_failure_budget: 0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), HomotopyError> {
        let pos = [
            ("initial_step", self.initial_step),
            ("min_step", self.min_step),
            ("max_step", self.max_step),
            ("corrector_tolerance", self.corrector_tolerance),
            ("dedup_tolerance", self.dedup_tolerance),
            ("refinement_tolerance", self.refinement_tolerance),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HomotopyError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_corrector_iters == 0 || self.max_refinement_iters == 0 {
            return Err(HomotopyError::Config("iteration limits must be positive".into()));
        }
        if self.min_step >= self.initial_step {
            return Err(HomotopyError::Config("min_step must be below initial_step".into()));
        }
        if self.initial_step > self.max_step {
            return Err(HomotopyError::Config("initial_step must not exceed max_step".into()));
        }
        Ok(())
    }

    /// Smaller steps for retrying failed paths.
    pub fn tightened(&self) -> Self {
        TrackerConfig {
            initial_step: self.initial_step / 8.0,
            max_step: self.max_step / 4.0,
            min_step: self.min_step / 100.0,
            corrector_tolerance: self.corrector_tolerance / 10.0,
            ..self.clone()
        }
    }
}

/// A polynomial in dense exponent form with complex coefficients.
#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(C64, Vec<u8>)>,
}

/// `pow[j][k] = x_j^k`.
fn power_table(x: &[C64], max_deg: usize) -> Vec<Vec<C64>> {
    x.iter()
        .map(|&v| {
            let mut row = Vec::with_capacity(max_deg + 1);
            row.push(C64::new(1.0, 0.0));
            for k in 1..=max_deg {
                row.push(row[k - 1] * v);
            }
            row
        })
        .collect()
}

impl CompiledPoly {
    fn from_qpoly(p: &QPoly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| (C64::new(c.to_f64().expect("finite coefficient"), 0.0), m.exponents().to_vec()))
            .collect();
        CompiledPoly { terms }
    }

    /// Homogenizes to degree `d` with a new leading variable.
    fn homogenized(&self, d: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, e)| {
                let deg: u32 = e.iter().map(|&k| k as u32).sum();
                let mut h = Vec::with_capacity(e.len() + 1);
                h.push((d - deg) as u8);
                h.extend_from_slice(e);
                (*c, h)
            })
            .collect();
        CompiledPoly { terms }
    }

    fn max_degree(&self) -> usize {
        self.terms.iter().flat_map(|(_, e)| e.iter()).map(|&k| k as usize).max().unwrap_or(0)
    }

    fn eval_grad(&self, pow: &[Vec<C64>], grad: &mut [C64]) -> C64 {
        grad.iter_mut().for_each(|g| *g = C64::zero());
        let mut val = C64::zero();
        for (c, e) in &self.terms {
            let mut mono = *c;
            for (j, &k) in e.iter().enumerate() {
                mono *= pow[j][k as usize];
            }
            val += mono;
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut d = *c * k as f64 * pow[j][k as usize - 1];
                for (l, &kl) in e.iter().enumerate() {
                    if l != j {
                        d *= pow[l][kl as usize];
                    }
                }
                grad[j] += d;
            }
        }
        val
    }
}

/// The square system `phi_s(x) - b_s = 0`, `s` in `B`, in the edge unknowns.
#[derive(Clone, Debug)]
pub struct SquareSystem {
    n: usize,
    basis: FaceSet,
    rows: Vec<usize>,
    parameters: Vec<C64>,
    equations: Vec<CompiledPoly>,
    degrees: Vec<u32>,
    max_deg: usize,
}

impl SquareSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &FaceSet {
        &self.basis
    }

    /// Ground-set indices of the faces in `B`, in equation order.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn parameters(&self) -> &[C64] {
        &self.parameters
    }

    pub fn num_unknowns(&self) -> usize {
        num_edges(self.n)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Number of paths in a total-degree homotopy.
    pub fn bezout_number(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).product()
    }

    pub fn with_parameters(&self, b: &[C64]) -> Result<Self, HomotopyError> {
        if b.len() != self.parameters.len() {
            return Err(HomotopyError::ParameterCount { expected: self.parameters.len(), got: b.len() });
        }
        Ok(SquareSystem { parameters: b.to_vec(), ..self.clone() })
    }

    /// Values of `phi_s(x)` without the parameter shift, and their Jacobian.
    fn phi(&self, x: &[C64], jac: &mut DMatrix<C64>) -> Vec<C64> {
        let pow = power_table(x, self.max_deg);
        let mut g = vec![C64::zero(); x.len()];
        self.equations
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v = p.eval_grad(&pow, &mut g);
                for (j, gj) in g.iter().enumerate() {
                    jac[(i, j)] = *gj;
                }
                v
            })
            .collect()
    }

    pub fn evaluate(&self, x: &[C64]) -> Vec<C64> {
        let e = self.num_unknowns();
        let mut jac = DMatrix::zeros(e, e);
        self.phi(x, &mut jac).iter().zip(&self.parameters).map(|(v, b)| v - b).collect()
    }

    pub fn residual(&self, x: &[C64]) -> f64 {
        self.evaluate(x).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Residual of each equation relative to `1 + |x|^d`, `d` its degree.
    fn relative_residual(&self, f: &DVector<C64>, x: &DVector<C64>) -> f64 {
        let r = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        f.iter().zip(&self.degrees).map(|(v, &d)| v.norm() / (1.0 + r.powi(d as i32))).fold(0.0, f64::max)
    }

    /// Newton iteration at fixed parameters until the residual, relative to
    /// the size of the point, is below `tol`. Returns the point and its
    /// relative residual.
    pub fn refine(&self, x: &[C64], tol: f64, max_iters: usize) -> Option<(Vec<C64>, f64)> {
        let e = self.num_unknowns();
        let mut x = DVector::from_column_slice(x);
        let mut jac = DMatrix::zeros(e, e);
        for _ in 0..max_iters {
            let v = self.phi(x.as_slice(), &mut jac);
            let f = DVector::from_iterator(e, v.iter().zip(&self.parameters).map(|(v, b)| v - b));
            let res = self.relative_residual(&f, &x);
            if res < tol {
                return Some((x.as_slice().to_vec(), res));
            }
            let dx = jac.clone().lu().solve(&(-f))?;
            x += dx;
            if !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return None;
            }
        }
        let f = DVector::from_vec(self.evaluate(x.as_slice()));
        let res = self.relative_residual(&f, &x);
        (res < tol).then(|| (x.as_slice().to_vec(), res))
    }
}

/// Builds the square system for basis candidate `basis` at parameters `b`
/// (ordered like the faces of `basis`).
pub fn square_system(basis: &FaceSet, b: &[C64]) -> Result<SquareSystem, HomotopyError> {
    let n = basis.n();
    let model = HeronModel::get(n)?;
    let e = num_edges(n);
    if basis.len() != e {
        return Err(HomotopyError::BasisSize { expected: e, got: basis.len() });
    }
    if b.len() != e {
        return Err(HomotopyError::ParameterCount { expected: e, got: b.len() });
    }
    let rows = basis.index_vec();
    let equations: Vec<CompiledPoly> = rows.iter().map(|&i| CompiledPoly::from_qpoly(model.cm_poly(i))).collect();
    let degrees: Vec<u32> = rows.iter().map(|&i| model.cm_poly(i).total_degree()).collect();
    let max_deg = equations.iter().map(CompiledPoly::max_degree).max().unwrap_or(1).max(1);
    Ok(SquareSystem { n, basis: *basis, rows, parameters: b.to_vec(), equations, degrees, max_deg })
}

/// A homotopy `H(x, t)` with `t` running from 0 to 1.
trait Homotopy: Sync {
    fn dim(&self) -> usize;
    /// Writes `H`, `dH/dx` and `dH/dt`.
    fn eval(&self, x: &[C64], t: f64, h: &mut DVector<C64>, hx: &mut DMatrix<C64>, ht: &mut DVector<C64>);
}

/// `(1-t) gamma G + t F` on projective coordinates `(x0, x)`, plus a
/// random affine chart `c . X = 1`.
struct TotalDegree<'a> {
    sys: &'a SquareSystem,
    hom: Vec<CompiledPoly>,
    start_coeffs: Vec<C64>,
    gamma: C64,
    chart: Vec<C64>,
    max_deg: usize,
}

impl Homotopy for TotalDegree<'_> {
    fn dim(&self) -> usize {
        self.sys.num_unknowns() + 1
    }

    fn eval(&self, x: &[C64], t: f64, h: &mut DVector<C64>, hx: &mut DMatrix<C64>, ht: &mut DVector<C64>) {
        let e = self.sys.num_unknowns();
        let pow = power_table(x, self.max_deg);
        let mut g = vec![C64::zero(); e + 1];
        let s = 1.0 - t;
        for i in 0..e {
            let d = self.sys.degrees[i] as usize;
            let mut f = self.hom[i].eval_grad(&pow, &mut g);
            f -= self.sys.parameters[i] * pow[0][d];
            g[0] -= self.sys.parameters[i] * d as f64 * pow[0][d - 1];
            // start system x_i^d - r_i x0^d
            let gs = pow[i + 1][d] - self.start_coeffs[i] * pow[0][d];
            let gs_x0 = -self.start_coeffs[i] * d as f64 * pow[0][d - 1];
            let gs_xi = d as f64 * pow[i + 1][d - 1];
            h[i] = self.gamma * s * gs + t * f;
            ht[i] = f - self.gamma * gs;
            for j in 0..=e {
                hx[(i, j)] = t * g[j];
            }
            hx[(i, 0)] += self.gamma * s * gs_x0;
            hx[(i, i + 1)] += self.gamma * s * gs_xi;
        }
        let mut chart = C64::new(-1.0, 0.0);
        for j in 0..=e {
            chart += self.chart[j] * x[j];
            hx[(e, j)] = self.chart[j];
        }
        h[e] = chart;
        ht[e] = C64::zero();
    }
}

/// Straight-line motion of the parameters from `b0` to `b1`, tracked on
/// projective coordinates `(x0, x)` with the chart `c . X = 1`, so points
/// that grow large along the way stay bounded.
struct ParameterPath<'a> {
    sys: &'a SquareSystem,
    hom: &'a [CompiledPoly],
    b0: &'a [C64],
    b1: &'a [C64],
    chart: Vec<C64>,
    max_deg: usize,
}

impl Homotopy for ParameterPath<'_> {
    fn dim(&self) -> usize {
        self.sys.num_unknowns() + 1
    }

    fn eval(&self, x: &[C64], t: f64, h: &mut DVector<C64>, hx: &mut DMatrix<C64>, ht: &mut DVector<C64>) {
        let e = self.sys.num_unknowns();
        let pow = power_table(x, self.max_deg);
        let mut g = vec![C64::zero(); e + 1];
        for i in 0..e {
            let d = self.sys.degrees[i] as usize;
            let b = (1.0 - t) * self.b0[i] + t * self.b1[i];
            h[i] = self.hom[i].eval_grad(&pow, &mut g) - b * pow[0][d];
            g[0] -= b * d as f64 * pow[0][d - 1];
            ht[i] = (self.b0[i] - self.b1[i]) * pow[0][d];
            for j in 0..=e {
                hx[(i, j)] = g[j];
            }
        }
        let mut chart = C64::new(-1.0, 0.0);
        for j in 0..=e {
            chart += self.chart[j] * x[j];
            hx[(e, j)] = self.chart[j];
        }
        h[e] = chart;
        ht[e] = C64::zero();
    }
}

#[derive(Clone, Debug)]
enum PathEnd {
    Reached(Vec<C64>),
    Failed { t: f64, x: Vec<C64> },
}

fn norm(x: &DVector<C64>) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

struct Workspace {
    h: DVector<C64>,
    hx: DMatrix<C64>,
    ht: DVector<C64>,
}

impl Workspace {
    fn new(d: usize) -> Self {
        Workspace { h: DVector::zeros(d), hx: DMatrix::zeros(d, d), ht: DVector::zeros(d) }
    }
}

/// `dx/dt = -H_x^{-1} H_t`.
fn velocity<H: Homotopy>(hom: &H, x: &DVector<C64>, t: f64, w: &mut Workspace) -> Option<DVector<C64>> {
    hom.eval(x.as_slice(), t, &mut w.h, &mut w.hx, &mut w.ht);
    w.hx.clone().lu().solve(&(-&w.ht))
}

/// Newton at fixed `t`; requires convergence and contraction.
fn correct<H: Homotopy>(
    hom: &H,
    mut x: DVector<C64>,
    t: f64,
    cfg: &TrackerConfig,
    w: &mut Workspace,
) -> Option<DVector<C64>> {
    let mut prev = f64::INFINITY;
    for _ in 0..cfg.max_corrector_iters {
        hom.eval(x.as_slice(), t, &mut w.h, &mut w.hx, &mut w.ht);
        let dx = w.hx.clone().lu().solve(&(-&w.h))?;
        let step = norm(&dx);
        if step > 0.5 * prev {
            return None;
        }
        prev = step;
        x += dx;
        if step <= cfg.corrector_tolerance * (1.0 + norm(&x)) {
            return Some(x);
        }
    }
    None
}

const DIVERGENCE: f64 = 1e12;

/// Predictor-corrector tracking from `t = 0` to `t = 1`.
fn track<H: Homotopy>(hom: &H, x0: &[C64], cfg: &TrackerConfig) -> PathEnd {
    let mut w = Workspace::new(hom.dim());
    let mut x = DVector::from_column_slice(x0);
    let mut t = 0.0f64;
    let mut dt = cfg.initial_step;
    let mut streak = 0;
    while t < 1.0 {
        let step = dt.min(1.0 - t);
        let predicted = (|| {
            let k1 = velocity(hom, &x, t, &mut w)?;
            let k2 = velocity(hom, &(&x + &k1 * C64::from(step / 2.0)), t + step / 2.0, &mut w)?;
            let k3 = velocity(hom, &(&x + &k2 * C64::from(step / 2.0)), t + step / 2.0, &mut w)?;
            let k4 = velocity(hom, &(&x + &k3 * C64::from(step)), t + step, &mut w)?;
            Some(&x + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(step / 6.0))
        })();
        let corrected = predicted.and_then(|p| correct(hom, p, t + step, cfg, &mut w));
        match corrected {
            Some(nx) if norm(&nx) < DIVERGENCE => {
                x = nx;
                t = if step == 1.0 - t { 1.0 } else { t + step };
                streak += 1;
                if streak >= 3 {
                    dt = (dt * 2.0).min(cfg.max_step);
                    streak = 0;
                }
            }
            _ => {
                streak = 0;
                dt /= 2.0;
                if dt < cfg.min_step {
                    return PathEnd::Failed { t, x: x.as_slice().to_vec() };
                }
            }
        }
    }
    PathEnd::Reached(x.as_slice().to_vec())
}

/// Solutions of a square system at its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Fibre {
    pub basis: FaceSet,
    pub parameter: Vec<C64>,
    /// Edge coordinates of each solution.
    pub edges: Vec<Vec<C64>>,
    /// Full squared-volume points, indexed by ground set.
    pub points: Vec<Vec<C64>>,
    /// Max defining-equation residual per point.
    pub residuals: Vec<f64>,
}

impl Fibre {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn assemble(sys: &SquareSystem, mut edges: Vec<Vec<C64>>) -> Result<Self, HomotopyError> {
        edges.sort_by(|a, b| cmp_points(a, b));
        let model = HeronModel::get(sys.n)?;
        let points = edges.iter().map(|x| model.parametrize(x)).collect::<Result<Vec<_>, _>>()?;
        let residuals = edges.iter().map(|x| sys.residual(x)).collect();
        Ok(Fibre { basis: sys.basis, parameter: sys.parameters.clone(), edges, points, residuals })
    }

    /// Index of the fibre point nearest to `x` in edge coordinates, if it is
    /// within `tol` (relative) and no other point is.
    pub fn match_point(&self, x: &[C64], tol: f64) -> Option<usize> {
        let mut hits = self.edges.iter().enumerate().filter(|(_, y)| close(x, y, tol));
        let first = hits.next()?.0;
        hits.next().is_none().then_some(first)
    }
}

fn cmp_points(a: &[C64], b: &[C64]) -> Ordering {
    for (u, v) in a.iter().zip(b) {
        let o = u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt()
}

fn pnorm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
    dist(a, b) <= tol * 1f64.max(pnorm(a)).max(pnorm(b))
}

/// Where a total-degree path ended up.
enum Endpoint {
    Finite(Vec<C64>),
    AtInfinity,
    Failure,
}

/// Relative size of the homogenizing coordinate below which an endpoint is
/// taken to lie at infinity.
const INFINITY_RATIO: f64 = 1e-4;
/// Looser ratio for paths that stall or fail to refine near `t = 1`.
const STALL_RATIO: f64 = 1e-2;
/// Distance from `t = 1` within which a stalled path counts as singular.
const STALL_WINDOW: f64 = 1e-3;

/// For generic parameters every finite solution is nonsingular, so a path
/// that stalls just short of `t = 1` with a small homogenizing coordinate is
/// heading to infinity.
fn classify_endpoint(sys: &SquareSystem, end: PathEnd, cfg: &TrackerConfig) -> Endpoint {
    let (x, reached, t) = match end {
        PathEnd::Reached(x) => (x, true, 1.0),
        PathEnd::Failed { t, x } => (x, false, t),
    };
    let ratio = x[0].norm() / pnorm(&x);
    if ratio < INFINITY_RATIO && (reached || 1.0 - t < STALL_WINDOW) {
        return Endpoint::AtInfinity;
    }
    if !reached {
        return if ratio < STALL_RATIO && 1.0 - t < STALL_WINDOW { Endpoint::AtInfinity } else { Endpoint::Failure };
    }
    let affine: Vec<C64> = x[1..].iter().map(|v| v / x[0]).collect();
    match sys.refine(&affine, cfg.refinement_tolerance, cfg.max_refinement_iters) {
        Some((y, _)) => Endpoint::Finite(y),
        None if ratio < STALL_RATIO => Endpoint::AtInfinity,
        None => Endpoint::Failure,
    }
}

fn unit_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Complex parameters with independent standard normal real and imaginary parts.
pub fn random_complex_parameters<R: Rng + ?Sized>(rng: &mut R, len: usize, radius: f64) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * radius
        })
        .collect()
}

/// All isolated solutions via a total-degree homotopy with the gamma trick.
pub fn solve(sys: &SquareSystem, cfg: &TrackerConfig, seed: u64) -> Result<Fibre, HomotopyError> {
    cfg.validate()?;
    let e = sys.num_unknowns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start_coeffs: Vec<C64> = (0..e).map(|_| unit_complex(&mut rng)).collect();
    let gamma = unit_complex(&mut rng);
    let chart: Vec<C64> = (0..=e).map(|_| unit_complex(&mut rng)).collect();
    let hom = TotalDegree {
        sys,
        hom: sys.equations.iter().zip(&sys.degrees).map(|(p, &d)| p.homogenized(d)).collect(),
        start_coeffs,
        gamma,
        chart,
        max_deg: sys.degrees.iter().copied().max().unwrap_or(1) as usize,
    };
    let paths = sys.bezout_number() as usize;
    let start = |k: usize| -> Vec<C64> {
        let mut rest = k;
        let mut x = vec![C64::new(1.0, 0.0)];
        for i in 0..e {
            let d = sys.degrees[i] as usize;
            let j = rest % d;
            rest /= d;
            let r = hom.start_coeffs[i];
            let root =
                C64::from_polar(r.norm().powf(1.0 / d as f64), (r.arg() + std::f64::consts::TAU * j as f64) / d as f64);
            x.push(root);
        }
        let scale: C64 = x.iter().zip(&hom.chart).map(|(a, c)| a * c).sum();
        x.iter().map(|v| v / scale).collect()
    };
    let run = |k: usize, c: &TrackerConfig| classify_endpoint(sys, track(&hom, &start(k), c), c);
    let mut ends: Vec<Endpoint> = (0..paths).into_par_iter().map(|k| run(k, cfg)).collect();
    let tight = cfg.tightened();
    let mut failed = 0;
    for (k, end) in ends.iter_mut().enumerate() {
        if matches!(end, Endpoint::Failure) {
            *end = run(k, &tight);
            if matches!(end, Endpoint::Failure) {
                failed += 1;
            }
        }
    }
    if failed > cfg.path_failure_budget {
        return Err(HomotopyError::SolveFailure { failed, paths });
    }
    let mut sols: Vec<Vec<C64>> = Vec::new();
    for end in ends {
        if let Endpoint::Finite(x) = end {
            if !sols.iter().any(|y| close(&x, y, cfg.dedup_tolerance)) {
                sols.push(x);
            }
        }
    }
    Fibre::assemble(sys, sols)
}

/// Smallest relative homogenizing coordinate accepted at the end of a
/// parameter path. Solutions far out along a direction at infinity are
/// genuine for special real parameters, so this is much looser than the
/// cutoff used for total-degree endpoints.
const FAR_RATIO: f64 = 1e-10;

/// Moves every point of `f` along the straight segment to `b_new`.
/// Output points are aligned with input points.
pub fn parameter_homotopy(f: &Fibre, b_new: &[C64], cfg: &TrackerConfig) -> Result<Fibre, HomotopyError> {
    cfg.validate()?;
    let sys0 = square_system(&f.basis, &f.parameter)?;
    let sys1 = sys0.with_parameters(b_new)?;
    let hom: Vec<CompiledPoly> = sys0.equations.iter().zip(&sys0.degrees).map(|(p, &d)| p.homogenized(d)).collect();
    let max_deg = sys0.degrees.iter().copied().max().unwrap_or(1) as usize;
    let tight = cfg.tightened();
    let ends: Vec<Option<Vec<C64>>> = f
        .edges
        .par_iter()
        .map(|x| {
            let start: Vec<C64> = std::iter::once(C64::new(1.0, 0.0)).chain(x.iter().copied()).collect();
            let n2: f64 = start.iter().map(|v| v.norm_sqr()).sum();
            let chart: Vec<C64> = start.iter().map(|v| v.conj() / n2).collect();
            let path = ParameterPath { sys: &sys0, hom: &hom, b0: &f.parameter, b1: b_new, chart, max_deg };
            [cfg, &tight].iter().find_map(|c| match track(&path, &start, c) {
                PathEnd::Reached(y) if y[0].norm() > FAR_RATIO * pnorm(&y) => {
                    let affine: Vec<C64> = y[1..].iter().map(|v| v / y[0]).collect();
                    sys1.refine(&affine, c.refinement_tolerance, c.max_refinement_iters).map(|r| r.0)
                }
                _ => None,
            })
        })
        .collect();
    let failed: Vec<usize> = ends.iter().enumerate().filter(|(_, e)| e.is_none()).map(|(i, _)| i).collect();
    if !failed.is_empty() {
        return Err(HomotopyError::PathFailures(failed));
    }
    let edges: Vec<Vec<C64>> = ends.into_iter().flatten().collect();
    let model = HeronModel::get(f.basis.n())?;
    let points = edges.iter().map(|x| model.parametrize(x)).collect::<Result<Vec<_>, _>>()?;
    let residuals = edges.iter().map(|x| sys1.residual(x)).collect();
    Ok(Fibre { basis: f.basis, parameter: b_new.to_vec(), edges, points, residuals })
}

/// Samples complex parameters until a solve succeeds.
pub fn generic_fibre(basis: &FaceSet, cfg: &TrackerConfig, seed: u64) -> Result<Fibre, HomotopyError> {
    const ATTEMPTS: usize = 5;
    let e = num_edges(basis.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let b = random_complex_parameters(&mut rng, e, 1.0);
        let sys = square_system(basis, &b)?;
        match solve(&sys, cfg, rng.random()) {
            Ok(f) => return Ok(f),
            Err(HomotopyError::SolveFailure { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(HomotopyError::NoGenericFibre(ATTEMPTS))
}

/// Degree of the branched cover: the fibre size, stable across three random
/// complex parameters and no larger than the mixed volume when that is
/// computable.
pub fn degree(basis: &FaceSet, cfg: &TrackerConfig, seed: u64) -> Result<usize, HomotopyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts =
        (0..3).map(|_| generic_fibre(basis, cfg, rng.random()).map(|f| f.len())).collect::<Result<Vec<_>, _>>()?;
    if counts.iter().any(|&c| c != counts[0]) {
        return Err(HomotopyError::Unstable(counts));
    }
    match bkk_bound(basis) {
        Ok(mv) if counts[0] as u64 > mv => Err(HomotopyError::AboveBkkBound { count: counts[0], bound: mv }),
        Ok(_) | Err(BkkError::DimensionUnsupported(_)) => Ok(counts[0]),
        Err(e) => panic!("polytopes of a square system are well formed: {e}"),
    }
}

/// Mixed volume of the square system, cached per basis.
fn bkk_bound(basis: &FaceSet) -> Result<u64, BkkError> {
    static CACHE: OnceLock<Mutex<HashMap<FaceSet, u64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&mv) = cache.lock().expect("bound cache poisoned").get(basis) {
        return Ok(mv);
    }
    let mv = mixed_volume(&square_system_polytopes(basis)?, true)?;
    cache.lock().expect("bound cache poisoned").insert(*basis, mv);
    Ok(mv)
}

/// Loop radii cycled through when none is given.
pub const RADIUS_SWEEP: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

/// Result of a batch of monodromy loops.
#[derive(Clone, Debug)]
pub struct MonodromyRun {
    pub base: Fibre,
    pub permutations: Vec<Perm>,
    /// Loops dropped because a path failed or endpoints matched ambiguously.
    pub discarded: usize,
}

/// Tracks `f` around the closed polygon through `vertices`, returning the
/// induced permutation of its points.
pub fn loop_permutation(f: &Fibre, vertices: &[Vec<C64>], cfg: &TrackerConfig) -> Option<Perm> {
    let mut cur = f.clone();
    for v in vertices.iter().chain(std::iter::once(&f.parameter)) {
        cur = parameter_homotopy(&cur, v, cfg).ok()?;
    }
    let images: Vec<usize> =
        cur.edges.iter().map(|x| f.match_point(x, cfg.dedup_tolerance)).collect::<Option<Vec<_>>>()?;
    Perm::new(images).ok()
}

/// Permutations from `loops` random triangle loops based at a generic fibre.
/// Each triangle's two free vertices are complex normal samples scaled by
/// `radius`, or by [`RADIUS_SWEEP`] in turn when `radius` is `None`.
pub fn monodromy_permutations(
    basis: &FaceSet,
    loops: usize,
    radius: Option<f64>,
    cfg: &TrackerConfig,
    seed: u64,
) -> Result<MonodromyRun, HomotopyError> {
    let base = generic_fibre(basis, cfg, seed)?;
    let e = base.parameter.len();
    let results: Vec<Option<Perm>> = (0..loops)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let r = radius.unwrap_or(RADIUS_SWEEP[k % RADIUS_SWEEP.len()]);
            let tri = [random_complex_parameters(&mut rng, e, r), random_complex_parameters(&mut rng, e, r)];
            loop_permutation(&base, &tri, cfg)
        })
        .collect();
    let discarded = results.iter().filter(|p| p.is_none()).count();
    Ok(MonodromyRun { base, permutations: results.into_iter().flatten().collect(), discarded })
}

/// Partition of the fibre by equal values of one ground-set coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinatePartition {
    pub coordinate: usize,
    pub blocks: BlockSystem,
    /// Some pair sits within ten times the tolerance without merging.
    pub borderline: bool,
}

/// For each ground-set coordinate, groups fibre points whose values agree
/// within `tol` (relative).
pub fn coordinate_partitions(f: &Fibre, tol: f64) -> Vec<CoordinatePartition> {
    let d = f.len();
    let coords = f.points.first().map_or(0, Vec::len);
    (0..coords)
        .map(|i| {
            let mut label: Vec<usize> = (0..d).collect();
            fn find(l: &mut [usize], a: usize) -> usize {
                let mut r = a;
                while l[r] != r {
                    r = l[r];
                }
                l[a] = r;
                r
            }
            let mut borderline = false;
            for a in 0..d {
                for b in a + 1..d {
                    let (u, v) = (f.points[a][i], f.points[b][i]);
                    let scale = 1f64.max(u.norm()).max(v.norm());
                    let gap = (u - v).norm() / scale;
                    if gap <= tol {
                        let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                        label[ra.max(rb)] = ra.min(rb);
                    } else if gap <= 10.0 * tol {
                        borderline = true;
                    }
                }
            }
            let labels: Vec<usize> = (0..d).map(|a| find(&mut label, a)).collect();
            CoordinatePartition { coordinate: i, blocks: BlockSystem::from_labels(&labels), borderline }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn triangle_fibre_has_two_points() {
        let b = FaceSet::parse(2, "12,13,123").unwrap();
        let sys = square_system(&b, &[c(1.0), c(1.0), c(3.0 / 16.0)]).unwrap();
        let f = solve(&sys, &TrackerConfig::default(), 7).unwrap();
        assert_eq!(f.len(), 2);
        let mut x23: Vec<f64> = f.edges.iter().map(|x| x[2].re).collect();
        x23.sort_by(f64::total_cmp);
        assert!((x23[0] - 1.0).abs() < 1e-9 && (x23[1] - 3.0).abs() < 1e-9, "{x23:?}");
    }

    #[test]
    fn edge_basis_is_a_single_point() {
        let b = FaceSet::parse(3, "12,13,14,23,24,34").unwrap();
        let p: Vec<C64> = (1..=6).map(|k| c(k as f64)).collect();
        let f = solve(&square_system(&b, &p).unwrap(), &TrackerConfig::default(), 1).unwrap();
        assert_eq!(f.len(), 1);
        assert!(dist(&f.edges[0], &p) < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(TrackerConfig::default().validate().is_ok());
        let bad = TrackerConfig { min_step: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrackerConfig { dedup_tolerance: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
