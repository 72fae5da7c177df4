//! `heron`: command-line front end for orbit enumeration, matroid
//! classification, base degrees, monodromy and symmetry groups, sampling
//! experiments and report tables. Results are appended to a store file.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use heron::homotopy::{degree, generic_fibre, TrackerConfig};
use heron::lab::diagram::symmetry_diagram;
use heron::lab::experiment::{run_experiment, ExperimentConfig, REALITY_TOLERANCE};
use heron::lab::report::{experiment_table, orbit_table};
use heron::lab::store::{MonodromyEntry, OrbitEntry, Record, Store, SymmetryEntry, VerdictEntry};
use heron::lab::{coordinate_symmetry, indexed_orbits, monodromy_group, orbit_faces, IndexedOrbit};
use heron::matroid::{
    classify_candidates, explanation_tally, is_basis_exact, is_basis_mc, is_nonbasis_bkk, BasisVerdict, Method,
    Verdict, Witness, MC_TRIALS,
};

#[derive(Parser)]
#[command(name = "heron", version, about = "Algebraic matroids and branched covers of Heron varieties")]
struct Cli {
    /// Result store (created if missing).
    #[arg(long, global = true, default_value = "heron-store.tsv")]
    store: PathBuf,
    /// TOML file with `seed`, `reality_tolerance`, `checkpoint_every` and a `[tracker]` table.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate orbits of candidate bases.
    Orbits { n: usize },
    /// Classify every orbit as basis or non-basis.
    Matroid {
        n: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Pipeline)]
        method: MethodArg,
        /// Tally why each non-basis fails.
        #[arg(long)]
        explain: bool,
    },
    /// Degree of the branched cover of one orbit.
    Degree {
        n: usize,
        #[arg(long)]
        orbit: usize,
    },
    /// Monodromy group from random loops.
    Monodromy {
        n: usize,
        #[arg(long)]
        orbit: usize,
        #[arg(long, default_value_t = 200)]
        loops: usize,
        /// Cycle loop radii through 0.01, 0.1, 1, 10.
        #[arg(long, conflicts_with = "radius")]
        radius_sweep: bool,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Coordinate symmetry group and diagram.
    Symmetry {
        n: usize,
        #[arg(long)]
        orbit: usize,
        /// Also write the diagram as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Count real, positive and realizable points over sampled real fibres.
    Experiment {
        n: usize,
        #[arg(long)]
        orbit: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the orbit and experiment tables from the store.
    Report { n: usize },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mc,
    Bkk,
    Exact,
    Pipeline,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    seed: u64,
    reality_tolerance: f64,
    checkpoint_every: usize,
    tracker: TrackerConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            reality_tolerance: REALITY_TOLERANCE,
            checkpoint_every: 1000,
            tracker: TrackerConfig::default(),
        }
    }
}

impl Config {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let cfg: Config = match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => Config::default(),
        };
        cfg.tracker.validate()?;
        Ok(cfg)
    }

    fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            tracker: self.tracker.clone(),
            reality_tolerance: self.reality_tolerance,
            checkpoint_every: self.checkpoint_every,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = Config::load(cli.config.as_ref())?;
    let mut store = Store::open(&cli.store).with_context(|| format!("opening store {}", cli.store.display()))?;
    match cli.command {
        Command::Orbits { n } => orbits(n, &mut store),
        Command::Matroid { n, method, explain } => matroid(n, method, explain, &cfg, &mut store),
        Command::Degree { n, orbit } => {
            let basis = orbit_faces(n, orbit)?;
            let d = degree(&basis, &cfg.tracker, cfg.seed)?;
            println!("orbit {orbit} {{{basis}}}: degree {d}");
            store.append(Record::Degree { n, index: orbit, degree: d })?;
            Ok(())
        }
        Command::Monodromy { n, orbit, loops, radius_sweep, radius } => {
            let basis = orbit_faces(n, orbit)?;
            let radius = if radius_sweep { None } else { Some(radius.unwrap_or(1.0)) };
            let m = monodromy_group(&basis, loops, radius, &cfg.tracker, cfg.seed)?;
            let g = &m.group;
            println!("orbit {orbit} {{{basis}}}: degree {}", m.run.base.len());
            println!(
                "group {} of order {} ({})",
                g.label,
                g.order,
                if g.solvable { "solvable" } else { "not solvable" }
            );
            println!("loops {loops}, discarded {}", m.run.discarded);
            store.append(Record::Monodromy(MonodromyEntry {
                n,
                index: orbit,
                degree: m.run.base.len(),
                loops,
                radius,
                discarded: m.run.discarded,
                generators: g.group.generators().to_vec(),
                label: g.label.clone(),
                order: g.order.clone(),
                solvable: g.solvable,
            }))?;
            Ok(())
        }
        Command::Symmetry { n, orbit, svg, tolerance } => {
            let basis = orbit_faces(n, orbit)?;
            let f = generic_fibre(&basis, &cfg.tracker, cfg.seed)?;
            let (g, borderline) = coordinate_symmetry(&f, tolerance)?;
            let diagram = symmetry_diagram(&f, tolerance)?;
            print!("{}", diagram.to_text());
            println!("symmetry group {} of order {}", g.label, g.order);
            if borderline > 0 {
                println!("warning: {borderline} coordinates have near-ties at tolerance {tolerance:e}");
            }
            if let Some(path) = svg {
                fs::write(&path, diagram.to_svg()).with_context(|| format!("writing {}", path.display()))?;
            }
            store.append(Record::Symmetry(SymmetryEntry {
                n,
                index: orbit,
                degree: f.len(),
                label: g.label,
                order: g.order,
                solvable: g.solvable,
                borderline,
            }))?;
            Ok(())
        }
        Command::Experiment { n, orbit, samples, seed } => {
            let basis = orbit_faces(n, orbit)?;
            let seed = seed.unwrap_or(cfg.seed);
            let started = Instant::now();
            let row = run_experiment(orbit, &basis, samples, seed, &cfg.experiment(), Some(&mut store))?;
            let fmt = |s: std::collections::BTreeSet<usize>| format!("{s:?}");
            println!("orbit {orbit} {{{basis}}}: degree {}, {} fibres", row.degree, row.tally.fibres);
            println!("real {}", fmt(row.observed_real()));
            println!("positive {}", fmt(row.observed_positive()));
            println!("realizable {}", fmt(row.observed_realizable()));
            println!(
                "mean realizable points per fibre {:.4} (standard error {:.4})",
                row.mean_realizable(),
                row.standard_error()
            );
            println!(
                "failures {}, borderline {}, parity violations {}, real != positive {}",
                row.tally.failures, row.tally.borderline, row.tally.parity_violations, row.tally.real_not_positive
            );
            if !row.is_valid() {
                println!("warning: failure rate {:.2}% exceeds 1%; row is invalid", 100.0 * row.failure_rate());
            }
            eprintln!("elapsed {:.1?}", started.elapsed());
            Ok(())
        }
        Command::Report { n } => {
            print!("{}", orbit_table(&store, n));
            println!();
            print!("{}", experiment_table(&store, n));
            Ok(())
        }
    }
}

fn orbits(n: usize, store: &mut Store) -> Result<()> {
    let started = Instant::now();
    let all = indexed_orbits(n)?;
    let known = store.orbits(n);
    let mut weighted = 0u64;
    println!("index\tfaces\tfvec\torbit_size");
    for o in &all {
        weighted += o.rep.orbit_size;
        println!("{}\t{}\t{}\t{}", o.index, o.faces, o.rep.fvec, o.rep.orbit_size);
        if known.get(&o.index).and_then(|r| r.faces).is_none() {
            store.append(Record::Orbit(OrbitEntry {
                n,
                index: o.index,
                faces: o.faces,
                fvec: o.rep.fvec.clone(),
                orbit_size: o.rep.orbit_size,
            }))?;
        }
    }
    eprintln!("{} orbits, {} subsets, {:.1?}", all.len(), weighted, started.elapsed());
    Ok(())
}

fn matroid(n: usize, method: MethodArg, explain: bool, cfg: &Config, store: &mut Store) -> Result<()> {
    let started = Instant::now();
    let all: Vec<IndexedOrbit> = indexed_orbits(n)?;
    let sets: Vec<_> = all.iter().map(|o| o.faces).collect();
    let verdicts: Vec<BasisVerdict> = match method {
        MethodArg::Pipeline => {
            let (v, stats) = classify_candidates(n, &sets, cfg.seed)?;
            eprintln!(
                "random evaluation: {} bases; mixed volume: {} non-bases; exact: {} bases, {} non-bases",
                stats.mc_bases, stats.bkk_nonbases, stats.exact_bases, stats.exact_nonbases
            );
            v
        }
        MethodArg::Mc => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            sets.iter().map(|b| is_basis_mc(b, MC_TRIALS, &mut rng)).collect::<Result<_, _>>()?
        }
        MethodArg::Bkk => sets
            .iter()
            .map(|b| {
                Ok(is_nonbasis_bkk(b)?.unwrap_or(BasisVerdict {
                    subset: *b,
                    verdict: Verdict::Basis,
                    method: Method::BkkZero,
                    witness: Witness::Unconfirmed,
                }))
            })
            .collect::<Result<_>>()?,
        MethodArg::Exact => sets.iter().map(is_basis_exact).collect::<Result<_, _>>()?,
    };
    let bases = verdicts.iter().filter(|v| v.is_basis()).count();
    for (o, v) in all.iter().zip(&verdicts) {
        store.append(Record::Verdict(VerdictEntry {
            n,
            index: o.index,
            verdict: v.verdict,
            method: v.method,
            witness: v.witness.clone(),
        }))?;
    }
    println!("{} orbits: {} bases, {} non-bases", all.len(), bases, all.len() - bases);
    if n == 3 {
        let idx: Vec<String> =
            all.iter().zip(&verdicts).filter(|(_, v)| !v.is_basis()).map(|(o, _)| o.index.to_string()).collect();
        println!("non-basis orbits: {}", idx.join(","));
    }
    let uncertified = verdicts.iter().filter(|v| !v.is_certified()).count();
    if uncertified > 0 {
        println!("{uncertified} verdicts are not certified by this method");
    }
    if explain {
        let nonbases: Vec<_> = verdicts.iter().filter(|v| !v.is_basis()).map(|v| v.subset).collect();
        if !matches!(method, MethodArg::Pipeline | MethodArg::Exact) && uncertified > 0 {
            bail!("--explain needs certified verdicts; use --method pipeline or exact");
        }
        let tally = explanation_tally(&nonbases, n, cfg.seed)?;
        let mut rows: Vec<_> = tally.into_iter().collect();
        rows.sort_by_key(|(e, _)| e.to_string());
        for (e, c) in rows {
            println!("{e}\t{c}");
        }
    }
    eprintln!("elapsed {:.1?}", started.elapsed());
    Ok(())
}
