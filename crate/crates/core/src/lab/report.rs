//! Tab-separated summary tables rendered from a store.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::store::Store;

fn set(s: &BTreeSet<usize>) -> String {
    let v: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or("-".to_string(), |x| x.to_string())
}

/// Per-orbit verdicts, degrees, monodromy and coordinate-symmetry groups.
pub fn orbit_table(store: &Store, n: usize) -> String {
    let mut out = String::from(
        "index\tfaces\torbit_size\tverdict\tdegree\tmonodromy_group\tmonodromy_order\tsolvable\tsymmetry_group\tsymmetry_order\tloops\tdiscarded\n",
    );
    for (index, o) in store.orbits(n) {
        let m = o.monodromy.as_ref();
        let s = o.symmetry.as_ref();
        writeln!(
            out,
            "{index}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            opt(o.faces),
            opt(o.orbit_size),
            opt(o.verdict.as_ref().map(|v| v.verdict)),
            opt(o.degree),
            opt(m.map(|m| m.label.clone())),
            opt(m.map(|m| m.order.clone())),
            opt(m.map(|m| m.solvable)),
            opt(s.map(|s| s.label.clone())),
            opt(s.map(|s| s.order.clone())),
            opt(m.map(|m| m.loops)),
            opt(m.map(|m| m.discarded)),
        )
        .expect("string write");
    }
    out
}

/// Observed count sets and mean realizable points per fibre.
pub fn experiment_table(store: &Store, n: usize) -> String {
    let mut out = String::from(
        "index\tdegree\tsamples\tfibres\tfailures\tobserved_real\tobserved_positive\tobserved_realizable\tmean realizable points per fibre\tstandard_error\tborderline\tvalid\n",
    );
    for (index, e) in store.experiments(n) {
        writeln!(
            out,
            "{index}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{}",
            e.degree,
            e.samples,
            e.tally.fibres,
            e.tally.failures,
            set(&e.observed_real()),
            set(&e.observed_positive()),
            set(&e.observed_realizable()),
            e.mean_realizable(),
            e.standard_error(),
            e.tally.borderline,
            e.is_valid() && e.is_complete(),
        )
        .expect("string write");
    }
    out
}
