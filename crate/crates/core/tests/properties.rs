//! Property suites: Heron identity, Jacobian against finite differences,
//! conjugate pairing of real fibres, block preservation under monodromy,
//! basis exchange and orbit invariance of canonical forms.

use heron::homotopy::{coordinate_partitions, monodromy_permutations, solve, square_system, TrackerConfig};
use heron::matroid::{is_basis_exact, is_basis_mc, is_nonbasis_bkk};
use heron::orbits::{apply_perm, canonical_form, n3_catalog_set, FaceSet, SymAction};
use heron::simplex::{heron_system, parametrize, HeronModel};
use heron::{Rational, C64};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1i64..=97).prop_map(|(p, q)| Rational::new(BigInt::from(p), BigInt::from(q)))
}

fn face_subset(n: usize, k: usize) -> impl Strategy<Value = FaceSet> {
    let len = heron::simplex::num_faces(n);
    proptest::sample::subsequence((0..len).collect::<Vec<_>>(), k)
        .prop_map(move |ix| FaceSet::from_bits(n, ix.iter().fold(0u128, |b, &i| b | 1 << i)))
}

fn permutation(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=k).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn heron_identity_holds_exactly(edges in proptest::collection::vec(rational(), 6)) {
        let x = parametrize(3, &edges).unwrap();
        for f in heron_system(3).unwrap() {
            prop_assert!(f.evaluate(&x).unwrap().is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn heron_identity_holds_exactly_n4(edges in proptest::collection::vec(rational(), 10)) {
        let x = parametrize(4, &edges).unwrap();
        for f in heron_system(4).unwrap() {
            prop_assert!(f.evaluate(&x).unwrap().is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn jacobian_matches_finite_differences(
        n in 2usize..=4,
        raw in proptest::collection::vec(0.5f64..2.0, 10),
    ) {
        let model = HeronModel::get(n).unwrap();
        let e = model.ground().num_edges();
        let x = &raw[..e];
        let rows: Vec<usize> = (0..model.ground().len()).collect();
        let jac = model.jacobian_at(&rows, x);
        let h = 1e-5;
        for c in 0..e {
            let (mut up, mut down) = (x.to_vec(), x.to_vec());
            up[c] += h;
            down[c] -= h;
            let (fu, fd) = (model.parametrize(&up).unwrap(), model.parametrize(&down).unwrap());
            for r in 0..rows.len() {
                let fd_quot = (fu[r] - fd[r]) / (2.0 * h);
                let exact = jac[r][c];
                prop_assert!(
                    (fd_quot - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                    "row {r} col {c}: {fd_quot} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn canonical_form_is_orbit_invariant(
        s in face_subset(3, 6),
        g in permutation(4),
    ) {
        let t = apply_perm(&g, &s).unwrap();
        prop_assert_eq!(canonical_form(&t).unwrap(), canonical_form(&s).unwrap());
        let act = SymAction::get(3).unwrap();
        prop_assert_eq!(act.canonical_form(&s), act.canonical_brute_force(&s));
        prop_assert_eq!(act.orbit_size(&s), act.orbit_size(&t));
    }

    #[test]
    fn canonical_form_is_orbit_invariant_n4(
        s in face_subset(4, 10),
        g in permutation(5),
    ) {
        let t = apply_perm(&g, &s).unwrap();
        prop_assert_eq!(canonical_form(&t).unwrap(), canonical_form(&s).unwrap());
    }

    #[test]
    fn classifiers_nest(s in face_subset(3, 6), seed in any::<u64>()) {
        let exact = is_basis_exact(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if is_basis_mc(&s, 3, &mut rng).unwrap().is_basis() {
            prop_assert!(exact.is_basis());
        }
        if is_nonbasis_bkk(&s).unwrap().is_some() {
            prop_assert!(!exact.is_basis());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn basis_exchange(a in face_subset(3, 6), b in face_subset(3, 6), pick in any::<prop::sample::Index>()) {
        let basis = |s: &FaceSet| is_basis_exact(s).unwrap().is_basis();
        prop_assume!(basis(&a) && basis(&b) && a != b);
        let only_a: Vec<usize> = a.indices().filter(|&i| !b.contains_index(i)).collect();
        let x = only_a[pick.index(only_a.len())];
        let found = b
            .indices()
            .filter(|&y| !a.contains_index(y))
            .any(|y| basis(&a.without_index(x).with_index(y)));
        prop_assert!(found, "no exchange for {x} between {a} and {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn real_fibres_pair_under_conjugation(
        index in prop::sample::select(vec![3usize, 7, 9, 12, 18, 21]),
        raw in proptest::collection::vec(0.5f64..2.0, 6),
        seed in any::<u64>(),
    ) {
        let basis = n3_catalog_set(index).unwrap();
        let point = HeronModel::get(3).unwrap().parametrize(&raw).unwrap();
        let b: Vec<C64> = basis.indices().map(|i| C64::new(point[i], 0.0)).collect();
        let cfg = TrackerConfig::default();
        let f = solve(&square_system(&basis, &b).unwrap(), &cfg, seed).unwrap();
        for x in &f.edges {
            let conj: Vec<C64> = x.iter().map(|z| z.conj()).collect();
            prop_assert!(f.match_point(&conj, 1e-6).is_some(), "conjugate of {x:?} missing");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn monodromy_preserves_coordinate_blocks(
        index in prop::sample::select(vec![7usize, 9, 18, 33]),
        seed in any::<u64>(),
    ) {
        let basis = n3_catalog_set(index).unwrap();
        let run = monodromy_permutations(&basis, 12, Some(1.0), &TrackerConfig::default(), seed).unwrap();
        let parts = coordinate_partitions(&run.base, 1e-6);
        for g in &run.permutations {
            for p in parts.iter().filter(|p| !p.borderline) {
                prop_assert!(p.blocks.is_preserved_by(g), "coordinate {} broken by {:?}", p.coordinate, g);
            }
        }
    }
}
